#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fairrm/instance.hpp"

namespace fairrm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// max c.x  subject to  G.x <= h,  lower <= x <= upper.
struct LinearProgram {
    Vec c;
    Matrix G;   // p rows, k columns
    Vec h;      // length p
    Vec lower;  // length k
    Vec upper;  // length k, kInf allowed

    std::size_t num_vars() const { return c.size(); }
    std::size_t num_rows() const { return G.size(); }
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    Vec x_star;                      // primal optimum, length k
    Vec theta_star;                  // duals of the G rows, length p, >= 0
    double objective_value = 0.0;
    double dual_objective_value = 0.0;  // includes box-row duals; >= primal at optimum
};

// Dense two-phase primal simplex with Bland's rule (deterministic pivoting,
// no cycling). Suitable for the small instances this project works with.
LPSolution solve_lp(const LinearProgram& lp);

std::string lp_debug_dump(const LinearProgram& lp);

// Eq-style deterministic LP on the remaining problem: variables are
// per-round acceptance rates x_i, objective rounds * sum_i r_i x_i, resource
// rows sum_i A_ij x_i <= capacity_j / rounds, box 0 <= x_i <= lambda_i.
LinearProgram build_dlp(const Instance& inst, const Vec& remaining_capacity,
                        int remaining_rounds);

// Hindsight program on realized counts: max sum r_i X_i subject to
// sum_i A_ij X_i <= m_j, 0 <= X_i <= counts_i (continuous relaxation).
LinearProgram build_hindsight(const Instance& inst, const std::vector<int>& counts);

// DLP solve with duals rescaled to revenue units, i.e. theta such that a
// type-i customer is worth accepting iff r_i > sum_j theta_j A_ij.
struct DlpSolution {
    LPStatus status = LPStatus::Infeasible;
    Vec x_star;       // per-round rates
    Vec theta_star;   // bid prices per unit of each resource
    double objective_value = 0.0;
};

DlpSolution solve_dlp(const Instance& inst, const Vec& remaining_capacity,
                      int remaining_rounds);

}  // namespace fairrm
