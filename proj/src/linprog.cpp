#include "fairrm/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairrm {

namespace {

constexpr double kEps = 1e-9;

// Tableau for max c.y, Ay <= b, y >= 0 (b may be negative; phase 1 uses
// artificials on the negated rows). Column order: structurals, slacks,
// artificials, rhs.
struct Tableau {
    int rows = 0;
    int structurals = 0;
    int arts = 0;
    std::vector<Vec> a;        // rows x (cols+1), last entry = rhs
    Vec obj;                   // cols+1, obj[j] = reduced cost, obj.back() = value
    std::vector<int> basis;    // variable index per row
    std::vector<int> row_sign; // +1, or -1 if the row was negated in setup

    int cols() const { return structurals + rows + arts; }

    void pivot(int pr, int pc) {
        const double piv = a[pr][pc];
        for (double& v : a[pr]) v /= piv;
        for (int i = 0; i < rows; ++i) {
            if (i == pr) continue;
            const double f = a[i][pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] -= f * a[pr][j];
        }
        const double f = obj[pc];
        if (f != 0.0)
            for (std::size_t j = 0; j < obj.size(); ++j) obj[j] -= f * a[pr][j];
        basis[pr] = pc;
    }

    // Bland: entering = lowest-index column with negative reduced cost;
    // leaving = min ratio, ties by lowest basic variable index.
    // Returns Optimal or Unbounded.
    LPStatus run(bool allow_artificial_entering) {
        const long max_iter = 20000L * (rows + cols() + 1);
        for (long it = 0; it < max_iter; ++it) {
            int pc = -1;
            const int limit = allow_artificial_entering ? cols() : structurals + rows;
            for (int j = 0; j < limit; ++j)
                if (obj[j] < -kEps) {
                    pc = j;
                    break;
                }
            if (pc < 0) return LPStatus::Optimal;

            int pr = -1;
            double best = 0.0;
            for (int i = 0; i < rows; ++i) {
                if (a[i][pc] <= kEps) continue;
                const double ratio = a[i].back() / a[i][pc];
                if (pr < 0 || ratio < best - 1e-12 ||
                    (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[pr])) {
                    pr = i;
                    best = ratio;
                }
            }
            if (pr < 0) return LPStatus::Unbounded;
            pivot(pr, pc);
        }
        throw std::logic_error("simplex: iteration limit reached");
    }
};

}  // namespace

LPSolution solve_lp(const LinearProgram& lp) {
    const int k = static_cast<int>(lp.num_vars());
    const int p = static_cast<int>(lp.num_rows());
    if (k == 0) throw std::invalid_argument("solve_lp: no variables");
    if (static_cast<int>(lp.h.size()) != p || static_cast<int>(lp.lower.size()) != k ||
        static_cast<int>(lp.upper.size()) != k)
        throw std::invalid_argument("solve_lp: inconsistent dimensions");
    for (int i = 0; i < p; ++i)
        if (static_cast<int>(lp.G[i].size()) != k)
            throw std::invalid_argument("solve_lp: G row width mismatch");

    LPSolution sol;
    for (int j = 0; j < k; ++j)
        if (lp.lower[j] > lp.upper[j] + kEps) {
            sol.status = LPStatus::Infeasible;
            return sol;
        }

    // Shift to y = x - lower >= 0; box uppers become explicit rows.
    std::vector<int> ub_rows;  // variable index per upper-bound row
    for (int j = 0; j < k; ++j)
        if (lp.upper[j] < kInf) ub_rows.push_back(j);

    const int rows = p + static_cast<int>(ub_rows.size());
    std::vector<Vec> rowA(static_cast<std::size_t>(rows), Vec(static_cast<std::size_t>(k), 0.0));
    Vec rowB(static_cast<std::size_t>(rows), 0.0);
    for (int i = 0; i < p; ++i) {
        double shift = 0.0;
        for (int j = 0; j < k; ++j) {
            rowA[i][static_cast<std::size_t>(j)] = lp.G[i][static_cast<std::size_t>(j)];
            shift += lp.G[i][static_cast<std::size_t>(j)] * lp.lower[static_cast<std::size_t>(j)];
        }
        rowB[static_cast<std::size_t>(i)] = lp.h[static_cast<std::size_t>(i)] - shift;
    }
    for (std::size_t q = 0; q < ub_rows.size(); ++q) {
        const int j = ub_rows[q];
        rowA[static_cast<std::size_t>(p) + q][static_cast<std::size_t>(j)] = 1.0;
        rowB[static_cast<std::size_t>(p) + q] =
            lp.upper[static_cast<std::size_t>(j)] - lp.lower[static_cast<std::size_t>(j)];
    }

    Tableau tab;
    tab.rows = rows;
    tab.structurals = k;
    tab.basis.assign(static_cast<std::size_t>(rows), -1);
    tab.row_sign.assign(static_cast<std::size_t>(rows), 1);

    int arts = 0;
    for (int i = 0; i < rows; ++i)
        if (rowB[static_cast<std::size_t>(i)] < 0.0) ++arts;
    tab.arts = arts;

    const int cols = k + rows + arts;
    tab.a.assign(static_cast<std::size_t>(rows), Vec(static_cast<std::size_t>(cols) + 1, 0.0));
    int art_next = k + rows;
    for (int i = 0; i < rows; ++i) {
        const double sign = rowB[static_cast<std::size_t>(i)] < 0.0 ? -1.0 : 1.0;
        tab.row_sign[static_cast<std::size_t>(i)] = static_cast<int>(sign);
        for (int j = 0; j < k; ++j)
            tab.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                sign * rowA[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        tab.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(k + i)] = sign;
        tab.a[static_cast<std::size_t>(i)].back() = sign * rowB[static_cast<std::size_t>(i)];
        if (sign < 0.0) {
            tab.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(art_next)] = 1.0;
            tab.basis[static_cast<std::size_t>(i)] = art_next++;
        } else {
            tab.basis[static_cast<std::size_t>(i)] = k + i;
        }
    }

    if (arts > 0) {
        // Phase 1: max -(sum of artificials).
        tab.obj.assign(static_cast<std::size_t>(cols) + 1, 0.0);
        for (int j = k + rows; j < cols; ++j) tab.obj[static_cast<std::size_t>(j)] = 1.0;
        for (int i = 0; i < rows; ++i)
            if (tab.basis[static_cast<std::size_t>(i)] >= k + rows)
                for (std::size_t j = 0; j < tab.obj.size(); ++j)
                    tab.obj[j] -= tab.a[static_cast<std::size_t>(i)][j];
        const LPStatus st = tab.run(true);
        if (st != LPStatus::Optimal || tab.obj.back() < -1e-7) {
            sol.status = LPStatus::Infeasible;
            return sol;
        }
        // Pivot leftover artificials out of the basis where possible.
        for (int i = 0; i < rows; ++i) {
            if (tab.basis[static_cast<std::size_t>(i)] < k + rows) continue;
            int pc = -1;
            for (int j = 0; j < k + rows; ++j)
                if (std::abs(tab.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) > kEps) {
                    pc = j;
                    break;
                }
            if (pc >= 0) tab.pivot(i, pc);
        }
    }

    // Phase 2 objective row: obj = -c_ext + sum over basic rows c_B * row.
    tab.obj.assign(static_cast<std::size_t>(tab.cols()) + 1, 0.0);
    for (int j = 0; j < k; ++j) tab.obj[static_cast<std::size_t>(j)] = -lp.c[static_cast<std::size_t>(j)];
    for (int i = 0; i < rows; ++i) {
        const int b = tab.basis[static_cast<std::size_t>(i)];
        if (b < k && lp.c[static_cast<std::size_t>(b)] != 0.0)
            for (std::size_t j = 0; j < tab.obj.size(); ++j)
                tab.obj[j] += lp.c[static_cast<std::size_t>(b)] * tab.a[static_cast<std::size_t>(i)][j];
    }

    const LPStatus st = tab.run(false);
    if (st == LPStatus::Unbounded) {
        sol.status = LPStatus::Unbounded;
        return sol;
    }

    sol.status = LPStatus::Optimal;
    sol.x_star = lp.lower;
    for (int i = 0; i < rows; ++i) {
        const int b = tab.basis[static_cast<std::size_t>(i)];
        if (b < k) sol.x_star[static_cast<std::size_t>(b)] += tab.a[static_cast<std::size_t>(i)].back();
    }
    sol.objective_value = 0.0;
    for (int j = 0; j < k; ++j)
        sol.objective_value += lp.c[static_cast<std::size_t>(j)] * sol.x_star[static_cast<std::size_t>(j)];

    // Row duals read off the slack columns; undo the phase-1 row negation.
    Vec all_duals(static_cast<std::size_t>(rows), 0.0);
    for (int i = 0; i < rows; ++i) {
        double y = tab.obj[static_cast<std::size_t>(k + i)] * tab.row_sign[static_cast<std::size_t>(i)];
        if (y < 0.0 && y > -1e-9) y = 0.0;
        all_duals[static_cast<std::size_t>(i)] = y;
    }
    sol.theta_star.assign(all_duals.begin(), all_duals.begin() + p);

    double dual_obj = 0.0;
    for (int i = 0; i < rows; ++i) dual_obj += all_duals[static_cast<std::size_t>(i)] * rowB[static_cast<std::size_t>(i)];
    for (int j = 0; j < k; ++j) dual_obj += lp.c[static_cast<std::size_t>(j)] * lp.lower[static_cast<std::size_t>(j)];
    sol.dual_objective_value = dual_obj;
    return sol;
}

std::string lp_debug_dump(const LinearProgram& lp) {
    std::ostringstream os;
    os << "max";
    for (std::size_t j = 0; j < lp.c.size(); ++j) os << ' ' << lp.c[j] << "*x" << (j + 1);
    os << '\n';
    for (std::size_t i = 0; i < lp.G.size(); ++i) {
        os << "row" << (i + 1) << ':';
        for (std::size_t j = 0; j < lp.G[i].size(); ++j) os << ' ' << lp.G[i][j];
        os << " <= " << lp.h[i] << '\n';
    }
    for (std::size_t j = 0; j < lp.c.size(); ++j)
        os << "box x" << (j + 1) << ": [" << lp.lower[j] << ", " << lp.upper[j] << "]\n";
    return os.str();
}

LinearProgram build_dlp(const Instance& inst, const Vec& remaining_capacity,
                        int remaining_rounds) {
    if (remaining_rounds < 1)
        throw std::invalid_argument("build_dlp: remaining_rounds must be >= 1");
    if (static_cast<int>(remaining_capacity.size()) != inst.L)
        throw std::invalid_argument("build_dlp: capacity size mismatch");
    for (double cap : remaining_capacity)
        if (cap < 0.0) throw std::invalid_argument("build_dlp: negative capacity");

    LinearProgram lp;
    const std::size_t n = static_cast<std::size_t>(inst.n);
    lp.c.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        lp.c[i] = static_cast<double>(remaining_rounds) * inst.r[i];
    lp.G.assign(static_cast<std::size_t>(inst.L), Vec(n, 0.0));
    lp.h.resize(static_cast<std::size_t>(inst.L));
    for (int j = 0; j < inst.L; ++j) {
        for (std::size_t i = 0; i < n; ++i) lp.G[static_cast<std::size_t>(j)][i] = inst.A[i][static_cast<std::size_t>(j)];
        lp.h[static_cast<std::size_t>(j)] =
            remaining_capacity[static_cast<std::size_t>(j)] / static_cast<double>(remaining_rounds);
    }
    lp.lower.assign(n, 0.0);
    lp.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) lp.upper[i] = inst.lambda[i + 1];
    return lp;
}

LinearProgram build_hindsight(const Instance& inst, const std::vector<int>& counts) {
    if (static_cast<int>(counts.size()) != inst.n)
        throw std::invalid_argument("build_hindsight: counts size mismatch");
    for (int c : counts)
        if (c < 0) throw std::invalid_argument("build_hindsight: negative count");

    LinearProgram lp;
    const std::size_t n = static_cast<std::size_t>(inst.n);
    lp.c = inst.r;
    lp.G.assign(static_cast<std::size_t>(inst.L), Vec(n, 0.0));
    lp.h = inst.m;
    for (int j = 0; j < inst.L; ++j)
        for (std::size_t i = 0; i < n; ++i) lp.G[static_cast<std::size_t>(j)][i] = inst.A[i][static_cast<std::size_t>(j)];
    lp.lower.assign(n, 0.0);
    lp.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) lp.upper[i] = static_cast<double>(counts[i]);
    return lp;
}

DlpSolution solve_dlp(const Instance& inst, const Vec& remaining_capacity,
                      int remaining_rounds) {
    DlpSolution out;
    const LPSolution sol = solve_lp(build_dlp(inst, remaining_capacity, remaining_rounds));
    out.status = sol.status;
    if (sol.status != LPStatus::Optimal) return out;
    out.x_star = sol.x_star;
    out.objective_value = sol.objective_value;
    out.theta_star.resize(sol.theta_star.size());
    for (std::size_t j = 0; j < sol.theta_star.size(); ++j)
        out.theta_star[j] = sol.theta_star[j] / static_cast<double>(remaining_rounds);
    return out;
}

}  // namespace fairrm
