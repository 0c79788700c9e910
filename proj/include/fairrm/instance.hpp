#pragma once

#include <string>
#include <vector>

#include "fairrm/random.hpp"

namespace fairrm {

using Vec = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;  // n rows, L columns

// Static problem data for one network revenue management instance.
//
// Customer types are 1-based in traces and arrival events (0 means "no
// arrival"); containers here are 0-based, so A[i] describes type i+1.
struct Instance {
    int n = 0;        // customer types
    int L = 0;        // resource types
    Matrix A;         // A[i][j]: units of resource j consumed by a type-(i+1) customer
    Vec r;            // revenue per accepted customer, length n
    Vec m;            // initial capacity, length L
    int T = 0;        // horizon in rounds
    Vec lambda;       // length n+1, lambda[0] = probability of no arrival

    // Scaling bookkeeping: m[j] == q[j] * m_scale when q is nonempty.
    Vec q;
    double m_scale = 0.0;

    double abar() const;   // max_{ij} A_ij
    double alow() const;   // min over nonzero A_ij (0 if A is all-zero)
    double rbar() const;   // max_i r_i

    // Arrival probability of type i (1-based).
    double lambda_of(int type) const { return lambda[static_cast<std::size_t>(type)]; }
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

ValidationReport validate_instance(const Instance& inst);

// New instance with m = q * m_scale and T = round(horizon_ratio * m_scale).
// The template's q (or, failing that, its m interpreted as q) supplies the
// capacity shape. Throws std::invalid_argument for m_scale <= 0.
Instance scale_instance(const Instance& templ, double m_scale, double horizon_ratio);

// One realized arrival stream. events[t] is the type arriving in round t+1,
// 0 if none.
struct ArrivalSequence {
    std::vector<int> events;
    std::vector<int> counts;  // counts[i]: realized arrivals of type i+1

    int T() const { return static_cast<int>(events.size()); }
};

ArrivalSequence make_arrival_sequence(std::vector<int> events, int n);

// Draws a length-T sequence: round t carries type i with probability
// lambda[i], no arrival with lambda[0]. lambda must be normalized.
ArrivalSequence sample_arrivals(const Vec& lambda, int T, RandomSource& rng);

std::string arrivals_to_csv(const ArrivalSequence& arr);
ArrivalSequence arrivals_from_csv(const std::string& csv, int n);

}  // namespace fairrm
