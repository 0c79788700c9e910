#pragma once

#include "fairrm/instance.hpp"
#include "fairrm/pricing.hpp"

namespace testsupport {

// Single type, single resource, unit demand: lambda1 arrivals per round,
// capacity a fraction of the horizon.
inline fairrm::Instance single_type(int T, double lambda1, double m_over_T,
                                    double demand = 1.0, double reward = 1.0) {
    fairrm::Instance inst;
    inst.n = 1;
    inst.L = 1;
    inst.A = {{demand}};
    inst.r = {reward};
    inst.m = {m_over_T * T};
    inst.T = T;
    inst.lambda = {1.0 - lambda1, lambda1};
    return inst;
}

// Two revenue-ranked types sharing one unit-demand resource.
inline fairrm::Instance two_type(int T, double lam1, double lam2, double m_over_T,
                                 double r1 = 2.0, double r2 = 1.0) {
    fairrm::Instance inst;
    inst.n = 2;
    inst.L = 1;
    inst.A = {{1.0}, {1.0}};
    inst.r = {r1, r2};
    inst.m = {m_over_T * T};
    inst.T = T;
    inst.lambda = {1.0 - lam1 - lam2, lam1, lam2};
    return inst;
}

// The n=3, L=2 scarcity instance used by the audit separation checks:
// demand exceeds capacity, every entry of A positive.
inline fairrm::Instance scarcity_3x2(double m_scale = 100.0, double horizon_ratio = 4.0) {
    fairrm::Instance inst;
    inst.n = 3;
    inst.L = 2;
    inst.A = {{0.5, 0.25}, {0.25, 0.5}, {0.5, 0.5}};
    inst.r = {3.0, 2.0, 1.0};
    inst.q = {1.0, 1.0};
    inst.m_scale = m_scale;
    inst.m = {m_scale, m_scale};
    inst.T = static_cast<int>(horizon_ratio * m_scale);
    inst.lambda = {0.1, 0.3, 0.3, 0.3};
    return inst;
}

// Pricing instance over a quantity base: one posted price per type with a
// two-point purchase table.
inline fairrm::PricingInstance pricing_fixture(int T, double m_over_T) {
    fairrm::PricingInstance pinst;
    pinst.base = two_type(T, 0.4, 0.4, m_over_T);
    pinst.posted = {10.0, 6.0};
    pinst.purchase_table = {
        {{8.0, 0.9}, {10.0, 0.6}},
        {{6.0, 0.5}, {9.0, 0.2}},
    };
    return pinst;
}

}  // namespace testsupport
