#pragma once

#include <map>
#include <memory>
#include <string>

#include "fairrm/grace.hpp"
#include "fairrm/instance.hpp"
#include "fairrm/policy.hpp"
#include "fairrm/random.hpp"

namespace fairrm {

// Price-based instance: a posted price per type plus a per-type table
// mapping offered price to purchase probability (strictly decreasing;
// infinity buys with probability zero).
struct PricingInstance {
    Instance base;
    Vec posted;                                  // p^(i), length n
    std::vector<std::map<double, double>> purchase_table;  // per type

    double pbar() const;  // max posted price
    double purchase_prob(int type, double price) const;
};

ValidationReport validate_pricing_instance(const PricingInstance& pinst);

struct PriceEvent {
    int t = 0;
    int type = 0;
    int u = 0;
    double offered = 0.0;  // kInf = no sale offer
    bool purchased = false;
    bool forced = false;   // infinite offer caused by capacity, not by the rule
    double revenue = 0.0;
};

struct PriceTrace {
    std::vector<PriceEvent> events;
    Vec final_capacity;
    double total_revenue = 0.0;
    bool depleted = false;
    std::vector<int> arrivals_per_type;
    std::vector<int> purchases_per_type;
};

struct PriceStep {
    double offered = 0.0;
    bool purchased = false;
    bool forced = false;
};

class PricingPolicy {
public:
    virtual ~PricingPolicy() = default;
    virtual std::string name() const = 0;
    virtual PriceStep step(int type) = 0;
    virtual const Vec& remaining_capacity() const = 0;
};

// Offers p^(i) while the type's demand fits, infinity afterwards. Purchase
// randomness is indexed per (type, u) so coupled policies that offer the
// same price to the same customer see the same outcome.
class StaticPricingPolicy : public PricingPolicy {
public:
    StaticPricingPolicy(const PricingInstance& pinst, RandomSource rng);

    std::string name() const override { return "static_pricing"; }
    PriceStep step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

private:
    const PricingInstance* pinst_;
    CapacityBook book_;
    RandomSource rng_;
    std::vector<int> u_;
};

// Static pricing with a price-space decreasing grace period: once
// min_j m_j(t) <= abar n gamma, each type repeats its previous price with
// probability 1-alpha and otherwise switches to infinity forever.
class GpPricingPolicy : public PricingPolicy {
public:
    GpPricingPolicy(const PricingInstance& pinst, GraceConfig cfg, RandomSource rng);

    std::string name() const override { return "gp_pricing"; }
    PriceStep step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

    bool triggered() const { return triggered_; }
    // First round of the grace period, 0 while it has not started.
    int trigger_round() const { return trigger_round_; }

private:
    const PricingInstance* pinst_;
    GraceConfig cfg_;
    CapacityBook book_;
    RandomSource rng_;
    double threshold_;
    bool triggered_ = false;
    int t_ = 0;
    int trigger_round_ = 0;
    std::vector<int> u_;
    std::vector<bool> absorbed_;   // type already pushed to infinity
    std::vector<double> last_price_;
};

PriceTrace run_pricing_policy(PricingPolicy& policy, const PricingInstance& pinst,
                              const ArrivalSequence& arrivals);

std::string price_trace_to_csv(const PriceTrace& trace);

struct PriceFairnessCell {
    int offset = 0;
    double max_freq = 0.0;
    double mean_freq = 0.0;
    int worst_u = 0;
};

struct PriceFairnessReport {
    bool pass = false;
    bool low_power = false;
    int replications = 0;
    double depletion_freq = 0.0;
    // Conditional on no depletion, per type then per offset.
    std::vector<std::vector<PriceFairnessCell>> types;
    double max_adjacent = 0.0;
};

// Streaming price audit: frequencies of {p_u != p_v} for |u-v| in offsets.
// PASS iff each conditional frequency is <= alpha |u-v| + 3 sigma and the
// depletion frequency is <= delta + 3 sigma.
class PriceFairnessAuditor {
public:
    PriceFairnessAuditor(int n, double alpha, double delta,
                         std::vector<int> offsets = {1, 2, 3});

    void add(const PriceTrace& trace);
    void merge(const PriceFairnessAuditor& other);
    PriceFairnessReport finalize() const;

private:
    struct Counts {
        std::vector<int> total, differ;
    };

    int n_;
    double alpha_;
    double delta_;
    std::vector<int> offsets_;
    int reps_ = 0;
    int depleted_ = 0;
    std::vector<std::vector<Counts>> counts_;  // [type][offset]
};

PriceFairnessReport price_fairness_audit(const std::vector<PriceTrace>& traces, int n,
                                         double alpha, double delta,
                                         const std::vector<int>& offsets = {1, 2, 3});

std::unique_ptr<PricingPolicy> make_static_pricing(const PricingInstance& pinst, RandomSource rng);
std::unique_ptr<PricingPolicy> make_gp_pricing(const PricingInstance& pinst, GraceConfig cfg,
                                               RandomSource rng);

}  // namespace fairrm
