#pragma once

#include <functional>
#include <memory>
#include <string>

#include "fairrm/grace.hpp"
#include "fairrm/policy.hpp"

namespace fairrm {

// Fixed per-type quotas, FCFS within each quota.
class BlPolicy : public Policy {
public:
    BlPolicy(const Instance& inst, std::vector<int> b);

    std::string name() const override { return "bl"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

    int accepted_of(int type) const { return s_[static_cast<std::size_t>(type - 1)]; }

private:
    const Instance* inst_;
    CapacityBook book_;
    std::vector<int> b_;
    std::vector<int> s_;
};

// Nested quotas for a single resource with unit demand and revenue-ranked
// types: b_i caps the combined accepts of types i..n. Throws for L > 1.
class NestingPolicy : public Policy {
public:
    NestingPolicy(const Instance& inst, std::vector<int> b);

    std::string name() const override { return "nesting"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

    int accepted_of(int type) const { return s_[static_cast<std::size_t>(type - 1)]; }

private:
    const Instance* inst_;
    CapacityBook book_;
    std::vector<int> b_;
    std::vector<int> s_;
};

// BL with decreasing grace periods at the quota edge (s_i >= b_i - gamma)
// and at the capacity edge (min_j m_j(t) <= abar n gamma).
class GpBlPolicy : public Policy {
public:
    GpBlPolicy(const Instance& inst, std::vector<int> b, GraceConfig cfg, RandomSource rng);

    std::string name() const override { return "gp_bl"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }
    const std::vector<GraceEvent>& grace_events() const override { return log_; }

private:
    const Instance* inst_;
    CapacityBook book_;
    std::vector<int> b_;
    std::vector<int> s_;
    GraceConfig cfg_;
    RandomSource rng_;
    double cap_threshold_;
    int gamma_int_;
    bool global_ = false;
    int t_ = 0;
    std::vector<bool> in_gp_;
    std::vector<GraceChain> chains_;
    std::vector<LastDecision> last_;
    std::vector<GraceEvent> log_;
};

// NESTING with decreasing grace periods at the nested quota edge
// (sum_{j>=i} s_j >= b_i - n gamma) and at the capacity edge
// (m(t) <= n gamma).
class GpNestingPolicy : public Policy {
public:
    GpNestingPolicy(const Instance& inst, std::vector<int> b, GraceConfig cfg, RandomSource rng);

    std::string name() const override { return "gp_nesting"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }
    const std::vector<GraceEvent>& grace_events() const override { return log_; }

private:
    const Instance* inst_;
    CapacityBook book_;
    std::vector<int> b_;
    std::vector<int> s_;
    GraceConfig cfg_;
    RandomSource rng_;
    double cap_threshold_;
    int quota_margin_;
    bool global_ = false;
    int t_ = 0;
    std::vector<bool> in_gp_;
    std::vector<GraceChain> chains_;
    std::vector<LastDecision> last_;
    std::vector<GraceEvent> log_;
};

// Booking limits defaulted from the DLP allocation: b_i = floor(x*_i T).
std::vector<int> default_booking_limits(const Instance& inst);

// Deterministic arrival families used to probe the competitive ratio.
// Known ids: low_first, high_first, single_type_flood, alternating,
// block_permutations (which enumerates all n^k type assignments over k
// homogeneous blocks). Sequences have length round(4 * m_scale).
struct FamilySpec {
    std::string id;
    int k = 3;  // block count for block_permutations
};

std::vector<ArrivalSequence> generate_adversarial(const FamilySpec& family, int n,
                                                  double m_scale);

using InstancePolicyFactory =
    std::function<std::unique_ptr<Policy>(const Instance&, RandomSource)>;

struct CrRow {
    double m_scale = 0.0;
    std::string family;
    int instance_id = 0;
    std::string policy;
    double revenue = 0.0;
    double opt = 0.0;
    double ratio = 0.0;
};

struct CrReport {
    std::vector<CrRow> rows;
    double cr = 0.0;          // min ratio over generated instances
    int skipped_zero_opt = 0;
};

// Minimum revenue/OPT ratio over every sequence generated by the families on
// the instance scaled to m_scale. Randomized policies are averaged over
// `replications` runs; deterministic ones should pass replications = 1.
CrReport empirical_cr(const InstancePolicyFactory& factory, const std::string& policy_name,
                      const Instance& templ, const std::vector<FamilySpec>& families,
                      double m_scale, int replications, std::uint64_t seed,
                      double horizon_ratio = 4.0, int threads = 1);

std::string cr_report_to_csv(const CrReport& report);

std::unique_ptr<Policy> make_bl(const Instance& inst, std::vector<int> b);
std::unique_ptr<Policy> make_nesting(const Instance& inst, std::vector<int> b);
std::unique_ptr<Policy> make_gp_bl(const Instance& inst, std::vector<int> b, GraceConfig cfg,
                                   RandomSource rng);
std::unique_ptr<Policy> make_gp_nesting(const Instance& inst, std::vector<int> b, GraceConfig cfg,
                                        RandomSource rng);

}  // namespace fairrm
