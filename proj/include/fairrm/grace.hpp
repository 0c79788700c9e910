#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "fairrm/linprog.hpp"
#include "fairrm/policy.hpp"
#include "fairrm/random.hpp"

namespace fairrm {

// gamma = log_{1-alpha} delta = ln(delta) / ln(1-alpha).
// Throws std::invalid_argument unless alpha, delta lie strictly in (0,1).
double gamma_of(double alpha, double delta);

struct GraceConfig {
    double alpha = 0.0;
    double delta = 0.0;
    double gamma = 0.0;

    static GraceConfig make(double alpha, double delta);
};

enum class GraceMode { Normal, Decreasing, Increasing };
enum class LastDecision { None, Accept, Reject };

const char* to_string(GraceMode m);

// Per-type decision chain. In a decreasing period an accept repeats with
// probability 1-alpha and a reject is absorbing; the increasing period is
// the mirror image. LastDecision::None behaves like Accept: a type with no
// history has no transition to smooth.
struct GraceChain {
    GraceMode mode = GraceMode::Normal;
    LastDecision last = LastDecision::None;
};

// Both step functions throw std::logic_error when the chain is not in the
// matching mode; calling them outside a period is a contract violation.
Decision decreasing_step(GraceChain& chain, double alpha, RandomSource& rng);
Decision increasing_step(GraceChain& chain, double alpha, RandomSource& rng);

// Per-segment sampler for the acceptance target y_i. Used by tests that run
// the coupled construction where y_i is pinned to the base policy's realized
// per-segment accepts. Default: deficit + Binomial(trials, p).
using TargetSampler =
    std::function<int(int type, int segment, int deficit, int trials, double p, RandomSource& rng)>;

struct SegmentRecord {
    int k = 0;
    int t_begin = 0;
    int t_end = 0;
    std::vector<int> y;         // sampled acceptance targets
    std::vector<int> handover;  // within-segment arrival index starting the decreasing period
    std::vector<int> w;         // rejections charged to the grace periods
};

// FCFS with a decreasing grace period for every type once
// min_j m_j(t) <= abar * n * gamma.
class GpFcfsPolicy : public Policy {
public:
    GpFcfsPolicy(const Instance& inst, GraceConfig cfg, RandomSource rng);

    std::string name() const override { return "gp_fcfs"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }
    const std::vector<GraceEvent>& grace_events() const override { return log_; }

    bool triggered() const { return triggered_; }

private:
    const Instance* inst_;
    GraceConfig cfg_;
    CapacityBook book_;
    RandomSource rng_;
    double threshold_;
    bool triggered_ = false;
    int t_ = 0;
    std::vector<GraceChain> chains_;
    std::vector<LastDecision> last_;
    std::vector<GraceEvent> log_;
};

// S-BPC with a decreasing grace period for the bid-price-eligible types once
// min_j m_j(t) <= abar * n * gamma. Priced-out types stay uniformly rejected.
class GpSbpcPolicy : public Policy {
public:
    GpSbpcPolicy(const Instance& inst, GraceConfig cfg, const Vec& theta_star, RandomSource rng);

    std::string name() const override { return "gp_sbpc"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }
    const std::vector<GraceEvent>& grace_events() const override { return log_; }

private:
    const Instance* inst_;
    GraceConfig cfg_;
    CapacityBook book_;
    RandomSource rng_;
    double threshold_;
    bool triggered_ = false;
    std::vector<bool> eligible_;
    std::vector<GraceChain> chains_;
    std::vector<LastDecision> last_;
    std::vector<GraceEvent> log_;
};

// Segment engine shared by the GP-enhanced (R)DLP policy and phase 2 of the
// GP-enhanced OGD policy. Partitions [first_round, T] into segments of
// segment_len rounds; per segment and type samples a target y_i, runs an
// increasing period until the (y_i - abar n gamma)-th arrival of the type,
// then a decreasing period, and carries the rejected deficit into the next
// segment's target. A global decreasing period starts for every type once
// min_j m_j(t) <= abar n gamma and is never exited.
class GraceSegmentEngine {
public:
    // plain_first_segment: the very first segment accepts plainly up to the
    // handover (the horizon start has no history to smooth). Callers whose
    // first segment follows earlier decisions pass false and seed the
    // per-type history instead.
    GraceSegmentEngine(const Instance& inst, GraceConfig cfg, Vec accept_prob, Vec rate,
                       int first_round, int segment_len, RandomSource rng,
                       TargetSampler sampler = {}, bool plain_first_segment = true);

    StepResult step(int t, int type, CapacityBook& book);
    // Takes effect from the next segment start.
    void update_prob(Vec accept_prob);
    // Pre-run history; only meaningful before the first step.
    void seed_last(const std::vector<LastDecision>& last);

    const std::vector<SegmentRecord>& segment_log() const { return segments_; }
    const std::vector<int>& deficit() const { return z_; }
    std::vector<GraceEvent>& events() { return log_; }
    const std::vector<GraceEvent>& events() const { return log_; }
    bool global_triggered() const { return global_; }

private:
    void begin_segment(int t);
    void maybe_trigger_global(int t, const CapacityBook& book);
    StepResult decide(int t, int type, CapacityBook& book);
    StepResult apply_chain(int t, int type, CapacityBook& book, bool increasing);

    const Instance* inst_;
    GraceConfig cfg_;
    Vec prob_;
    Vec rate_;
    int first_round_;
    int seg_len_;
    RandomSource rng_;
    TargetSampler sampler_;
    bool plain_first_;
    double threshold_;

    int current_seg_ = 0;     // 1-based, 0 = not started
    int seg_end_ = 0;
    bool global_ = false;
    std::vector<int> z_;          // carried deficit
    std::vector<int> y_;          // current segment targets
    std::vector<int> handover_;   // within-segment arrival index entering Decreasing
    std::vector<int> seg_count_;  // within-segment arrivals per type
    std::vector<int> w_;          // current segment grace rejections
    std::vector<GraceChain> chains_;
    std::vector<LastDecision> last_;
    std::vector<SegmentRecord> segments_;
    std::vector<GraceEvent> log_;
};

// GP-Enhanced-(R)DLP. beta = 1/2 with no resolve reproduces the DLP case;
// beta = 1/3 with t_star set resolves the DLP once at t_star (which must be
// a segment boundary).
class GpRdlpPolicy : public Policy {
public:
    GpRdlpPolicy(const Instance& inst, GraceConfig cfg, double beta,
                 std::optional<int> t_star, RandomSource rng, TargetSampler sampler = {});

    std::string name() const override { return "gp_rdlp"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }
    const std::vector<GraceEvent>& grace_events() const override { return engine_->events(); }

    int segment_len() const { return seg_len_; }
    const std::vector<SegmentRecord>& segment_log() const { return engine_->segment_log(); }
    const Vec& initial_x_star() const { return x_star0_; }

private:
    const Instance* inst_;
    GraceConfig cfg_;
    CapacityBook book_;
    std::optional<int> t_star_;
    int seg_len_;
    int t_ = 0;
    Vec x_star0_;
    RandomSource resolve_rng_;
    std::unique_ptr<GraceSegmentEngine> engine_;
};

// GP-Enhanced-BPC-OGD. Rejects everything during the first T^(2/3) rounds
// while a shadow OGD policy records its would-be accepts u_i; phase 2 runs
// the segment engine with x_i = u_i / T^(2/3), lambda_i = Lambda_i / T^(2/3)
// and segment length T^(2/3).
class GpBpcOgdPolicy : public Policy {
public:
    GpBpcOgdPolicy(const Instance& inst, GraceConfig cfg, const struct OgdParams& params,
                   RandomSource rng);

    std::string name() const override { return "gp_bpc_ogd"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }
    const std::vector<GraceEvent>& grace_events() const override;

    int phase1_len() const { return s2_; }
    // Shadow statistics, valid once phase 1 has ended.
    const std::vector<int>& shadow_accepts() const { return u_; }
    const std::vector<int>& phase1_arrivals() const { return arrivals_; }

private:
    const Instance* inst_;
    GraceConfig cfg_;
    CapacityBook book_;
    int s2_;
    int t_ = 0;
    std::unique_ptr<Policy> shadow_;
    std::vector<int> u_;
    std::vector<int> arrivals_;
    RandomSource rng_;
    std::unique_ptr<GraceSegmentEngine> engine_;
    std::vector<GraceEvent> phase1_log_;
};

std::unique_ptr<Policy> make_gp_fcfs(const Instance& inst, GraceConfig cfg, RandomSource rng);
std::unique_ptr<Policy> make_gp_rdlp(const Instance& inst, GraceConfig cfg, double beta,
                                     std::optional<int> t_star, RandomSource rng);
std::unique_ptr<Policy> make_gp_sbpc(const Instance& inst, GraceConfig cfg, const Vec& theta_star,
                                     RandomSource rng);
std::unique_ptr<Policy> make_gp_sbpc(const Instance& inst, GraceConfig cfg, RandomSource rng);
std::unique_ptr<Policy> make_gp_bpc_ogd(const Instance& inst, GraceConfig cfg,
                                        const OgdParams& params, RandomSource rng);

// Segment boundary helpers shared with the CLI and tests.
int grace_segment_length(int T, double beta);
int aligned_resolve_point(int T, int segment_len);

}  // namespace fairrm
