#include "fairrm/grace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairrm/policies_stochastic.hpp"

namespace fairrm {

double gamma_of(double alpha, double delta) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("gamma_of: alpha must be in (0,1)");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("gamma_of: delta must be in (0,1)");
    return std::log(delta) / std::log(1.0 - alpha);
}

GraceConfig GraceConfig::make(double alpha, double delta) {
    GraceConfig cfg;
    cfg.alpha = alpha;
    cfg.delta = delta;
    cfg.gamma = gamma_of(alpha, delta);
    return cfg;
}

const char* to_string(GraceMode m) {
    switch (m) {
        case GraceMode::Normal: return "normal";
        case GraceMode::Decreasing: return "decreasing";
        case GraceMode::Increasing: return "increasing";
    }
    return "?";
}

Decision decreasing_step(GraceChain& chain, double alpha, RandomSource& rng) {
    if (chain.mode != GraceMode::Decreasing)
        throw std::logic_error("decreasing_step called outside a decreasing period");
    if (chain.last == LastDecision::Reject) return Decision::Reject;
    if (rng.bernoulli(1.0 - alpha)) {
        chain.last = LastDecision::Accept;
        return Decision::Accept;
    }
    chain.last = LastDecision::Reject;
    return Decision::Reject;
}

Decision increasing_step(GraceChain& chain, double alpha, RandomSource& rng) {
    if (chain.mode != GraceMode::Increasing)
        throw std::logic_error("increasing_step called outside an increasing period");
    if (chain.last != LastDecision::Reject) {
        chain.last = LastDecision::Accept;
        return Decision::Accept;
    }
    if (rng.bernoulli(alpha)) {
        chain.last = LastDecision::Accept;
        return Decision::Accept;
    }
    return Decision::Reject;
}

namespace {

LastDecision seed_from(LastDecision observed) {
    // A fresh type has no accept-to-reject transition to smooth; only a type
    // whose latest decision was an actual reject degenerates to all-reject.
    return observed == LastDecision::Reject ? LastDecision::Reject : LastDecision::Accept;
}

}  // namespace

// ---------------------------------------------------------------------------
// GP-FCFS

GpFcfsPolicy::GpFcfsPolicy(const Instance& inst, GraceConfig cfg, RandomSource rng)
    : inst_(&inst), cfg_(cfg), book_(inst), rng_(rng) {
    threshold_ = inst.abar() * inst.n * cfg.gamma;
    chains_.resize(static_cast<std::size_t>(inst.n));
    last_.assign(static_cast<std::size_t>(inst.n), LastDecision::None);
}

StepResult GpFcfsPolicy::step(int type) {
    ++t_;
    if (!triggered_ && book_.min_remaining() <= threshold_) {
        triggered_ = true;
        for (int i = 0; i < inst_->n; ++i) {
            auto& ch = chains_[static_cast<std::size_t>(i)];
            ch.mode = GraceMode::Decreasing;
            ch.last = seed_from(last_[static_cast<std::size_t>(i)]);
        }
        log_.push_back({t_, 0, "normal", "decreasing", "capacity_trigger"});
    }
    if (type == 0) return {Decision::NoOp, false};

    const std::size_t i = static_cast<std::size_t>(type - 1);
    if (!triggered_) {
        if (!book_.fits(type)) {
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book_.consume(type);
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }

    const Decision want = decreasing_step(chains_[i], cfg_.alpha, rng_);
    if (want == Decision::Accept) {
        if (!book_.fits(type)) {
            chains_[i].last = LastDecision::Reject;
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book_.consume(type);
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }
    last_[i] = LastDecision::Reject;
    return {Decision::Reject, false};
}

// ---------------------------------------------------------------------------
// GP-S-BPC

GpSbpcPolicy::GpSbpcPolicy(const Instance& inst, GraceConfig cfg, const Vec& theta_star,
                           RandomSource rng)
    : inst_(&inst), cfg_(cfg), book_(inst), rng_(rng) {
    if (static_cast<int>(theta_star.size()) != inst.L)
        throw std::invalid_argument("gp_sbpc: theta size mismatch");
    threshold_ = inst.abar() * inst.n * cfg.gamma;
    chains_.resize(static_cast<std::size_t>(inst.n));
    last_.assign(static_cast<std::size_t>(inst.n), LastDecision::None);
    eligible_.resize(static_cast<std::size_t>(inst.n));
    for (int i = 0; i < inst.n; ++i) {
        double bid = 0.0;
        for (int j = 0; j < inst.L; ++j)
            bid += theta_star[static_cast<std::size_t>(j)] *
                   inst.A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        eligible_[static_cast<std::size_t>(i)] = inst.r[static_cast<std::size_t>(i)] > bid;
    }
}

StepResult GpSbpcPolicy::step(int type) {
    if (!triggered_ && book_.min_remaining() <= threshold_) {
        triggered_ = true;
        for (int i = 0; i < inst_->n; ++i) {
            if (!eligible_[static_cast<std::size_t>(i)]) continue;
            auto& ch = chains_[static_cast<std::size_t>(i)];
            ch.mode = GraceMode::Decreasing;
            ch.last = seed_from(last_[static_cast<std::size_t>(i)]);
        }
        log_.push_back({0, 0, "normal", "decreasing", "capacity_trigger"});
    }
    if (type == 0) return {Decision::NoOp, false};

    const std::size_t i = static_cast<std::size_t>(type - 1);
    if (!eligible_[i]) {
        last_[i] = LastDecision::Reject;
        return {Decision::Reject, false};
    }
    if (!triggered_) {
        if (!book_.fits(type)) {
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book_.consume(type);
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }
    const Decision want = decreasing_step(chains_[i], cfg_.alpha, rng_);
    if (want == Decision::Accept) {
        if (!book_.fits(type)) {
            chains_[i].last = LastDecision::Reject;
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book_.consume(type);
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }
    last_[i] = LastDecision::Reject;
    return {Decision::Reject, false};
}

// ---------------------------------------------------------------------------
// Segment engine

GraceSegmentEngine::GraceSegmentEngine(const Instance& inst, GraceConfig cfg, Vec accept_prob,
                                       Vec rate, int first_round, int segment_len,
                                       RandomSource rng, TargetSampler sampler,
                                       bool plain_first_segment)
    : inst_(&inst), cfg_(cfg), prob_(std::move(accept_prob)), rate_(std::move(rate)),
      first_round_(first_round), seg_len_(segment_len), rng_(rng), sampler_(std::move(sampler)),
      plain_first_(plain_first_segment) {
    if (seg_len_ < 1) throw std::invalid_argument("segment engine: segment_len must be >= 1");
    if (static_cast<int>(prob_.size()) != inst.n || static_cast<int>(rate_.size()) != inst.n)
        throw std::invalid_argument("segment engine: prob/rate size mismatch");
    threshold_ = inst.abar() * inst.n * cfg.gamma;
    const std::size_t n = static_cast<std::size_t>(inst.n);
    z_.assign(n, 0);
    y_.assign(n, 0);
    handover_.assign(n, 0);
    seg_count_.assign(n, 0);
    w_.assign(n, 0);
    chains_.resize(n);
    last_.assign(n, LastDecision::None);
}

void GraceSegmentEngine::update_prob(Vec accept_prob) {
    if (accept_prob.size() != prob_.size())
        throw std::invalid_argument("segment engine: prob size mismatch");
    prob_ = std::move(accept_prob);
}

void GraceSegmentEngine::seed_last(const std::vector<LastDecision>& last) {
    if (last.size() != last_.size())
        throw std::invalid_argument("segment engine: seed size mismatch");
    last_ = last;
}

void GraceSegmentEngine::begin_segment(int t) {
    // Close out the previous segment.
    if (current_seg_ > 0) {
        segments_.back().w.assign(w_.begin(), w_.end());
        z_ = w_;
    }
    ++current_seg_;
    seg_end_ = std::min(first_round_ + current_seg_ * seg_len_ - 1, inst_->T);
    const int len = seg_end_ - t + 1;

    SegmentRecord rec;
    rec.k = current_seg_;
    rec.t_begin = t;
    rec.t_end = seg_end_;
    for (int i = 0; i < inst_->n; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        seg_count_[ii] = 0;
        w_[ii] = 0;
        const double p = prob_[ii];
        if (p <= 0.0 || p >= 1.0) {
            // Deterministic types bypass the target machinery.
            y_[ii] = 0;
            handover_[ii] = 0;
        } else {
            // The expected trial count rate*len is rarely integral; rounding
            // it would bias every segment's target by up to p/2 and the bias
            // compounds over T^(1-beta) segments. Sampling the fractional
            // trial keeps the target mean exact.
            const double raw = rate_[ii] * len;
            int trials = static_cast<int>(std::floor(raw));
            const double frac = raw - trials;
            if (frac > 0.0 && rng_.bernoulli(frac)) ++trials;
            const int y = sampler_ ? sampler_(i + 1, current_seg_, z_[ii], trials, p, rng_)
                                   : z_[ii] + rng_.binomial(trials, p);
            y_[ii] = std::max(0, y);
            const double cut = static_cast<double>(y_[ii]) - inst_->abar() * inst_->n * cfg_.gamma;
            handover_[ii] = std::max(0, static_cast<int>(std::llround(cut)));
            if (!global_ && (current_seg_ > 1 || !plain_first_)) {
                auto& ch = chains_[ii];
                if (ch.mode != GraceMode::Increasing) {
                    log_.push_back({t, i + 1, to_string(ch.mode), "increasing", "segment_start"});
                    ch.mode = GraceMode::Increasing;
                }
                ch.last = last_[ii];
            }
        }
    }
    rec.y.assign(y_.begin(), y_.end());
    rec.handover.assign(handover_.begin(), handover_.end());
    rec.w.assign(w_.begin(), w_.end());
    segments_.push_back(std::move(rec));
}

void GraceSegmentEngine::maybe_trigger_global(int t, const CapacityBook& book) {
    if (global_) return;
    if (book.min_remaining() <= threshold_) {
        global_ = true;
        for (int i = 0; i < inst_->n; ++i) {
            auto& ch = chains_[static_cast<std::size_t>(i)];
            ch.mode = GraceMode::Decreasing;
            ch.last = seed_from(last_[static_cast<std::size_t>(i)]);
        }
        log_.push_back({t, 0, "normal", "decreasing", "capacity_trigger"});
    }
}

StepResult GraceSegmentEngine::apply_chain(int t, int type, CapacityBook& book, bool increasing) {
    const std::size_t i = static_cast<std::size_t>(type - 1);
    auto& ch = chains_[i];
    const Decision want = increasing ? increasing_step(ch, cfg_.alpha, rng_)
                                     : decreasing_step(ch, cfg_.alpha, rng_);
    if (want == Decision::Accept) {
        if (!book.fits(type)) {
            ch.last = LastDecision::Reject;
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book.consume(type);
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }
    last_[i] = LastDecision::Reject;
    (void)t;
    return {Decision::Reject, false};
}

StepResult GraceSegmentEngine::decide(int t, int type, CapacityBook& book) {
    const std::size_t i = static_cast<std::size_t>(type - 1);

    if (global_) return apply_chain(t, type, book, /*increasing=*/false);

    const double p = prob_[i];
    if (p <= 0.0) {
        last_[i] = LastDecision::Reject;
        return {Decision::Reject, false};
    }
    if (p >= 1.0) {
        if (!book.fits(type)) {
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book.consume(type);
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }

    seg_count_[i]++;
    const bool in_window = seg_count_[i] <= y_[i];
    auto& ch = chains_[i];

    if (seg_count_[i] < handover_[i]) {
        // Before the handover arrival: plain accept in the horizon-opening
        // segment, increasing period otherwise.
        if (current_seg_ == 1 && plain_first_) {
            if (!book.fits(type)) {
                last_[i] = LastDecision::Reject;
                return {Decision::Reject, true};
            }
            book.consume(type);
            last_[i] = LastDecision::Accept;
            return {Decision::Accept, false};
        }
        const StepResult res = apply_chain(t, type, book, /*increasing=*/true);
        if (res.decision == Decision::Reject) w_[i]++;
        return res;
    }

    // Handover arrival and beyond: decreasing period.
    if (ch.mode != GraceMode::Decreasing) {
        log_.push_back({t, type, to_string(ch.mode), "decreasing", "segment_handover"});
        ch.mode = GraceMode::Decreasing;
        ch.last = seed_from(last_[i]);
    }
    const StepResult res = apply_chain(t, type, book, /*increasing=*/false);
    if (res.decision == Decision::Reject && in_window) w_[i]++;
    return res;
}

StepResult GraceSegmentEngine::step(int t, int type, CapacityBook& book) {
    if (t < first_round_) throw std::logic_error("segment engine stepped before first_round");
    if (current_seg_ == 0 || t > seg_end_) begin_segment(t);
    maybe_trigger_global(t, book);
    if (type == 0) return {Decision::NoOp, false};
    return decide(t, type, book);
}

// ---------------------------------------------------------------------------
// GP-Enhanced-(R)DLP

int grace_segment_length(int T, double beta) {
    const double raw = std::pow(static_cast<double>(T), beta);
    return std::max(1, static_cast<int>(std::llround(raw)));
}

int aligned_resolve_point(int T, int segment_len) {
    // One late resolve, roughly T - T^(2/3) for segment_len = T^(1/3),
    // snapped to a segment boundary.
    const int segments = (T + segment_len - 1) / segment_len;
    int k = segments - segment_len;
    if (k < 1) k = segments / 2;
    if (k < 1) k = 1;
    return k * segment_len;
}

GpRdlpPolicy::GpRdlpPolicy(const Instance& inst, GraceConfig cfg, double beta,
                           std::optional<int> t_star, RandomSource rng, TargetSampler sampler)
    : inst_(&inst), cfg_(cfg), book_(inst), t_star_(t_star) {
    seg_len_ = grace_segment_length(inst.T, beta);
    if (t_star_) {
        if (*t_star_ <= 0 || *t_star_ >= inst.T)
            throw std::invalid_argument("gp_rdlp: t_star must lie strictly inside the horizon");
        if (*t_star_ % seg_len_ != 0)
            throw std::invalid_argument("gp_rdlp: t_star must be a segment boundary");
    }
    const DlpSolution dlp = solve_dlp(inst, inst.m, inst.T);
    if (dlp.status != LPStatus::Optimal) throw std::runtime_error("gp_rdlp: initial DLP not optimal");
    x_star0_ = dlp.x_star;
    Vec prob(static_cast<std::size_t>(inst.n), 0.0);
    Vec rate(static_cast<std::size_t>(inst.n), 0.0);
    for (int i = 0; i < inst.n; ++i) {
        const double lam = inst.lambda_of(i + 1);
        rate[static_cast<std::size_t>(i)] = lam;
        prob[static_cast<std::size_t>(i)] =
            lam > 0.0 ? std::clamp(x_star0_[static_cast<std::size_t>(i)] / lam, 0.0, 1.0) : 0.0;
    }
    resolve_rng_ = rng.fork("resolve");
    engine_ = std::make_unique<GraceSegmentEngine>(inst, cfg, std::move(prob), std::move(rate), 1,
                                                   seg_len_, rng.fork("segments"),
                                                   std::move(sampler));
}

StepResult GpRdlpPolicy::step(int type) {
    ++t_;
    if (t_star_ && t_ == *t_star_ + 1) {
        const int remaining = inst_->T - *t_star_;
        Vec prob(static_cast<std::size_t>(inst_->n), 0.0);
        bool ok = remaining >= 1;
        if (ok) {
            try {
                const DlpSolution dlp = solve_dlp(*inst_, book_.remaining(), remaining);
                ok = dlp.status == LPStatus::Optimal;
                if (ok)
                    for (int i = 0; i < inst_->n; ++i) {
                        const double lam = inst_->lambda_of(i + 1);
                        prob[static_cast<std::size_t>(i)] =
                            lam > 0.0 ? std::clamp(dlp.x_star[static_cast<std::size_t>(i)] / lam, 0.0, 1.0)
                                      : 0.0;
                    }
            } catch (const std::invalid_argument&) {
                ok = false;
            }
        }
        // Infeasible resolve falls back to rejecting everything.
        if (!ok) prob.assign(static_cast<std::size_t>(inst_->n), 0.0);
        engine_->update_prob(std::move(prob));
        engine_->events().push_back({t_, 0, "normal", "normal", "resolve"});
    }
    return engine_->step(t_, type, book_);
}

// ---------------------------------------------------------------------------
// GP-Enhanced-BPC-OGD

GpBpcOgdPolicy::GpBpcOgdPolicy(const Instance& inst, GraceConfig cfg, const OgdParams& params,
                               RandomSource rng)
    : inst_(&inst), cfg_(cfg), book_(inst), rng_(rng) {
    s2_ = std::max(1, static_cast<int>(std::llround(std::pow(static_cast<double>(inst.T), 2.0 / 3.0))));
    if (s2_ >= inst.T) throw std::invalid_argument("gp_bpc_ogd: horizon too short for phase 2");
    shadow_ = std::make_unique<BpcOgdPolicy>(inst, params);
    u_.assign(static_cast<std::size_t>(inst.n), 0);
    arrivals_.assign(static_cast<std::size_t>(inst.n), 0);
}

const std::vector<GraceEvent>& GpBpcOgdPolicy::grace_events() const {
    if (engine_) return engine_->events();
    return phase1_log_;
}

StepResult GpBpcOgdPolicy::step(int type) {
    ++t_;
    if (t_ <= s2_) {
        if (type > 0) {
            arrivals_[static_cast<std::size_t>(type - 1)]++;
            const StepResult shadow_res = shadow_->step(type);
            if (shadow_res.decision == Decision::Accept)
                u_[static_cast<std::size_t>(type - 1)]++;
            return {Decision::Reject, false};
        }
        shadow_->step(0);
        return {Decision::NoOp, false};
    }
    if (!engine_) {
        const double denom = static_cast<double>(s2_);
        Vec prob(static_cast<std::size_t>(inst_->n), 0.0);
        Vec rate(static_cast<std::size_t>(inst_->n), 0.0);
        for (int i = 0; i < inst_->n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            rate[ii] = arrivals_[ii] / denom;
            prob[ii] = arrivals_[ii] > 0
                           ? std::clamp(static_cast<double>(u_[ii]) / arrivals_[ii], 0.0, 1.0)
                           : 0.0;
        }
        engine_ = std::make_unique<GraceSegmentEngine>(*inst_, cfg_, std::move(prob),
                                                       std::move(rate), s2_ + 1, s2_,
                                                       rng_.fork("segments"), TargetSampler{},
                                                       /*plain_first_segment=*/false);
        // Types seen in phase 1 were rejected; the opening increasing
        // period must ramp up from that history.
        std::vector<LastDecision> seen(static_cast<std::size_t>(inst_->n), LastDecision::None);
        for (int i = 0; i < inst_->n; ++i)
            if (arrivals_[static_cast<std::size_t>(i)] > 0)
                seen[static_cast<std::size_t>(i)] = LastDecision::Reject;
        engine_->seed_last(seen);
        engine_->events() = std::move(phase1_log_);
    }
    return engine_->step(t_, type, book_);
}

std::unique_ptr<Policy> make_gp_fcfs(const Instance& inst, GraceConfig cfg, RandomSource rng) {
    return std::make_unique<GpFcfsPolicy>(inst, cfg, rng);
}

std::unique_ptr<Policy> make_gp_rdlp(const Instance& inst, GraceConfig cfg, double beta,
                                     std::optional<int> t_star, RandomSource rng) {
    return std::make_unique<GpRdlpPolicy>(inst, cfg, beta, t_star, rng);
}

std::unique_ptr<Policy> make_gp_sbpc(const Instance& inst, GraceConfig cfg, const Vec& theta_star,
                                     RandomSource rng) {
    return std::make_unique<GpSbpcPolicy>(inst, cfg, theta_star, rng);
}

std::unique_ptr<Policy> make_gp_sbpc(const Instance& inst, GraceConfig cfg, RandomSource rng) {
    const DlpSolution dlp = solve_dlp(inst, inst.m, inst.T);
    if (dlp.status != LPStatus::Optimal) throw std::runtime_error("gp_sbpc: DLP not optimal");
    return std::make_unique<GpSbpcPolicy>(inst, cfg, dlp.theta_star, rng);
}

std::unique_ptr<Policy> make_gp_bpc_ogd(const Instance& inst, GraceConfig cfg,
                                        const OgdParams& params, RandomSource rng) {
    return std::make_unique<GpBpcOgdPolicy>(inst, cfg, params, rng);
}

}  // namespace fairrm
