#include "fairrm/policies_stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairrm {

StepResult FcfsPolicy::step(int type) {
    if (type == 0) return {Decision::NoOp, false};
    if (!book_.fits(type)) return {Decision::Reject, true};
    book_.consume(type);
    return {Decision::Accept, false};
}

DlpPaPolicy::DlpPaPolicy(const Instance& inst, const Vec& x_star, RandomSource rng)
    : inst_(&inst), book_(inst), rng_(rng) {
    if (static_cast<int>(x_star.size()) != inst.n)
        throw std::invalid_argument("dlp_pa: x_star size mismatch");
    prob_.resize(x_star.size());
    for (int i = 0; i < inst.n; ++i) {
        const double lam = inst.lambda_of(i + 1);
        const double x = x_star[static_cast<std::size_t>(i)];
        if (lam <= 0.0) {
            if (x > 1e-9) throw std::invalid_argument("dlp_pa: x*_i > 0 with lambda_i = 0");
            prob_[static_cast<std::size_t>(i)] = 0.0;
        } else {
            prob_[static_cast<std::size_t>(i)] = std::clamp(x / lam, 0.0, 1.0);
        }
    }
}

StepResult DlpPaPolicy::step(int type) {
    if (type == 0) return {Decision::NoOp, false};
    if (!book_.fits(type)) return {Decision::Reject, true};
    if (!rng_.bernoulli(prob_[static_cast<std::size_t>(type - 1)]))
        return {Decision::Reject, false};
    book_.consume(type);
    return {Decision::Accept, false};
}

RdlpPaPolicy::RdlpPaPolicy(const Instance& inst, int t_star, RandomSource rng)
    : inst_(&inst), book_(inst), t_star_(t_star), rng_(rng) {
    if (t_star <= 0 || t_star >= inst.T)
        throw std::invalid_argument("rdlp_pa: t_star must lie strictly inside the horizon");
    const DlpSolution dlp = solve_dlp(inst, inst.m, inst.T);
    if (dlp.status != LPStatus::Optimal) throw std::runtime_error("rdlp_pa: initial DLP not optimal");
    x_star0_ = dlp.x_star;
    prob_.resize(x_star0_.size());
    for (int i = 0; i < inst.n; ++i) {
        const double lam = inst.lambda_of(i + 1);
        prob_[static_cast<std::size_t>(i)] =
            lam > 0.0 ? std::clamp(x_star0_[static_cast<std::size_t>(i)] / lam, 0.0, 1.0) : 0.0;
    }
}

void RdlpPaPolicy::resolve() {
    resolved_ = true;
    const int remaining = inst_->T - t_star_;
    if (remaining < 1) {
        all_reject_ = true;
        return;
    }
    DlpSolution dlp;
    try {
        dlp = solve_dlp(*inst_, book_.remaining(), remaining);
    } catch (const std::invalid_argument&) {
        all_reject_ = true;
        return;
    }
    if (dlp.status != LPStatus::Optimal) {
        all_reject_ = true;
        return;
    }
    for (int i = 0; i < inst_->n; ++i) {
        const double lam = inst_->lambda_of(i + 1);
        prob_[static_cast<std::size_t>(i)] =
            lam > 0.0 ? std::clamp(dlp.x_star[static_cast<std::size_t>(i)] / lam, 0.0, 1.0) : 0.0;
    }
}

StepResult RdlpPaPolicy::step(int type) {
    ++t_;
    if (t_ == t_star_ + 1 && !resolved_) resolve();
    if (type == 0) return {Decision::NoOp, false};
    if (all_reject_) return {Decision::Reject, false};
    if (!book_.fits(type)) return {Decision::Reject, true};
    if (!rng_.bernoulli(prob_[static_cast<std::size_t>(type - 1)]))
        return {Decision::Reject, false};
    book_.consume(type);
    return {Decision::Accept, false};
}

SbpcPolicy::SbpcPolicy(const Instance& inst, const Vec& theta_star)
    : inst_(&inst), book_(inst) {
    if (static_cast<int>(theta_star.size()) != inst.L)
        throw std::invalid_argument("sbpc: theta size mismatch");
    eligible_.resize(static_cast<std::size_t>(inst.n));
    for (int i = 0; i < inst.n; ++i) {
        double bid = 0.0;
        for (int j = 0; j < inst.L; ++j)
            bid += theta_star[static_cast<std::size_t>(j)] *
                   inst.A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        eligible_[static_cast<std::size_t>(i)] = inst.r[static_cast<std::size_t>(i)] > bid;
    }
}

StepResult SbpcPolicy::step(int type) {
    if (type == 0) return {Decision::NoOp, false};
    if (!eligible_[static_cast<std::size_t>(type - 1)]) return {Decision::Reject, false};
    if (!book_.fits(type)) return {Decision::Reject, true};
    book_.consume(type);
    return {Decision::Accept, false};
}

OgdParams OgdParams::defaults(const Instance& inst) {
    OgdParams p;
    const double alow = inst.alow();
    p.theta_bar = alow > 0.0 ? inst.rbar() / alow : inst.rbar();
    const double sqrtL = std::sqrt(static_cast<double>(inst.L));
    p.D = sqrtL * p.theta_bar;
    p.G = sqrtL * (1.0 + inst.abar());
    return p;
}

BpcOgdPolicy::BpcOgdPolicy(const Instance& inst, const OgdParams& params)
    : inst_(&inst), book_(inst), params_(params) {
    if (!(params.D > 0.0) || !(params.G > 0.0) || !(params.theta_bar > 0.0))
        throw std::invalid_argument("bpc_ogd: D, G, theta_bar must be positive");
    eta_ = params.D / (params.G * std::sqrt(static_cast<double>(inst.T)));
    theta_.assign(static_cast<std::size_t>(inst.L), 0.0);
    accepted_.assign(static_cast<std::size_t>(inst.n), 0);
}

StepResult BpcOgdPolicy::step(int type) {
    if (type == 0) return {Decision::NoOp, false};

    double bid = 0.0;
    for (int j = 0; j < inst_->L; ++j)
        bid += theta_[static_cast<std::size_t>(j)] *
               inst_->A[static_cast<std::size_t>(type - 1)][static_cast<std::size_t>(j)];
    const bool wants = inst_->r[static_cast<std::size_t>(type - 1)] > bid;

    if (terminated_) return {Decision::Reject, wants};

    const Vec cap_before = book_.remaining();
    const bool fits = book_.fits(type);
    double y = 0.0;
    StepResult res{Decision::Reject, false};
    if (fits && wants) {
        y = 1.0;
        book_.consume(type);
        accepted_[static_cast<std::size_t>(type - 1)]++;
        res = {Decision::Accept, false};
    } else if (!fits) {
        res = {Decision::Reject, wants};
        if (book_.exhausted()) {
            terminated_ = true;
            return res;
        }
    }

    // OGD step on g_t(theta) = sum_j theta_j (m_j(t)/T - y_t A_ij), using the
    // realized action and the pre-consumption capacity.
    for (int j = 0; j < inst_->L; ++j) {
        const double grad = cap_before[static_cast<std::size_t>(j)] / static_cast<double>(inst_->T) -
                            y * inst_->A[static_cast<std::size_t>(type - 1)][static_cast<std::size_t>(j)];
        double v = theta_[static_cast<std::size_t>(j)] - eta_ * grad;
        v = std::min(std::max(0.0, v), params_.theta_bar);
        theta_[static_cast<std::size_t>(j)] = v;
    }
    return res;
}

std::unique_ptr<Policy> make_fcfs(const Instance& inst) {
    return std::make_unique<FcfsPolicy>(inst);
}

std::unique_ptr<Policy> make_dlp_pa(const Instance& inst, const Vec& x_star, RandomSource rng) {
    return std::make_unique<DlpPaPolicy>(inst, x_star, rng);
}

std::unique_ptr<Policy> make_dlp_pa(const Instance& inst, RandomSource rng) {
    const DlpSolution dlp = solve_dlp(inst, inst.m, inst.T);
    if (dlp.status != LPStatus::Optimal) throw std::runtime_error("dlp_pa: DLP not optimal");
    return std::make_unique<DlpPaPolicy>(inst, dlp.x_star, rng);
}

std::unique_ptr<Policy> make_rdlp_pa(const Instance& inst, int t_star, RandomSource rng) {
    return std::make_unique<RdlpPaPolicy>(inst, t_star, rng);
}

std::unique_ptr<Policy> make_sbpc(const Instance& inst, const Vec& theta_star) {
    return std::make_unique<SbpcPolicy>(inst, theta_star);
}

std::unique_ptr<Policy> make_sbpc(const Instance& inst) {
    const DlpSolution dlp = solve_dlp(inst, inst.m, inst.T);
    if (dlp.status != LPStatus::Optimal) throw std::runtime_error("sbpc: DLP not optimal");
    return std::make_unique<SbpcPolicy>(inst, dlp.theta_star);
}

std::unique_ptr<Policy> make_bpc_ogd(const Instance& inst, const OgdParams& params) {
    return std::make_unique<BpcOgdPolicy>(inst, params);
}

}  // namespace fairrm
