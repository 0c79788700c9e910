#pragma once

#include <memory>

#include "fairrm/linprog.hpp"
#include "fairrm/policy.hpp"
#include "fairrm/random.hpp"

namespace fairrm {

// Accept every arrival that fits the remaining capacity.
class FcfsPolicy : public Policy {
public:
    explicit FcfsPolicy(const Instance& inst) : inst_(&inst), book_(inst) {}

    std::string name() const override { return "fcfs"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

private:
    const Instance* inst_;
    CapacityBook book_;
};

// Probabilistic assignment from a solved DLP: accept a feasible type-i
// arrival with probability x*_i / lambda_i.
class DlpPaPolicy : public Policy {
public:
    DlpPaPolicy(const Instance& inst, const Vec& x_star, RandomSource rng);

    std::string name() const override { return "dlp_pa"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

    const Vec& accept_prob() const { return prob_; }

private:
    const Instance* inst_;
    CapacityBook book_;
    Vec prob_;
    RandomSource rng_;
};

// DLP-PA with one re-solve at t_star on the remaining capacity and horizon.
class RdlpPaPolicy : public Policy {
public:
    RdlpPaPolicy(const Instance& inst, int t_star, RandomSource rng);

    std::string name() const override { return "rdlp_pa"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

    const Vec& current_prob() const { return prob_; }
    const Vec& initial_x_star() const { return x_star0_; }

private:
    void resolve();

    const Instance* inst_;
    CapacityBook book_;
    int t_star_;
    int t_ = 0;
    bool resolved_ = false;
    bool all_reject_ = false;  // infeasible re-solve fallback
    Vec x_star0_;
    Vec prob_;
    RandomSource rng_;
};

// Static bid price control: accept type i iff r_i strictly exceeds
// sum_j theta_j A_ij and the demand fits.
class SbpcPolicy : public Policy {
public:
    SbpcPolicy(const Instance& inst, const Vec& theta_star);

    std::string name() const override { return "sbpc"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

    bool eligible(int type) const { return eligible_[static_cast<std::size_t>(type - 1)]; }

private:
    const Instance* inst_;
    CapacityBook book_;
    std::vector<bool> eligible_;
};

struct OgdParams {
    double D = 0.0;
    double G = 0.0;
    double theta_bar = 0.0;

    static OgdParams defaults(const Instance& inst);
};

// Bid price control driven by online gradient descent on the dual variables.
// theta starts at zero; each arrival contributes the subgradient
// m_j(t)/T - y_t A_ij, with a projection onto [0, theta_bar].
class BpcOgdPolicy : public Policy {
public:
    BpcOgdPolicy(const Instance& inst, const OgdParams& params);

    std::string name() const override { return "bpc_ogd"; }
    StepResult step(int type) override;
    const Vec& remaining_capacity() const override { return book_.remaining(); }

    const Vec& theta() const { return theta_; }
    double eta() const { return eta_; }
    int accepted_of(int type) const { return accepted_[static_cast<std::size_t>(type - 1)]; }
    bool terminated() const { return terminated_; }

private:
    const Instance* inst_;
    CapacityBook book_;
    OgdParams params_;
    double eta_;
    Vec theta_;
    std::vector<int> accepted_;
    bool terminated_ = false;
};

std::unique_ptr<Policy> make_fcfs(const Instance& inst);
std::unique_ptr<Policy> make_dlp_pa(const Instance& inst, const Vec& x_star, RandomSource rng);
// Convenience overload that solves the DLP on the initial capacity.
std::unique_ptr<Policy> make_dlp_pa(const Instance& inst, RandomSource rng);
std::unique_ptr<Policy> make_rdlp_pa(const Instance& inst, int t_star, RandomSource rng);
std::unique_ptr<Policy> make_sbpc(const Instance& inst, const Vec& theta_star);
std::unique_ptr<Policy> make_sbpc(const Instance& inst);
std::unique_ptr<Policy> make_bpc_ogd(const Instance& inst, const OgdParams& params);

}  // namespace fairrm
