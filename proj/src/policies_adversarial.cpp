#include "fairrm/policies_adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fairrm/metrics.hpp"
#include "fairrm/parallel.hpp"

namespace fairrm {

namespace {

LastDecision seed_from(LastDecision observed) {
    return observed == LastDecision::Reject ? LastDecision::Reject : LastDecision::Accept;
}

void check_limits(const Instance& inst, const std::vector<int>& b) {
    if (static_cast<int>(b.size()) != inst.n)
        throw std::invalid_argument("booking limits must have n entries");
    for (int v : b)
        if (v < 0) throw std::invalid_argument("booking limits must be nonnegative");
}

void check_nesting_shape(const Instance& inst) {
    if (inst.L != 1)
        throw std::invalid_argument("nesting requires a single resource");
    for (int i = 0; i < inst.n; ++i)
        if (std::abs(inst.A[static_cast<std::size_t>(i)][0] - 1.0) > 1e-12)
            throw std::invalid_argument("nesting requires unit demand");
    for (int i = 0; i + 1 < inst.n; ++i)
        if (inst.r[static_cast<std::size_t>(i)] <= inst.r[static_cast<std::size_t>(i + 1)])
            throw std::invalid_argument("nesting requires revenue-ranked types (r_1 > ... > r_n)");
}

}  // namespace

BlPolicy::BlPolicy(const Instance& inst, std::vector<int> b)
    : inst_(&inst), book_(inst), b_(std::move(b)) {
    check_limits(inst, b_);
    s_.assign(static_cast<std::size_t>(inst.n), 0);
}

StepResult BlPolicy::step(int type) {
    if (type == 0) return {Decision::NoOp, false};
    const std::size_t i = static_cast<std::size_t>(type - 1);
    if (s_[i] >= b_[i]) return {Decision::Reject, false};
    if (!book_.fits(type)) return {Decision::Reject, true};
    book_.consume(type);
    s_[i]++;
    return {Decision::Accept, false};
}

NestingPolicy::NestingPolicy(const Instance& inst, std::vector<int> b)
    : inst_(&inst), book_(inst), b_(std::move(b)) {
    check_limits(inst, b_);
    check_nesting_shape(inst);
    s_.assign(static_cast<std::size_t>(inst.n), 0);
}

StepResult NestingPolicy::step(int type) {
    if (type == 0) return {Decision::NoOp, false};
    const std::size_t i = static_cast<std::size_t>(type - 1);
    int tail = 0;
    for (std::size_t j = i; j < s_.size(); ++j) tail += s_[j];
    if (tail >= b_[i]) return {Decision::Reject, false};
    if (!book_.fits(type)) return {Decision::Reject, true};
    book_.consume(type);
    s_[i]++;
    return {Decision::Accept, false};
}

GpBlPolicy::GpBlPolicy(const Instance& inst, std::vector<int> b, GraceConfig cfg,
                       RandomSource rng)
    : inst_(&inst), book_(inst), b_(std::move(b)), cfg_(cfg), rng_(rng) {
    check_limits(inst, b_);
    s_.assign(static_cast<std::size_t>(inst.n), 0);
    cap_threshold_ = inst.abar() * inst.n * cfg.gamma;
    gamma_int_ = static_cast<int>(std::ceil(cfg.gamma));
    in_gp_.assign(static_cast<std::size_t>(inst.n), false);
    chains_.resize(static_cast<std::size_t>(inst.n));
    last_.assign(static_cast<std::size_t>(inst.n), LastDecision::None);
}

StepResult GpBlPolicy::step(int type) {
    ++t_;
    if (!global_ && book_.min_remaining() - cap_threshold_ <= 0.0) {
        global_ = true;
        for (int i = 0; i < inst_->n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            if (in_gp_[ii]) continue;  // an already-running period keeps its state
            in_gp_[ii] = true;
            chains_[ii].mode = GraceMode::Decreasing;
            chains_[ii].last = seed_from(last_[ii]);
        }
        log_.push_back({t_, 0, "normal", "decreasing", "capacity_trigger"});
    }
    if (type == 0) return {Decision::NoOp, false};

    const std::size_t i = static_cast<std::size_t>(type - 1);
    if (!in_gp_[i]) {
        if (s_[i] < b_[i] - gamma_int_) {
            if (!book_.fits(type)) {
                last_[i] = LastDecision::Reject;
                return {Decision::Reject, true};
            }
            book_.consume(type);
            s_[i]++;
            last_[i] = LastDecision::Accept;
            return {Decision::Accept, false};
        }
        in_gp_[i] = true;
        chains_[i].mode = GraceMode::Decreasing;
        chains_[i].last = b_[i] >= 1 ? seed_from(last_[i]) : LastDecision::Reject;
        log_.push_back({t_, type, "normal", "decreasing", "quota_trigger"});
    }

    const Decision want = decreasing_step(chains_[i], cfg_.alpha, rng_);
    if (want == Decision::Accept) {
        if (!book_.fits(type)) {
            chains_[i].last = LastDecision::Reject;
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book_.consume(type);
        s_[i]++;
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }
    last_[i] = LastDecision::Reject;
    return {Decision::Reject, false};
}

GpNestingPolicy::GpNestingPolicy(const Instance& inst, std::vector<int> b, GraceConfig cfg,
                                 RandomSource rng)
    : inst_(&inst), book_(inst), b_(std::move(b)), cfg_(cfg), rng_(rng) {
    check_limits(inst, b_);
    check_nesting_shape(inst);
    s_.assign(static_cast<std::size_t>(inst.n), 0);
    cap_threshold_ = inst.n * cfg.gamma;
    quota_margin_ = static_cast<int>(std::ceil(inst.n * cfg.gamma));
    in_gp_.assign(static_cast<std::size_t>(inst.n), false);
    chains_.resize(static_cast<std::size_t>(inst.n));
    last_.assign(static_cast<std::size_t>(inst.n), LastDecision::None);
}

StepResult GpNestingPolicy::step(int type) {
    ++t_;
    if (!global_ && book_.min_remaining() - cap_threshold_ <= 0.0) {
        global_ = true;
        for (int i = 0; i < inst_->n; ++i) {
            const std::size_t ii = static_cast<std::size_t>(i);
            if (in_gp_[ii]) continue;
            in_gp_[ii] = true;
            chains_[ii].mode = GraceMode::Decreasing;
            chains_[ii].last = seed_from(last_[ii]);
        }
        log_.push_back({t_, 0, "normal", "decreasing", "capacity_trigger"});
    }
    if (type == 0) return {Decision::NoOp, false};

    const std::size_t i = static_cast<std::size_t>(type - 1);
    if (!in_gp_[i]) {
        int tail = 0;
        for (std::size_t j = i; j < s_.size(); ++j) tail += s_[j];
        if (tail < b_[i] - quota_margin_) {
            if (!book_.fits(type)) {
                last_[i] = LastDecision::Reject;
                return {Decision::Reject, true};
            }
            book_.consume(type);
            s_[i]++;
            last_[i] = LastDecision::Accept;
            return {Decision::Accept, false};
        }
        in_gp_[i] = true;
        chains_[i].mode = GraceMode::Decreasing;
        chains_[i].last = b_[i] >= 1 ? seed_from(last_[i]) : LastDecision::Reject;
        log_.push_back({t_, type, "normal", "decreasing", "quota_trigger"});
    }

    const Decision want = decreasing_step(chains_[i], cfg_.alpha, rng_);
    if (want == Decision::Accept) {
        if (!book_.fits(type)) {
            chains_[i].last = LastDecision::Reject;
            last_[i] = LastDecision::Reject;
            return {Decision::Reject, true};
        }
        book_.consume(type);
        s_[i]++;
        last_[i] = LastDecision::Accept;
        return {Decision::Accept, false};
    }
    last_[i] = LastDecision::Reject;
    return {Decision::Reject, false};
}

std::vector<int> default_booking_limits(const Instance& inst) {
    const DlpSolution dlp = solve_dlp(inst, inst.m, inst.T);
    if (dlp.status != LPStatus::Optimal)
        throw std::runtime_error("default_booking_limits: DLP not optimal");
    std::vector<int> b(static_cast<std::size_t>(inst.n));
    for (int i = 0; i < inst.n; ++i)
        b[static_cast<std::size_t>(i)] = static_cast<int>(
            std::floor(dlp.x_star[static_cast<std::size_t>(i)] * inst.T + 1e-9));
    return b;
}

namespace {

std::vector<int> split_evenly(int total, int parts) {
    std::vector<int> sizes(static_cast<std::size_t>(parts), total / parts);
    for (int i = 0; i < total % parts; ++i) sizes[static_cast<std::size_t>(i)]++;
    return sizes;
}

}  // namespace

std::vector<ArrivalSequence> generate_adversarial(const FamilySpec& family, int n,
                                                  double m_scale) {
    const int total = static_cast<int>(std::llround(4.0 * m_scale));
    std::vector<ArrivalSequence> out;

    if (family.id == "single_type_flood") {
        out.push_back(make_arrival_sequence(std::vector<int>(static_cast<std::size_t>(total), 1), n));
    } else if (family.id == "low_first" || family.id == "high_first") {
        std::vector<int> events;
        events.reserve(static_cast<std::size_t>(total));
        const auto sizes = split_evenly(total, n);
        for (int blk = 0; blk < n; ++blk) {
            const int type = family.id == "low_first" ? n - blk : blk + 1;
            events.insert(events.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(blk)]),
                          type);
        }
        out.push_back(make_arrival_sequence(std::move(events), n));
    } else if (family.id == "alternating") {
        std::vector<int> events(static_cast<std::size_t>(total));
        for (int t = 0; t < total; ++t) events[static_cast<std::size_t>(t)] = t % n + 1;
        out.push_back(make_arrival_sequence(std::move(events), n));
    } else if (family.id == "block_permutations") {
        const int k = family.k;
        if (k < 1 || k > 12) throw std::invalid_argument("block_permutations: k out of range");
        const auto sizes = split_evenly(total, k);
        long count = 1;
        for (int b = 0; b < k; ++b) count *= n;
        for (long code = 0; code < count; ++code) {
            std::vector<int> events;
            events.reserve(static_cast<std::size_t>(total));
            long rest = code;
            for (int blk = 0; blk < k; ++blk) {
                const int type = static_cast<int>(rest % n) + 1;
                rest /= n;
                events.insert(events.end(),
                              static_cast<std::size_t>(sizes[static_cast<std::size_t>(blk)]), type);
            }
            out.push_back(make_arrival_sequence(std::move(events), n));
        }
    } else {
        throw std::invalid_argument("unknown adversarial family: " + family.id);
    }
    return out;
}

CrReport empirical_cr(const InstancePolicyFactory& factory, const std::string& policy_name,
                      const Instance& templ, const std::vector<FamilySpec>& families,
                      double m_scale, int replications, std::uint64_t seed,
                      double horizon_ratio, int threads) {
    if (replications < 1) throw std::invalid_argument("empirical_cr: replications must be >= 1");
    const Instance inst = scale_instance(templ, m_scale, horizon_ratio);

    CrReport report;
    report.cr = kInf;
    int instance_id = 0;
    for (const FamilySpec& family : families) {
        const auto sequences = generate_adversarial(family, inst.n, m_scale);
        for (const ArrivalSequence& arr : sequences) {
            const double opt = hindsight_value(inst, arr);
            if (opt <= 0.0) {
                report.skipped_zero_opt++;
                ++instance_id;
                continue;
            }
            std::vector<double> revenue(static_cast<std::size_t>(replications), 0.0);
            parallel_for(replications, threads, [&](int rep) {
                RandomSource rng(seed, static_cast<std::uint64_t>(instance_id) * 1000003ull +
                                           static_cast<std::uint64_t>(rep));
                auto policy = factory(inst, rng.fork("policy"));
                const RunTrace trace = run_policy(*policy, inst, arr);
                revenue[static_cast<std::size_t>(rep)] = trace.total_revenue;
            });
            double mean = 0.0;
            for (double v : revenue) mean += v;
            mean /= static_cast<double>(replications);

            CrRow row;
            row.m_scale = m_scale;
            row.family = family.id;
            row.instance_id = instance_id++;
            row.policy = policy_name;
            row.revenue = mean;
            row.opt = opt;
            row.ratio = mean / opt;
            report.cr = std::min(report.cr, row.ratio);
            report.rows.push_back(std::move(row));
        }
    }
    if (report.rows.empty()) report.cr = 0.0;
    return report;
}

std::string cr_report_to_csv(const CrReport& report) {
    std::ostringstream os;
    os << "m_scale,family,instance_id,policy,revenue,opt,ratio\n";
    char buf[64];
    for (const CrRow& row : report.rows) {
        os << row.m_scale << ',' << row.family << ',' << row.instance_id << ',' << row.policy
           << ',';
        std::snprintf(buf, sizeof buf, "%.12g", row.revenue);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", row.opt);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.12g", row.ratio);
        os << buf << '\n';
    }
    return os.str();
}

std::unique_ptr<Policy> make_bl(const Instance& inst, std::vector<int> b) {
    return std::make_unique<BlPolicy>(inst, std::move(b));
}

std::unique_ptr<Policy> make_nesting(const Instance& inst, std::vector<int> b) {
    return std::make_unique<NestingPolicy>(inst, std::move(b));
}

std::unique_ptr<Policy> make_gp_bl(const Instance& inst, std::vector<int> b, GraceConfig cfg,
                                   RandomSource rng) {
    return std::make_unique<GpBlPolicy>(inst, std::move(b), cfg, rng);
}

std::unique_ptr<Policy> make_gp_nesting(const Instance& inst, std::vector<int> b, GraceConfig cfg,
                                        RandomSource rng) {
    return std::make_unique<GpNestingPolicy>(inst, std::move(b), cfg, rng);
}

}  // namespace fairrm
