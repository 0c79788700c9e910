#include "fairrm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fairrm/parallel.hpp"

namespace fairrm {

double hindsight_value(const Instance& inst, const ArrivalSequence& arrivals) {
    const LPSolution sol = solve_lp(build_hindsight(inst, arrivals.counts));
    if (sol.status != LPStatus::Optimal)
        throw std::runtime_error("hindsight_value: LP not optimal");
    return sol.objective_value;
}

RegretReport estimate_regret(const SimplePolicyFactory& factory, const Instance& inst,
                             int replications, std::uint64_t seed, int threads) {
    if (replications < 30)
        throw std::invalid_argument("estimate_regret: need at least 30 replications");

    std::vector<double> hindsight(static_cast<std::size_t>(replications), 0.0);
    std::vector<double> revenue(static_cast<std::size_t>(replications), 0.0);

    parallel_for(replications, threads, [&](int rep) {
        RandomSource base(seed, static_cast<std::uint64_t>(rep));
        RandomSource arrivals_rng = base.fork("arrivals");
        const ArrivalSequence arrivals = sample_arrivals(inst.lambda, inst.T, arrivals_rng);
        hindsight[static_cast<std::size_t>(rep)] = hindsight_value(inst, arrivals);
        auto policy = factory(base.fork("policy"));
        const RunTrace trace = run_policy(*policy, inst, arrivals);
        revenue[static_cast<std::size_t>(rep)] = trace.total_revenue;
    });

    RegretReport rep;
    rep.replications = replications;
    double sum_h = 0.0, sum_r = 0.0, sum_d = 0.0, sum_d2 = 0.0;
    for (int i = 0; i < replications; ++i) {
        const double h = hindsight[static_cast<std::size_t>(i)];
        const double r = revenue[static_cast<std::size_t>(i)];
        sum_h += h;
        sum_r += r;
        const double d = h - r;
        sum_d += d;
        sum_d2 += d * d;
    }
    const double R = static_cast<double>(replications);
    rep.mean_hindsight = sum_h / R;
    rep.mean_revenue = sum_r / R;
    rep.regret = sum_d / R;
    const double var = std::max(0.0, (sum_d2 - sum_d * sum_d / R) / (R - 1.0));
    rep.std_error = std::sqrt(var / R);
    return rep;
}

FairnessAuditor::FairnessAuditor(int n, FairnessOptions options)
    : n_(n), opt_(std::move(options)) {
    counts_.assign(static_cast<std::size_t>(n),
                   std::vector<PairCounts>(opt_.offsets.size()));
}

void FairnessAuditor::add(const RunTrace& trace) {
    ++reps_;
    if (trace.depleted) ++depleted_;

    // Per-type decision sequences, indexed by within-type u (1-based in
    // the trace; 0-based here).
    std::vector<std::vector<unsigned char>> dec(static_cast<std::size_t>(n_));
    for (const TraceEvent& ev : trace.events) {
        if (ev.type <= 0) continue;
        dec[static_cast<std::size_t>(ev.type - 1)].push_back(
            ev.decision == Decision::Accept ? 1 : 0);
    }

    for (int i = 0; i < n_; ++i) {
        const auto& d = dec[static_cast<std::size_t>(i)];
        for (std::size_t oi = 0; oi < opt_.offsets.size(); ++oi) {
            const int off = opt_.offsets[oi];
            if (off <= 0) continue;
            auto& pc = counts_[static_cast<std::size_t>(i)][oi];
            const std::size_t limit =
                d.size() > static_cast<std::size_t>(off) ? d.size() - static_cast<std::size_t>(off) : 0;
            if (pc.pairs.size() < limit) {
                pc.pairs.resize(limit, 0);
                pc.later.resize(limit, 0);
                pc.earlier.resize(limit, 0);
                pc.cond_pairs.resize(limit, 0);
                pc.cond_later.resize(limit, 0);
                pc.cond_earlier.resize(limit, 0);
            }
            for (std::size_t u = 0; u < limit; ++u) {
                const bool later_fav = d[u] == 0 && d[u + static_cast<std::size_t>(off)] == 1;
                const bool earlier_fav = d[u] == 1 && d[u + static_cast<std::size_t>(off)] == 0;
                pc.pairs[u]++;
                if (later_fav) pc.later[u]++;
                if (earlier_fav) pc.earlier[u]++;
                if (!trace.depleted) {
                    pc.cond_pairs[u]++;
                    if (later_fav) pc.cond_later[u]++;
                    if (earlier_fav) pc.cond_earlier[u]++;
                }
            }
        }
    }
}

void FairnessAuditor::merge(const FairnessAuditor& other) {
    if (other.n_ != n_ || other.opt_.offsets != opt_.offsets)
        throw std::invalid_argument("FairnessAuditor::merge: incompatible auditors");
    reps_ += other.reps_;
    depleted_ += other.depleted_;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        for (std::size_t oi = 0; oi < counts_[i].size(); ++oi) {
            auto& dst = counts_[i][oi];
            const auto& src = other.counts_[i][oi];
            if (dst.pairs.size() < src.pairs.size()) {
                dst.pairs.resize(src.pairs.size(), 0);
                dst.later.resize(src.later.size(), 0);
                dst.earlier.resize(src.earlier.size(), 0);
                dst.cond_pairs.resize(src.cond_pairs.size(), 0);
                dst.cond_later.resize(src.cond_later.size(), 0);
                dst.cond_earlier.resize(src.cond_earlier.size(), 0);
            }
            for (std::size_t u = 0; u < src.pairs.size(); ++u) {
                dst.pairs[u] += src.pairs[u];
                dst.later[u] += src.later[u];
                dst.earlier[u] += src.earlier[u];
                dst.cond_pairs[u] += src.cond_pairs[u];
                dst.cond_later[u] += src.cond_later[u];
                dst.cond_earlier[u] += src.cond_earlier[u];
            }
        }
    }
}

namespace {

FairnessCell summarize_cell(int offset, const std::vector<int>& pairs,
                            const std::vector<int>& later, const std::vector<int>& earlier,
                            double alpha, int min_reps) {
    FairnessCell cell;
    cell.offset = offset;
    double sum_later = 0.0, sum_earlier = 0.0;
    int used = 0;
    for (std::size_t u = 0; u < pairs.size(); ++u) {
        if (pairs[u] < min_reps) {
            cell.skipped_indices++;
            continue;
        }
        const double denom = static_cast<double>(pairs[u]);
        const double f_later = later[u] / denom;
        const double f_earlier = earlier[u] / denom;
        sum_later += f_later;
        sum_earlier += f_earlier;
        ++used;
        for (const double f : {f_later, f_earlier}) {
            if (f > cell.max_freq) {
                cell.max_freq = f;
                cell.worst_u = static_cast<int>(u) + 1;
            }
            const double sigma = std::sqrt(std::max(f * (1.0 - f), 0.0) / denom);
            if (f > alpha * offset + 3.0 * sigma) cell.pass = false;
        }
    }
    if (used > 0) {
        cell.mean_later = sum_later / used;
        cell.mean_earlier = sum_earlier / used;
    }
    return cell;
}

}  // namespace

FairnessReport FairnessAuditor::finalize() const {
    FairnessReport report;
    report.replications = reps_;
    report.low_power = reps_ < opt_.low_power_threshold;
    report.depletion_freq = reps_ > 0 ? static_cast<double>(depleted_) / reps_ : 0.0;
    report.depletion_sigma =
        reps_ > 0 ? std::sqrt(std::max(report.depletion_freq * (1.0 - report.depletion_freq), 0.0) /
                              reps_)
                  : 0.0;

    bool pass = report.depletion_freq <= opt_.delta + 3.0 * report.depletion_sigma;
    double sum_adj = 0.0;
    int adj_cells = 0;

    report.types.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        auto& tr = report.types[static_cast<std::size_t>(i)];
        bool type_pass = true;
        for (std::size_t oi = 0; oi < opt_.offsets.size(); ++oi) {
            const auto& pc = counts_[static_cast<std::size_t>(i)][oi];
            FairnessCell cond = summarize_cell(opt_.offsets[oi], pc.cond_pairs, pc.cond_later,
                                               pc.cond_earlier, opt_.alpha,
                                               opt_.min_reps_per_index);
            FairnessCell uncond = summarize_cell(opt_.offsets[oi], pc.pairs, pc.later, pc.earlier,
                                                 opt_.alpha, opt_.min_reps_per_index);
            if (!cond.pass) type_pass = false;
            if (opt_.offsets[oi] == 1) {
                report.max_adjacent = std::max(report.max_adjacent, cond.max_freq);
                sum_adj += 0.5 * (cond.mean_later + cond.mean_earlier);
                ++adj_cells;
            }
            tr.conditional.push_back(std::move(cond));
            tr.unconditional.push_back(std::move(uncond));
        }
        tr.pass = type_pass;
        if (!type_pass) pass = false;
    }
    report.mean_adjacent = adj_cells > 0 ? sum_adj / adj_cells : 0.0;
    report.pass = pass;
    return report;
}

FairnessReport fairness_audit(const std::vector<RunTrace>& traces, int n,
                              const FairnessOptions& options) {
    FairnessAuditor auditor(n, options);
    for (const RunTrace& tr : traces) auditor.add(tr);
    return auditor.finalize();
}

std::string fairness_report_to_csv(const FairnessReport& report) {
    std::ostringstream os;
    os << "type,offset,variant,max_freq,worst_u,mean_later,mean_earlier,pass\n";
    char buf[64];
    for (std::size_t i = 0; i < report.types.size(); ++i) {
        const auto& tr = report.types[i];
        auto emit = [&](const FairnessCell& c, const char* variant) {
            std::snprintf(buf, sizeof buf, "%.6g", c.max_freq);
            os << (i + 1) << ',' << c.offset << ',' << variant << ',' << buf << ',' << c.worst_u
               << ',';
            std::snprintf(buf, sizeof buf, "%.6g", c.mean_later);
            os << buf << ',';
            std::snprintf(buf, sizeof buf, "%.6g", c.mean_earlier);
            os << buf << ',' << (c.pass ? 1 : 0) << '\n';
        };
        for (const auto& c : tr.conditional) emit(c, "conditional");
        for (const auto& c : tr.unconditional) emit(c, "unconditional");
    }
    return os.str();
}

int ogd_flip_count(const RunTrace& trace, int n) {
    std::vector<int> last(static_cast<std::size_t>(n), -1);
    int flips = 0;
    for (const TraceEvent& ev : trace.events) {
        if (ev.type <= 0) continue;
        const int cur = ev.decision == Decision::Accept ? 1 : 0;
        const std::size_t i = static_cast<std::size_t>(ev.type - 1);
        if (last[i] >= 0 && last[i] != cur) ++flips;
        last[i] = cur;
    }
    return flips;
}

}  // namespace fairrm
