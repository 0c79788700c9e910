#include "fairrm/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairrm {

double PricingInstance::pbar() const {
    double hi = 0.0;
    for (double p : posted)
        if (p < kInf) hi = std::max(hi, p);
    return hi;
}

double PricingInstance::purchase_prob(int type, double price) const {
    if (price == kInf) return 0.0;
    const auto& table = purchase_table[static_cast<std::size_t>(type - 1)];
    const auto it = table.find(price);
    if (it == table.end())
        throw std::invalid_argument("purchase_prob: price not in table for type " +
                                    std::to_string(type));
    return it->second;
}

ValidationReport validate_pricing_instance(const PricingInstance& pinst) {
    ValidationReport rep = validate_instance(pinst.base);
    auto fail = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back(msg);
    };
    const int n = pinst.base.n;
    if (static_cast<int>(pinst.posted.size()) != n) fail("posted prices must have n entries");
    if (static_cast<int>(pinst.purchase_table.size()) != n) {
        fail("purchase_prob must have n tables");
        return rep;
    }
    for (int i = 0; i < n; ++i) {
        const auto& table = pinst.purchase_table[static_cast<std::size_t>(i)];
        if (table.empty()) {
            fail("purchase table empty for type " + std::to_string(i + 1));
            continue;
        }
        double prev = 2.0;
        for (const auto& [price, prob] : table) {
            if (prob < 0.0 || prob > 1.0)
                fail("purchase probability out of [0,1] for type " + std::to_string(i + 1));
            if (prob >= prev)
                fail("purchase probability must be strictly decreasing in price (type " +
                     std::to_string(i + 1) + ")");
            prev = prob;
        }
        if (static_cast<int>(pinst.posted.size()) == n &&
            table.find(pinst.posted[static_cast<std::size_t>(i)]) == table.end())
            fail("posted price missing from purchase table for type " + std::to_string(i + 1));
    }
    return rep;
}

StaticPricingPolicy::StaticPricingPolicy(const PricingInstance& pinst, RandomSource rng)
    : pinst_(&pinst), book_(pinst.base), rng_(rng) {
    u_.assign(static_cast<std::size_t>(pinst.base.n), 0);
}

PriceStep StaticPricingPolicy::step(int type) {
    if (type == 0) return {0.0, false, false};
    const std::size_t i = static_cast<std::size_t>(type - 1);
    u_[i]++;
    if (!book_.fits(type)) return {kInf, false, true};
    const double price = pinst_->posted[i];
    // Purchase draw indexed by (type, u) for common-random-numbers coupling.
    RandomSource draw = rng_.fork(static_cast<std::uint64_t>(type) * 0x10001ull +
                                  static_cast<std::uint64_t>(u_[i]));
    const bool buy = draw.bernoulli(pinst_->purchase_prob(type, price));
    if (buy) book_.consume(type);
    return {price, buy, false};
}

GpPricingPolicy::GpPricingPolicy(const PricingInstance& pinst, GraceConfig cfg, RandomSource rng)
    : pinst_(&pinst), cfg_(cfg), book_(pinst.base), rng_(rng) {
    threshold_ = pinst.base.abar() * pinst.base.n * cfg.gamma;
    u_.assign(static_cast<std::size_t>(pinst.base.n), 0);
    absorbed_.assign(static_cast<std::size_t>(pinst.base.n), false);
    last_price_ = pinst.posted;
}

PriceStep GpPricingPolicy::step(int type) {
    ++t_;
    if (!triggered_ && book_.min_remaining() <= threshold_) {
        triggered_ = true;
        trigger_round_ = t_;
    }
    if (type == 0) return {0.0, false, false};

    const std::size_t i = static_cast<std::size_t>(type - 1);
    u_[i]++;

    double offer;
    bool forced = false;
    if (!triggered_) {
        if (book_.fits(type)) {
            offer = pinst_->posted[i];
        } else {
            offer = kInf;
            forced = true;
        }
    } else if (absorbed_[i]) {
        offer = kInf;
    } else {
        // Price-space decreasing period: repeat the previous price w.p.
        // 1-alpha, else infinity forever.
        if (rng_.bernoulli(1.0 - cfg_.alpha)) {
            offer = last_price_[i];
            if (offer < kInf && !book_.fits(type)) {
                offer = kInf;
                forced = true;
                absorbed_[i] = true;
            }
        } else {
            offer = kInf;
            absorbed_[i] = true;
        }
    }

    last_price_[i] = offer;
    if (offer == kInf) return {offer, false, forced};

    RandomSource draw = rng_.fork(static_cast<std::uint64_t>(type) * 0x10001ull +
                                  static_cast<std::uint64_t>(u_[i]));
    const bool buy = draw.bernoulli(pinst_->purchase_prob(type, offer));
    if (buy) book_.consume(type);
    return {offer, buy, false};
}

PriceTrace run_pricing_policy(PricingPolicy& policy, const PricingInstance& pinst,
                              const ArrivalSequence& arrivals) {
    PriceTrace trace;
    const int n = pinst.base.n;
    trace.arrivals_per_type.assign(static_cast<std::size_t>(n), 0);
    trace.purchases_per_type.assign(static_cast<std::size_t>(n), 0);
    trace.events.reserve(arrivals.events.size());

    for (std::size_t idx = 0; idx < arrivals.events.size(); ++idx) {
        const int type = arrivals.events[idx];
        PriceEvent ev;
        ev.t = static_cast<int>(idx) + 1;
        ev.type = type;
        if (type > 0) {
            trace.arrivals_per_type[static_cast<std::size_t>(type - 1)]++;
            ev.u = trace.arrivals_per_type[static_cast<std::size_t>(type - 1)];
        }
        const PriceStep res = policy.step(type);
        if (type > 0) {
            ev.offered = res.offered;
            ev.purchased = res.purchased;
            ev.forced = res.forced;
            if (res.forced) trace.depleted = true;
            if (res.purchased) {
                ev.revenue = res.offered;
                trace.total_revenue += res.offered;
                trace.purchases_per_type[static_cast<std::size_t>(type - 1)]++;
            }
        }
        trace.events.push_back(ev);
    }
    trace.final_capacity = policy.remaining_capacity();
    return trace;
}

std::string price_trace_to_csv(const PriceTrace& trace) {
    std::ostringstream os;
    os << "t,type,u,offered_price,purchased,revenue\n";
    char buf[64];
    for (const PriceEvent& ev : trace.events) {
        os << ev.t << ',' << ev.type << ',' << ev.u << ',';
        if (ev.type == 0) {
            os << "";
        } else if (ev.offered == kInf) {
            os << "inf";
        } else {
            std::snprintf(buf, sizeof buf, "%.12g", ev.offered);
            os << buf;
        }
        os << ',' << (ev.purchased ? 1 : 0) << ',';
        std::snprintf(buf, sizeof buf, "%.12g", ev.revenue);
        os << buf << '\n';
    }
    return os.str();
}

PriceFairnessAuditor::PriceFairnessAuditor(int n, double alpha, double delta,
                                           std::vector<int> offsets)
    : n_(n), alpha_(alpha), delta_(delta), offsets_(std::move(offsets)) {
    counts_.assign(static_cast<std::size_t>(n), std::vector<Counts>(offsets_.size()));
}

void PriceFairnessAuditor::add(const PriceTrace& trace) {
    ++reps_;
    if (trace.depleted) {
        ++depleted_;
        return;  // conditional audit only uses non-depleted runs
    }
    std::vector<std::vector<double>> prices(static_cast<std::size_t>(n_));
    for (const PriceEvent& ev : trace.events)
        if (ev.type > 0) prices[static_cast<std::size_t>(ev.type - 1)].push_back(ev.offered);

    for (int i = 0; i < n_; ++i) {
        const auto& seq = prices[static_cast<std::size_t>(i)];
        for (std::size_t oi = 0; oi < offsets_.size(); ++oi) {
            const std::size_t d = static_cast<std::size_t>(offsets_[oi]);
            auto& c = counts_[static_cast<std::size_t>(i)][oi];
            const std::size_t limit = seq.size() > d ? seq.size() - d : 0;
            if (c.total.size() < limit) {
                c.total.resize(limit, 0);
                c.differ.resize(limit, 0);
            }
            for (std::size_t u = 0; u < limit; ++u) {
                c.total[u]++;
                if (seq[u] != seq[u + d]) c.differ[u]++;
            }
        }
    }
}

void PriceFairnessAuditor::merge(const PriceFairnessAuditor& other) {
    if (other.n_ != n_ || other.offsets_ != offsets_)
        throw std::invalid_argument("PriceFairnessAuditor::merge: incompatible auditors");
    reps_ += other.reps_;
    depleted_ += other.depleted_;
    for (std::size_t i = 0; i < counts_.size(); ++i)
        for (std::size_t oi = 0; oi < counts_[i].size(); ++oi) {
            auto& dst = counts_[i][oi];
            const auto& src = other.counts_[i][oi];
            if (dst.total.size() < src.total.size()) {
                dst.total.resize(src.total.size(), 0);
                dst.differ.resize(src.differ.size(), 0);
            }
            for (std::size_t u = 0; u < src.total.size(); ++u) {
                dst.total[u] += src.total[u];
                dst.differ[u] += src.differ[u];
            }
        }
}

PriceFairnessReport PriceFairnessAuditor::finalize() const {
    PriceFairnessReport report;
    report.replications = reps_;
    report.low_power = reps_ < 1000;
    report.depletion_freq = reps_ > 0 ? static_cast<double>(depleted_) / reps_ : 0.0;
    report.types.assign(static_cast<std::size_t>(n_), {});
    bool pass = true;

    for (int i = 0; i < n_; ++i) {
        auto& cells = report.types[static_cast<std::size_t>(i)];
        for (std::size_t oi = 0; oi < offsets_.size(); ++oi) {
            const int d = offsets_[oi];
            const auto& c = counts_[static_cast<std::size_t>(i)][oi];
            PriceFairnessCell cell;
            cell.offset = d;
            double sum = 0.0;
            int used = 0;
            for (std::size_t u = 0; u < c.total.size(); ++u) {
                if (c.total[u] < 30) continue;
                const double f = static_cast<double>(c.differ[u]) / static_cast<double>(c.total[u]);
                sum += f;
                ++used;
                const double sigma =
                    std::sqrt(std::max(f * (1.0 - f), 0.0) / static_cast<double>(c.total[u]));
                if (f > cell.max_freq) {
                    cell.max_freq = f;
                    cell.worst_u = static_cast<int>(u) + 1;
                }
                if (f > alpha_ * d + 3.0 * sigma) pass = false;
            }
            cell.mean_freq = used > 0 ? sum / used : 0.0;
            if (d == 1) report.max_adjacent = std::max(report.max_adjacent, cell.max_freq);
            cells.push_back(cell);
        }
    }

    const double dep_sigma =
        reps_ > 0 ? std::sqrt(std::max(report.depletion_freq * (1.0 - report.depletion_freq), 0.0) /
                              reps_)
                  : 0.0;
    if (report.depletion_freq > delta_ + 3.0 * dep_sigma) pass = false;
    report.pass = pass;
    return report;
}

PriceFairnessReport price_fairness_audit(const std::vector<PriceTrace>& traces, int n,
                                         double alpha, double delta,
                                         const std::vector<int>& offsets) {
    PriceFairnessAuditor auditor(n, alpha, delta, offsets);
    for (const PriceTrace& tr : traces) auditor.add(tr);
    return auditor.finalize();
}

std::unique_ptr<PricingPolicy> make_static_pricing(const PricingInstance& pinst,
                                                   RandomSource rng) {
    return std::make_unique<StaticPricingPolicy>(pinst, rng);
}

std::unique_ptr<PricingPolicy> make_gp_pricing(const PricingInstance& pinst, GraceConfig cfg,
                                               RandomSource rng) {
    return std::make_unique<GpPricingPolicy>(pinst, cfg, rng);
}

}  // namespace fairrm
