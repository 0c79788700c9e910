#include <doctest.h>

#include <cmath>

#include "fairrm/pricing.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace fairrm;

namespace {

ArrivalSequence fixed(std::vector<int> events, int n) {
    return make_arrival_sequence(std::move(events), n);
}

}  // namespace

TEST_CASE("pricing instance validation") {
    PricingInstance good = testsupport::pricing_fixture(100, 0.5);
    CHECK(validate_pricing_instance(good).ok);

    PricingInstance increasing = good;
    increasing.purchase_table[0] = {{8.0, 0.2}, {10.0, 0.6}};  // prob rising in price
    CHECK_FALSE(validate_pricing_instance(increasing).ok);

    PricingInstance missing = good;
    missing.posted[0] = 7.5;  // not in the table
    CHECK_FALSE(validate_pricing_instance(missing).ok);
}

TEST_CASE("purchase_prob answers the table and the infinity sentinel") {
    const PricingInstance pinst = testsupport::pricing_fixture(100, 0.5);
    CHECK(pinst.purchase_prob(1, 10.0) == doctest::Approx(0.6));
    CHECK(pinst.purchase_prob(2, 6.0) == doctest::Approx(0.5));
    CHECK(pinst.purchase_prob(1, kInf) == 0.0);
    CHECK_THROWS_AS(pinst.purchase_prob(1, 3.14), std::invalid_argument);
    CHECK(pinst.pbar() == doctest::Approx(10.0));
}

TEST_CASE("static pricing offers infinity at zero capacity") {
    PricingInstance pinst = testsupport::pricing_fixture(4, 0.0);
    StaticPricingPolicy pol(pinst, RandomSource(1, 0));
    const PriceTrace tr = run_pricing_policy(pol, pinst, fixed({1, 2, 1, 2}, 2));
    for (const auto& ev : tr.events) CHECK(ev.offered == kInf);
    CHECK(tr.total_revenue == 0.0);
    CHECK(tr.depleted);
}

TEST_CASE("certain purchase probability buys while feasible") {
    PricingInstance pinst = testsupport::pricing_fixture(6, 0.5);  // capacity 3
    pinst.purchase_table[0] = {{10.0, 1.0}};
    pinst.purchase_table[1] = {{6.0, 0.999999999}};
    StaticPricingPolicy pol(pinst, RandomSource(2, 0));
    const PriceTrace tr = run_pricing_policy(pol, pinst, fixed({1, 1, 1, 1}, 2));
    CHECK(tr.purchases_per_type[0] == 3);
    CHECK(tr.events[3].offered == kInf);
}

TEST_CASE("purchase frequency tracks the table probability") {
    const int T = 100000;
    PricingInstance pinst = testsupport::pricing_fixture(T, 10.0);  // no depletion
    pinst.base.lambda = {0.0, 1.0, 0.0};
    pinst.purchase_table[0] = {{10.0, 0.4}};
    StaticPricingPolicy pol(pinst, RandomSource(5, 3));
    const PriceTrace tr =
        run_pricing_policy(pol, pinst, fixed(std::vector<int>(static_cast<std::size_t>(T), 1), 2));
    const double freq = static_cast<double>(tr.purchases_per_type[0]) / T;
    CHECK(std::abs(freq - 0.4) < 0.005);
}

TEST_CASE("gp pricing equals static pricing until the trigger") {
    const int T = 300;
    PricingInstance pinst = testsupport::pricing_fixture(T, 2.0);  // abundant
    const GraceConfig cfg = GraceConfig::make(0.3, 1.0 / T);
    RandomSource arr_rng(6, 0);
    const ArrivalSequence arr = sample_arrivals(pinst.base.lambda, T, arr_rng);
    StaticPricingPolicy stat(pinst, RandomSource(6, 11));
    GpPricingPolicy gp(pinst, cfg, RandomSource(6, 11));
    const PriceTrace ts = run_pricing_policy(stat, pinst, arr);
    const PriceTrace tg = run_pricing_policy(gp, pinst, arr);
    REQUIRE_FALSE(gp.triggered());
    for (std::size_t i = 0; i < ts.events.size(); ++i) {
        CHECK(ts.events[i].offered == tg.events[i].offered);
        CHECK(ts.events[i].purchased == tg.events[i].purchased);
    }
}

TEST_CASE("gp pricing price-space absorption: after infinity always infinity") {
    const int T = 600;
    PricingInstance pinst = testsupport::pricing_fixture(T, 0.15);  // scarce
    const GraceConfig cfg = GraceConfig::make(0.4, 1.0 / T);
    for (int seed = 0; seed < 30; ++seed) {
        RandomSource base(900 + seed, 0);
        RandomSource arr_rng = base.fork("arrivals");
        const ArrivalSequence arr = sample_arrivals(pinst.base.lambda, T, arr_rng);
        GpPricingPolicy gp(pinst, cfg, base.fork("policy"));
        const PriceTrace tr = run_pricing_policy(gp, pinst, arr);
        std::vector<bool> seen_inf(static_cast<std::size_t>(pinst.base.n), false);
        for (const auto& ev : tr.events) {
            if (ev.type == 0) continue;
            const std::size_t i = static_cast<std::size_t>(ev.type - 1);
            if (seen_inf[i]) REQUIRE(ev.offered == kInf);
            if (ev.offered == kInf) seen_inf[i] = true;
        }
    }
}

TEST_CASE("gp pricing per-seed loss against coupled static pricing is bounded") {
    const int T = 600;
    PricingInstance pinst = testsupport::pricing_fixture(T, 0.15);
    const GraceConfig cfg = GraceConfig::make(0.3, 1.0 / T);
    const Instance& b = pinst.base;
    const double bound = b.abar() / b.alow() * b.n * cfg.gamma * pinst.pbar();
    for (int seed = 0; seed < 200; ++seed) {
        RandomSource base(1700 + seed, 0);
        RandomSource arr_rng = base.fork("arrivals");
        const ArrivalSequence arr = sample_arrivals(b.lambda, T, arr_rng);
        StaticPricingPolicy stat(pinst, base.fork("policy"));
        GpPricingPolicy gp(pinst, cfg, base.fork("policy"));
        const double rev_s = run_pricing_policy(stat, pinst, arr).total_revenue;
        const double rev_g = run_pricing_policy(gp, pinst, arr).total_revenue;
        REQUIRE(rev_g >= rev_s - bound - 1e-9);
    }
}

TEST_CASE("revenue identity: totals match the event sum") {
    const int T = 500;
    PricingInstance pinst = testsupport::pricing_fixture(T, 0.3);
    RandomSource base(8, 0);
    RandomSource arr_rng = base.fork("arrivals");
    const ArrivalSequence arr = sample_arrivals(pinst.base.lambda, T, arr_rng);
    GpPricingPolicy gp(pinst, GraceConfig::make(0.3, 1.0 / T), base.fork("policy"));
    const PriceTrace tr = run_pricing_policy(gp, pinst, arr);
    double sum = 0.0;
    for (const auto& ev : tr.events)
        if (ev.purchased) sum += ev.offered;
    CHECK(tr.total_revenue == doctest::Approx(sum));
}

TEST_CASE("price audit passes trivially when capacity never binds") {
    const int T = 120;
    PricingInstance pinst = testsupport::pricing_fixture(T, 5.0);
    std::vector<PriceTrace> traces;
    for (int rep = 0; rep < 1200; ++rep) {
        RandomSource base(3100 + rep, 0);
        RandomSource arr_rng = base.fork("arrivals");
        const ArrivalSequence arr = sample_arrivals(pinst.base.lambda, T, arr_rng);
        StaticPricingPolicy pol(pinst, base.fork("policy"));
        traces.push_back(run_pricing_policy(pol, pinst, arr));
    }
    const PriceFairnessReport report = price_fairness_audit(traces, pinst.base.n, 0.1, 0.01);
    CHECK(report.pass);
    CHECK_FALSE(report.low_power);
    CHECK(report.max_adjacent == 0.0);
    CHECK(report.depletion_freq == 0.0);
}

TEST_CASE("price audit fails a deterministic depletion straddle") {
    // Certain purchases against tiny capacity: every run depletes at the
    // same index, so the depletion clause fails the audit.
    const int T = 40;
    PricingInstance pinst = testsupport::pricing_fixture(T, 0.1);  // capacity 4
    pinst.purchase_table[0] = {{10.0, 1.0}};
    pinst.purchase_table[1] = {{6.0, 0.999999999}};
    pinst.base.lambda = {0.0, 1.0, 0.0};
    std::vector<PriceTrace> traces;
    for (int rep = 0; rep < 1100; ++rep) {
        StaticPricingPolicy pol(pinst, RandomSource(4000 + rep, 0));
        traces.push_back(run_pricing_policy(
            pol, pinst, fixed(std::vector<int>(static_cast<std::size_t>(T), 1), 2)));
    }
    const PriceFairnessReport report = price_fairness_audit(traces, pinst.base.n, 0.1, 0.01);
    CHECK_FALSE(report.pass);
    CHECK(report.depletion_freq == doctest::Approx(1.0));
}

TEST_CASE("gp pricing passes the conditional price audit on a scarce instance") {
    const int T = 400;
    PricingInstance pinst = testsupport::pricing_fixture(T, 0.15);
    const double alpha = 0.3;
    const GraceConfig cfg = GraceConfig::make(alpha, 1.0 / T);
    PriceFairnessAuditor auditor(pinst.base.n, alpha, cfg.delta);
    for (int rep = 0; rep < 2000; ++rep) {
        RandomSource base(5200 + rep, 0);
        RandomSource arr_rng = base.fork("arrivals");
        const ArrivalSequence arr = sample_arrivals(pinst.base.lambda, T, arr_rng);
        GpPricingPolicy pol(pinst, cfg, base.fork("policy"));
        auditor.add(run_pricing_policy(pol, pinst, arr));
    }
    const PriceFairnessReport report = auditor.finalize();
    CHECK(report.pass);
}

TEST_CASE("finite offers per type after the trigger are geometric") {
    const int T = 600;
    PricingInstance pinst = testsupport::pricing_fixture(T, 0.15);
    const double alpha = 0.4;
    const GraceConfig cfg = GraceConfig::make(alpha, 1.0 / T);
    std::vector<int> finite_offers;
    for (int rep = 0; rep < 4000; ++rep) {
        RandomSource base(7100 + rep, 0);
        RandomSource arr_rng = base.fork("arrivals");
        const ArrivalSequence arr = sample_arrivals(pinst.base.lambda, T, arr_rng);
        GpPricingPolicy pol(pinst, cfg, base.fork("policy"));
        const PriceTrace tr = run_pricing_policy(pol, pinst, arr);
        if (tr.depleted || pol.trigger_round() == 0) continue;
        // Finite offers per type from the trigger until the absorbing
        // infinity; right-censored runs (no infinity seen) are dropped.
        std::vector<int> finite(static_cast<std::size_t>(pinst.base.n), 0);
        std::vector<bool> closed(static_cast<std::size_t>(pinst.base.n), false);
        for (const PriceEvent& ev : tr.events) {
            if (ev.type == 0 || ev.t < pol.trigger_round()) continue;
            const std::size_t i = static_cast<std::size_t>(ev.type - 1);
            if (closed[i]) continue;
            if (ev.offered == kInf)
                closed[i] = true;
            else
                finite[i]++;
        }
        for (int i = 0; i < pinst.base.n; ++i)
            if (closed[static_cast<std::size_t>(i)])
                finite_offers.push_back(finite[static_cast<std::size_t>(i)]);
    }
    REQUIRE(finite_offers.size() > 3000);
    const double d = testsupport::ks_statistic_geometric(finite_offers, alpha);
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(finite_offers.size())) + 0.01);
}

TEST_CASE("price trace csv uses the inf sentinel") {
    PricingInstance pinst = testsupport::pricing_fixture(2, 0.0);
    StaticPricingPolicy pol(pinst, RandomSource(1, 0));
    const PriceTrace tr = run_pricing_policy(pol, pinst, fixed({1, 2}, 2));
    const std::string csv = price_trace_to_csv(tr);
    CHECK(csv.find(",inf,") != std::string::npos);
}
