#include <doctest.h>

#include <cmath>

#include "fairrm/instance.hpp"
#include "support/fixtures.hpp"

using namespace fairrm;

TEST_CASE("validate_instance accepts a well-formed instance") {
    const Instance inst = testsupport::scarcity_3x2();
    const ValidationReport rep = validate_instance(inst);
    CHECK(rep.ok);
    CHECK(rep.violations.empty());
}

TEST_CASE("validate_instance flags an unnormalized lambda") {
    Instance inst = testsupport::single_type(100, 0.5, 0.5);
    inst.lambda = {0.4, 0.5};  // sums to 0.9
    const ValidationReport rep = validate_instance(inst);
    CHECK_FALSE(rep.ok);
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.find("lambda not normalized") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate_instance flags a nonpositive reward") {
    Instance inst = testsupport::single_type(100, 0.5, 0.5);
    inst.r = {-1.0};
    const ValidationReport rep = validate_instance(inst);
    CHECK_FALSE(rep.ok);
    bool found = false;
    for (const auto& v : rep.violations)
        if (v.find("reward must be positive") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validate_instance checks m against q * m_scale") {
    Instance inst = testsupport::scarcity_3x2();
    inst.m[0] += 1.0;
    CHECK_FALSE(validate_instance(inst).ok);
}

TEST_CASE("abar and alow span the nonzero demand entries") {
    const Instance inst = testsupport::scarcity_3x2();
    CHECK(inst.abar() == doctest::Approx(0.5));
    CHECK(inst.alow() == doctest::Approx(0.25));
}

TEST_CASE("sample_arrivals degenerate distributions") {
    RandomSource rng(1, 0);
    const ArrivalSequence sure = sample_arrivals({0.0, 1.0}, 5, rng);
    CHECK(sure.events == std::vector<int>{1, 1, 1, 1, 1});
    CHECK(sure.counts[0] == 5);

    const ArrivalSequence none = sample_arrivals({1.0, 0.0}, 5, rng);
    CHECK(none.events == std::vector<int>{0, 0, 0, 0, 0});
    CHECK(none.counts[0] == 0);
}

TEST_CASE("sample_arrivals rejects an unnormalized lambda") {
    RandomSource rng(1, 0);
    CHECK_THROWS_AS(sample_arrivals({0.5, 0.4}, 10, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_arrivals({0.5, 0.5}, 0, rng), std::invalid_argument);
}

TEST_CASE("sample_arrivals frequency lands in the binomial band") {
    RandomSource rng(7, 0);
    const int T = 100000;
    const ArrivalSequence arr = sample_arrivals({0.5, 0.5}, T, rng);
    const double rate = static_cast<double>(arr.counts[0]) / T;
    CHECK(rate > 0.495);
    CHECK(rate < 0.505);
}

TEST_CASE("sample_arrivals is reproducible per (seed, stream)") {
    RandomSource a(99, 5), b(99, 5);
    const ArrivalSequence x = sample_arrivals({0.2, 0.3, 0.5}, 1000, a);
    const ArrivalSequence y = sample_arrivals({0.2, 0.3, 0.5}, 1000, b);
    CHECK(x.events == y.events);
}

TEST_CASE("replicated arrival counts concentrate around lambda T") {
    const double lam = 0.3;
    const int T = 400, R = 200;
    double sum = 0.0;
    for (int rep = 0; rep < R; ++rep) {
        RandomSource rng(17, static_cast<std::uint64_t>(rep));
        sum += sample_arrivals({1 - lam, lam}, T, rng).counts[0];
    }
    const double mean = sum / R;
    const double band = 4.0 * std::sqrt(lam * (1 - lam) * T / R);
    CHECK(std::abs(mean - lam * T) < band);
}

TEST_CASE("scale_instance follows q and the horizon ratio") {
    Instance templ;
    templ.n = 1;
    templ.L = 2;
    templ.A = {{1.0, 1.0}};
    templ.r = {1.0};
    templ.q = {1.0, 2.0};
    templ.m = {1.0, 2.0};
    templ.m_scale = 1.0;
    templ.T = 4;
    templ.lambda = {0.0, 1.0};

    const Instance scaled = scale_instance(templ, 100.0, 4.0);
    CHECK(scaled.m == Vec{100.0, 200.0});
    CHECK(scaled.T == 400);

    const Instance half = scale_instance(templ, 50.0, 4.0);
    CHECK(half.T == 200);

    Instance one_res = testsupport::single_type(10, 1.0, 0.5);
    one_res.q = {0.5};
    const Instance small = scale_instance(one_res, 10.0, 4.0);
    CHECK(small.m == Vec{5.0});

    CHECK_THROWS_AS(scale_instance(templ, 0.0, 4.0), std::invalid_argument);
}

TEST_CASE("scale_instance is linear in m_scale") {
    const Instance base = testsupport::scarcity_3x2();
    const Instance a = scale_instance(base, 30.0, 4.0);
    const Instance b = scale_instance(base, 60.0, 4.0);
    for (int j = 0; j < base.L; ++j)
        CHECK(b.m[static_cast<std::size_t>(j)] == 2.0 * a.m[static_cast<std::size_t>(j)]);
}

TEST_CASE("arrivals round-trip through csv") {
    RandomSource rng(3, 1);
    const ArrivalSequence arr = sample_arrivals({0.2, 0.5, 0.3}, 50, rng);
    const ArrivalSequence back = arrivals_from_csv(arrivals_to_csv(arr), 2);
    CHECK(back.events == arr.events);
    CHECK(back.counts == arr.counts);
}
