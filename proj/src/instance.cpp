#include "fairrm/instance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairrm {

double Instance::abar() const {
    double hi = 0.0;
    for (const auto& row : A)
        for (double a : row) hi = std::max(hi, a);
    return hi;
}

double Instance::alow() const {
    double lo = 0.0;
    bool seen = false;
    for (const auto& row : A)
        for (double a : row)
            if (a > 0.0) {
                lo = seen ? std::min(lo, a) : a;
                seen = true;
            }
    return seen ? lo : 0.0;
}

double Instance::rbar() const {
    double hi = 0.0;
    for (double x : r) hi = std::max(hi, x);
    return hi;
}

ValidationReport validate_instance(const Instance& inst) {
    ValidationReport rep;
    auto fail = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back(msg);
    };

    if (inst.n <= 0) fail("n must be positive");
    if (inst.L <= 0) fail("L must be positive");
    if (inst.T <= 0) fail("T must be positive");

    if (static_cast<int>(inst.A.size()) != inst.n) {
        fail("A must have n rows");
    } else {
        for (int i = 0; i < inst.n; ++i) {
            if (static_cast<int>(inst.A[i].size()) != inst.L) {
                fail("A row " + std::to_string(i + 1) + " must have L entries");
                continue;
            }
            for (int j = 0; j < inst.L; ++j)
                if (inst.A[i][j] < 0.0)
                    fail("A[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                         "] must be nonnegative");
        }
    }

    if (static_cast<int>(inst.r.size()) != inst.n) {
        fail("r must have n entries");
    } else {
        for (int i = 0; i < inst.n; ++i)
            if (!(inst.r[i] > 0.0)) fail("reward must be positive (r_" + std::to_string(i + 1) + ")");
    }

    if (static_cast<int>(inst.m.size()) != inst.L) {
        fail("m must have L entries");
    } else {
        for (int j = 0; j < inst.L; ++j)
            if (inst.m[j] < 0.0) fail("capacity must be nonnegative (m_" + std::to_string(j + 1) + ")");
    }

    if (static_cast<int>(inst.lambda.size()) != inst.n + 1) {
        fail("lambda must have n+1 entries (index 0 = no arrival)");
    } else {
        double sum = 0.0;
        for (double l : inst.lambda) {
            if (l < 0.0) fail("arrival probabilities must be nonnegative");
            sum += l;
        }
        if (std::abs(sum - 1.0) > 1e-12) fail("lambda not normalized");
    }

    if (!inst.q.empty()) {
        if (static_cast<int>(inst.q.size()) != inst.L) {
            fail("q must have L entries");
        } else {
            for (int j = 0; j < inst.L; ++j)
                if (inst.m[j] != inst.q[j] * inst.m_scale)
                    fail("m_" + std::to_string(j + 1) + " != q_" + std::to_string(j + 1) +
                         " * m_scale");
        }
    }

    return rep;
}

Instance scale_instance(const Instance& templ, double m_scale, double horizon_ratio) {
    if (!(m_scale > 0.0)) throw std::invalid_argument("scale_instance: m_scale must be > 0");
    Instance out = templ;
    out.q = templ.q.empty() ? templ.m : templ.q;
    out.m_scale = m_scale;
    out.m.resize(out.q.size());
    for (std::size_t j = 0; j < out.q.size(); ++j) out.m[j] = out.q[j] * m_scale;
    out.T = static_cast<int>(std::llround(horizon_ratio * m_scale));
    return out;
}

ArrivalSequence make_arrival_sequence(std::vector<int> events, int n) {
    ArrivalSequence arr;
    arr.counts.assign(static_cast<std::size_t>(n), 0);
    for (int e : events) {
        if (e < 0 || e > n) throw std::invalid_argument("arrival type out of range");
        if (e > 0) arr.counts[static_cast<std::size_t>(e - 1)]++;
    }
    arr.events = std::move(events);
    return arr;
}

ArrivalSequence sample_arrivals(const Vec& lambda, int T, RandomSource& rng) {
    if (T < 1) throw std::invalid_argument("sample_arrivals: T must be >= 1");
    double sum = 0.0;
    for (double l : lambda) {
        if (l < 0.0) throw std::invalid_argument("sample_arrivals: negative probability");
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("sample_arrivals: lambda not normalized");

    const int n = static_cast<int>(lambda.size()) - 1;
    std::vector<int> events(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        double u = rng.next_double();
        double acc = 0.0;
        int who = n;  // guard against rounding at the top end
        for (int i = 0; i <= n; ++i) {
            acc += lambda[static_cast<std::size_t>(i)];
            if (u < acc) {
                who = i;
                break;
            }
        }
        events[static_cast<std::size_t>(t)] = who;
    }
    return make_arrival_sequence(std::move(events), n);
}

std::string arrivals_to_csv(const ArrivalSequence& arr) {
    std::ostringstream os;
    os << "round,type\n";
    for (std::size_t t = 0; t < arr.events.size(); ++t)
        os << (t + 1) << ',' << arr.events[t] << '\n';
    return os.str();
}

ArrivalSequence arrivals_from_csv(const std::string& csv, int n) {
    std::istringstream is(csv);
    std::string line;
    std::vector<int> events;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("bad arrivals csv line: " + line);
        events.push_back(std::stoi(line.substr(comma + 1)));
    }
    return make_arrival_sequence(std::move(events), n);
}

}  // namespace fairrm
