#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace fairrm {

// Deterministic seedable random source. One stream per (seed, stream_id)
// pair; streams are statistically independent and bit-identical across
// platforms, which the common-random-numbers coupling between base and
// grace-period policies relies on. We do not use <random> distributions
// because their output is implementation-defined.
class RandomSource {
public:
    RandomSource() : RandomSource(0, 0) {}
    RandomSource(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id),
          state_(mix(mix(seed ^ 0x9e3779b97f4a7c15ull) + stream_id)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, 1), 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_below: n must be > 0");
        // multiply-shift; bias is < 2^-64 * n, negligible for our n
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Draws index in [0, weights.size()) proportional to weights; weights
    // need not be normalized.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    int binomial(int trials, double p) {
        if (trials < 0) throw std::invalid_argument("binomial: trials < 0");
        if (p <= 0.0) return 0;
        if (p >= 1.0) return trials;
        int k = 0;
        for (int i = 0; i < trials; ++i)
            if (bernoulli(p)) ++k;
        return k;
    }

    // Number of successes before the first failure, failure probability p.
    int geometric_runs(double p) {
        int k = 0;
        while (!bernoulli(p)) ++k;
        return k;
    }

    // Independent child stream, stable under the parent's draw position.
    RandomSource fork(std::string_view tag) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ull;
        }
        return RandomSource(seed_, mix(stream_id_ ^ h));
    }

    RandomSource fork(std::uint64_t tag) const {
        return RandomSource(seed_, mix(stream_id_ + 0x632be59bd9b4e019ull * (tag + 1)));
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
};

}  // namespace fairrm
