#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace alp {

// Stream-purpose tags mixed into every key so that task, rollout and
// evaluation draws never share a stream.
enum class StreamTag : std::uint64_t {
    train_task = 0x7461736bULL,
    train_rollout = 0x726f6c6cULL,
    eval_task = 0x65766174ULL,
    eval_rollout = 0x6576726fULL,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based random stream.
///
/// A stream is identified by a key hashed from (seed, tag, counters...), so
/// the draws for a given task or rollout depend only on its coordinates and
/// never on evaluation order or worker count. The generator itself is
/// SplitMix64; floating-point conversions are done here rather than through
/// <random> distributions, whose output is implementation-defined.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t key) : state_(splitmix64(key)) {}

    static RandomStream derive(std::uint64_t seed, StreamTag tag,
                               std::initializer_list<std::uint64_t> counters) {
        std::uint64_t k = splitmix64(seed ^ 0x5bd1e9955bd1e995ULL);
        k = splitmix64(k ^ static_cast<std::uint64_t>(tag));
        for (std::uint64_t c : counters) k = splitmix64(k ^ splitmix64(c));
        return RandomStream(k);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller; one normal per call, the paired value is discarded so each
    // call consumes exactly two uniforms.
    double normal(double mean = 0.0, double sd = 1.0) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace alp
