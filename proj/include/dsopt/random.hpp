#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace dsopt {

/// Stream purposes used when deriving independent random streams from a run seed.
enum class StreamPurpose : std::uint64_t {
    init = 1,
    ensemble = 2,
    gradient = 3,
    predict = 4,
    data = 5,
    inner = 6,
    baseline = 7,
    oracle = 8,
};

/// Seeded random stream. Wraps mt19937_64 and draws every variate from its raw
/// 64-bit output, so results do not depend on the standard library's
/// implementation-defined distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream keyed by (seed, path...). Used for per-draw streams so
    /// concurrent sampling is reproducible regardless of scheduling.
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal();

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline Rng derive_stream(std::uint64_t seed, std::uint64_t step, StreamPurpose purpose,
                         std::uint64_t index) {
    return Rng::derive(seed, {step, static_cast<std::uint64_t>(purpose), index});
}

}  // namespace dsopt
