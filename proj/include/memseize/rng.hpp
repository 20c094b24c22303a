#pragma once

#include <cmath>
#include <cstdint>

namespace memseize {

/// Seeded SplitMix64 stream with Box-Muller normal draws.
///
/// Every normal draw consumes exactly two uniforms and keeps no cached
/// variate, so a stream can be partitioned per cell index via derive()
/// and replayed identically on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    double next_normal(double mean, double stddev) {
        double u1 = next_double();
        const double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(kTwoPi * u2);
    }

    /// Independent substream keyed by `key`; does not advance this stream.
    Rng derive(std::uint64_t key) const {
        Rng sub(state_ ^ (0x9e3779b97f4a7c15ull + key * 0xd1342543de82ef95ull));
        sub.next_u64();
        return sub;
    }

private:
    static constexpr double kTwoPi = 6.283185307179586476925286766559;
    std::uint64_t state_;
};

}  // namespace memseize
