#pragma once

// Seeded random streams shared by every generator in the library. //

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace critesn {

/// Well-known stream ids so that independent consumers never share draws.
namespace stream {
inline constexpr std::uint64_t input = 0;
inline constexpr std::uint64_t initial_state = 1;
inline constexpr std::uint64_t direction = 2;
inline constexpr std::uint64_t weights = 3;
inline constexpr std::uint64_t transfers = 4;
inline constexpr std::uint64_t input_weights = 5;
}  // namespace stream

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Reproducible 64-bit generator with one independent stream per (seed, stream id).
///
/// The engine is std::mt19937_64 seeded with splitmix64(seed ^ splitmix64(stream)).
/// Everything derived from it uses explicit bit manipulation rather than the
/// standard distributions, whose output is implementation defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : engine_{splitmix64(seed ^ splitmix64(stream_id))}
    {
    }

    std::uint64_t bits() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Fair +1/-1 taken from the top bit.
    double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

    /// Standard normal via Box-Muller (no caching of the second variate).
    double normal()
    {
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace critesn
