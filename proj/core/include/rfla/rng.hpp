#pragma once

// Portable seeded generator for the Monte-Carlo harness.
//
// SplitMix64 (Steele, Lea & Flood) produces the same sequence on every
// platform, and doubles are built from the top 53 bits so no standard
// library distribution (whose output is implementation-defined) is involved.
//
// Stream splitting: draw i of a run with seed s uses the generator whose
// state is mix64(s ^ mix64(i + 1)). Streams are independent of how many
// draws exist, so appending trials never changes earlier ones.

#include <cstdint>

namespace rfla {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    /// Generator for the `index`-th independent stream of `seed`.
    static constexpr SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept {
        return SplitMix64(mix64(seed ^ mix64(index + 1)));
    }

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    /// Uniform in [0, 1).
    constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

}  // namespace rfla
