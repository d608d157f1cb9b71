#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "nsolab/types.hpp"

namespace nsolab {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

/// Seed for the sub-stream `index` of `seed` (probe cells, trials, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Counter-based 64-bit generator: draw i is mix64(key + i * golden), with
/// key derived from (seed, stream). Output depends only on integer arithmetic,
/// so integer draws and uniforms are identical on every platform.
///
/// Normal draws go through std::log/std::cos and are only as portable as libm.
class CounterRng {
public:
    static constexpr std::string_view kName = "ctr64-v1";

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed ^ mix64(stream ^ 0xd1b54a32d192ed03ULL))) {}

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection-sampled so it is unbiased.
    std::uint64_t below(std::uint64_t n);

    double normal();

    /// Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
    std::vector<std::size_t> permutation(std::size_t n);

    /// Uniform sample from the closed Euclidean ball B(center, radius).
    Point in_ball(const Point& center, double radius);

    /// Uniform sample from the axis-aligned box [lo, hi].
    Point in_box(const Point& lo, const Point& hi);

    /// Uniform direction on the unit sphere of R^n.
    Point direction(std::size_t n);

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace nsolab
