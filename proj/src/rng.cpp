#include "nsolab/rng.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace nsolab {

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n <= 1) return 0;
    // Largest multiple of n that fits; reject the tail.
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    for (;;) {
        const std::uint64_t v = next_u64();
        if (v < limit) return v % n;
    }
}

double CounterRng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> CounterRng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(below(i));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

Point CounterRng::direction(std::size_t n) {
    Point d(n);
    double s = 0.0;
    do {
        for (auto& v : d) v = normal();
        s = norm(d);
    } while (s == 0.0);
    for (auto& v : d) v /= s;
    return d;
}

Point CounterRng::in_ball(const Point& center, double radius) {
    const std::size_t n = center.size();
    Point d = direction(n);
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) d[i] = center[i] + r * d[i];
    return d;
}

Point CounterRng::in_box(const Point& lo, const Point& hi) {
    Point x(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
    return x;
}

}  // namespace nsolab
