#include "nsolab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace nsolab::analysis {

namespace {

double phi(double t) { return std::tan(t) - 0.5 * t; }

double bisect_root(std::size_t k) {
    const double pi = std::numbers::pi;
    double lo = pi / 2.0 + static_cast<double>(k) * pi;
    double hi = lo + pi;
    lo = std::nextafter(lo, hi);
    hi = std::nextafter(hi, lo);
    // phi increases from -inf to +inf across the period.
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (phi(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return std::abs(phi(lo)) <= std::abs(phi(hi)) ? lo : hi;
}

}  // namespace

SinCriticalTable sin_critical_points(std::size_t k_max) {
    if (k_max < 1) throw PreconditionError("sin_critical_points: k_max must be at least 1");
    SinCriticalTable table;
    for (std::size_t k = 0; k < k_max; ++k) {
        const double t = bisect_root(k);
        table.roots.push_back(t);
        table.critical_points.push_back(1.0 / t);
        const double curvature = std::cos(t) * (-t - t * t * t / 2.0);
        table.second_deriv_signs.push_back(curvature > 0.0 ? 1 : -1);
        table.residuals.push_back(std::abs(phi(t)));
    }
    return table;
}

SinStabilityConstants sin_stability_constants(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw PreconditionError("sin_stability_constants: epsilon must lie in (0, 1/2)");
    SinStabilityConstants out;
    out.epsilon = epsilon;
    std::size_t k_max = 8;
    for (;;) {
        const SinCriticalTable table = sin_critical_points(k_max);
        std::size_t N = k_max;
        for (std::size_t k = 0; k < table.size(); ++k) {
            if (table.critical_points[k] <= epsilon) {
                N = k;
                break;
            }
        }
        const std::size_t adjusted_N = N % 2 == 0 ? N : N + 1;
        if (N == k_max || adjusted_N + 3 >= table.size()) {
            k_max *= 2;
            continue;
        }
        const auto& c = table.critical_points;
        out.raw_N = N;
        out.N = adjusted_N;
        out.adjusted = adjusted_N != N;
        out.effective_epsilon = c[adjusted_N];
        out.delta = c[adjusted_N + 2];
        out.alpha_bar = 0.5 * std::min({c[adjusted_N] - c[adjusted_N + 1], c[adjusted_N + 1] - c[adjusted_N + 2],
                                        c[adjusted_N + 2] - c[adjusted_N + 3]});
        return out;
    }
}

WeakConvexityWitness strict2d_mod_witness(double rho) {
    if (!(rho > 0.0)) throw PreconditionError("strict2d_mod_witness: rho must be positive");
    WeakConvexityWitness w;
    w.rho = rho;
    const double x1 = std::cbrt(9.0) / (rho * rho);
    const double x2 = 8.0 / (rho * rho * rho);
    w.x = {x1, x2};
    w.s = {-27.0 * std::sqrt(x1), 12.0};
    w.closed_form_gap = (27.0 - std::pow(3.0, 4.0 / 3.0) / 2.0 - 32.0 / (rho * rho)) / (rho * rho * rho);
    return w;
}

Point strict2d_segment_end(double epsilon) {
    if (!(epsilon > 0.0)) throw PreconditionError("strict2d_segment_end: epsilon must be positive");
    const double e2 = epsilon * epsilon;
    return {std::sqrt(-9.0 / 128.0 + std::sqrt(81.0 / 16384.0 + 9.0 * e2 / 64.0)),
            -3.0 / 16.0 + std::sqrt(9.0 / 256.0 + e2)};
}

std::string sin_table_csv(const SinCriticalTable& table) {
    std::ostringstream os;
    os << "k,t_k,inv_t_k,sign\n";
    char buf[128];
    for (std::size_t k = 0; k < table.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%c\n", k, table.roots[k], table.critical_points[k],
                      table.second_deriv_signs[k] > 0 ? '+' : '-');
        os << buf;
    }
    return os.str();
}

}  // namespace nsolab::analysis
