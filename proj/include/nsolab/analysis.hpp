#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nsolab/types.hpp"

namespace nsolab::analysis {

/// Roots t_k of tan(t) = t/2, one per interval (pi/2 + k pi, pi/2 + (k+1) pi),
/// and the matching critical points 1/t_k of x^2 sin(1/x).
struct SinCriticalTable {
    std::vector<double> roots;
    std::vector<double> critical_points;
    std::vector<int> second_deriv_signs;  // +1 local minimum, -1 local maximum
    std::vector<double> residuals;        // |tan(t_k) - t_k / 2|

    std::size_t size() const { return roots.size(); }
};

/// Bisection on tan(t) - t/2 inside each period, capped at 200 iterations.
SinCriticalTable sin_critical_points(std::size_t k_max);

struct SinStabilityConstants {
    std::size_t N = 0;                // index of the greatest critical point used
    double delta = 0.0;               // 1 / t_{N+2}
    double alpha_bar = 0.0;           // half the smallest of the three gaps after 1/t_N
    double epsilon = 0.0;             // requested
    double effective_epsilon = 0.0;   // 1/t_N, which is <= epsilon
    bool adjusted = false;            // N was odd and moved to the next even index
    std::size_t raw_N = 0;
};

/// Requires 0 < epsilon < 1/2.
SinStabilityConstants sin_stability_constants(double epsilon);

/// Point (3^{2/3}/rho^2, 8/rho^3) with subgradient (-27 |x_1|^{1/2}, 12) for
/// the |x_1|^{3/2} variant of strict2d.
struct WeakConvexityWitness {
    Point x;
    Point s;
    double rho = 0.0;
    double closed_form_gap = 0.0;  // (27 - 3^{4/3}/2 - 32/rho^2) / rho^3
};

WeakConvexityWitness strict2d_mod_witness(double rho);

/// Start of the boundary-exit segment for strict2d: the point (a, b) on the
/// circle of radius epsilon where both pieces agree.
Point strict2d_segment_end(double epsilon);

/// CSV with header k,t_k,inv_t_k,sign.
std::string sin_table_csv(const SinCriticalTable& table);

}  // namespace nsolab::analysis
