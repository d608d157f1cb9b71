#pragma once

#include <cstddef>
#include <vector>

#include "nsolab/types.hpp"

namespace nsolab {

/// Minimum-norm point of a convex hull with its barycentric weights.
struct HullPoint {
    Point point;
    std::vector<double> weights;  // one per input generator, summing to 1
    double norm = 0.0;
};

/// Exact min-norm point of conv(generators) by enumerating every affinely
/// independent subset of at most dim+1 generators and solving the affine
/// least-norm system on each face. Intended for small generator lists.
HullPoint min_norm_face_enumeration(const std::vector<Point>& generators);

/// Wolfe's minimum-norm-point algorithm. Works for any number of generators;
/// `tol` is the relative optimality tolerance of the major-cycle test.
HullPoint wolfe_min_norm_point(const std::vector<Point>& generators, double tol = 1e-12,
                               std::size_t max_iter = 10000);

/// Dispatches to face enumeration for short lists and to Wolfe otherwise.
HullPoint min_norm_in_hull(const std::vector<Point>& generators);

/// Euclidean distance from `p` to conv(generators).
double distance_to_hull(const Point& p, const std::vector<Point>& generators);

/// Drops exact duplicates, preserving first occurrence order.
std::vector<Point> unique_points(std::vector<Point> pts);

}  // namespace nsolab
