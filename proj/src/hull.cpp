#include "nsolab/hull.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>

namespace nsolab {
namespace {

struct AffineSolution {
    bool ok = false;
    std::vector<double> weights;  // over the subset, summing to 1
    Point point;
};

// Least-norm point of the affine hull of {g_i : i in idx}. Fails when the
// subset is affinely dependent.
AffineSolution affine_min_norm(const std::vector<Point>& g, const std::vector<std::size_t>& idx) {
    AffineSolution out;
    const std::size_t n = g[idx[0]].size();
    const std::size_t m = idx.size();
    const Point& g0 = g[idx[0]];
    if (m == 1) {
        out.ok = true;
        out.weights = {1.0};
        out.point = g0;
        return out;
    }
    Eigen::MatrixXd D(n, m - 1);
    Eigen::VectorXd b(n);
    double scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        b(r) = -g0[r];
        for (std::size_t c = 1; c < m; ++c) {
            D(r, c - 1) = g[idx[c]][r] - g0[r];
            scale = std::max(scale, std::abs(D(r, c - 1)));
        }
    }
    if (scale == 0.0) return out;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    qr.setThreshold(1e-12);
    if (qr.rank() < static_cast<Eigen::Index>(m - 1)) return out;
    const Eigen::VectorXd mu = qr.solve(b);
    out.weights.assign(m, 0.0);
    double rest = 1.0;
    for (std::size_t c = 1; c < m; ++c) {
        out.weights[c] = mu(static_cast<Eigen::Index>(c - 1));
        rest -= out.weights[c];
    }
    out.weights[0] = rest;
    out.point.assign(n, 0.0);
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t r = 0; r < n; ++r) out.point[r] += out.weights[c] * g[idx[c]][r];
    out.ok = true;
    return out;
}

HullPoint expand(const std::vector<Point>& g, const std::vector<std::size_t>& idx,
                 const std::vector<double>& w) {
    HullPoint hp;
    const std::size_t n = g.front().size();
    hp.weights.assign(g.size(), 0.0);
    hp.point.assign(n, 0.0);
    for (std::size_t c = 0; c < idx.size(); ++c) {
        hp.weights[idx[c]] += w[c];
        for (std::size_t r = 0; r < n; ++r) hp.point[r] += w[c] * g[idx[c]][r];
    }
    hp.norm = norm(hp.point);
    return hp;
}

void require_nonempty(const std::vector<Point>& g) {
    if (g.empty()) throw std::invalid_argument("convex hull of an empty generator list");
    for (const auto& p : g)
        if (p.size() != g.front().size())
            throw std::invalid_argument("generators have mismatched dimensions");
}

}  // namespace

std::vector<Point> unique_points(std::vector<Point> pts) {
    std::vector<Point> out;
    out.reserve(pts.size());
    for (auto& p : pts)
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    return out;
}

HullPoint min_norm_face_enumeration(const std::vector<Point>& g) {
    require_nonempty(g);
    const std::size_t m = g.size();
    const std::size_t dim = g.front().size();
    const std::size_t max_face = std::min(m, dim + 1);

    HullPoint best;
    best.norm = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx;

    for (std::size_t k = 1; k <= max_face; ++k) {
        // Enumerate k-subsets in lexicographic order.
        std::vector<bool> mask(m, false);
        std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
        do {
            idx.clear();
            for (std::size_t i = 0; i < m; ++i)
                if (mask[i]) idx.push_back(i);
            AffineSolution s = affine_min_norm(g, idx);
            if (!s.ok) continue;
            bool feasible = true;
            for (double w : s.weights)
                if (w < -1e-12) feasible = false;
            if (!feasible) continue;
            double total = 0.0;
            for (double& w : s.weights) {
                w = std::max(w, 0.0);
                total += w;
            }
            for (double& w : s.weights) w /= total;
            HullPoint hp = expand(g, idx, s.weights);
            if (hp.norm < best.norm) best = std::move(hp);
        } while (std::prev_permutation(mask.begin(), mask.end()));
    }
    return best;
}

HullPoint wolfe_min_norm_point(const std::vector<Point>& g, double tol, std::size_t max_iter) {
    require_nonempty(g);
    const std::size_t m = g.size();

    std::size_t start = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (norm2(g[i]) < norm2(g[start])) start = i;

    std::vector<std::size_t> S{start};
    std::vector<double> lambda{1.0};
    Point x = g[start];

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::size_t j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double v = dot(x, g[i]);
            if (v < best) {
                best = v;
                j = i;
            }
        }
        double gmax = 0.0;
        for (std::size_t i : S) gmax = std::max(gmax, norm2(g[i]));
        gmax = std::max(gmax, norm2(g[j]));
        if (norm2(x) - best <= tol * gmax) break;
        if (std::find(S.begin(), S.end(), j) != S.end()) break;
        S.push_back(j);
        lambda.push_back(0.0);

        for (;;) {
            AffineSolution s = affine_min_norm(g, S);
            if (!s.ok) {
                // Degenerate corral: drop the newest point and stop.
                S.pop_back();
                lambda.pop_back();
                iter = max_iter;
                break;
            }
            bool interior = true;
            for (double w : s.weights)
                if (w <= 1e-15) interior = false;
            if (interior) {
                lambda = s.weights;
                x = s.point;
                break;
            }
            double theta = 1.0;
            for (std::size_t c = 0; c < S.size(); ++c) {
                if (s.weights[c] <= 1e-15) {
                    const double den = lambda[c] - s.weights[c];
                    if (den > 0.0) theta = std::min(theta, lambda[c] / den);
                }
            }
            for (std::size_t c = 0; c < S.size(); ++c)
                lambda[c] = theta * s.weights[c] + (1.0 - theta) * lambda[c];
            std::vector<std::size_t> S2;
            std::vector<double> l2;
            for (std::size_t c = 0; c < S.size(); ++c) {
                if (lambda[c] > 1e-15) {
                    S2.push_back(S[c]);
                    l2.push_back(lambda[c]);
                }
            }
            if (S2.empty()) {
                S2.push_back(j);
                l2.push_back(1.0);
            }
            S = std::move(S2);
            lambda = std::move(l2);
            const double total = std::accumulate(lambda.begin(), lambda.end(), 0.0);
            for (double& l : lambda) l /= total;
            x = expand(g, S, lambda).point;
        }
    }
    return expand(g, S, lambda);
}

HullPoint min_norm_in_hull(const std::vector<Point>& g) {
    require_nonempty(g);
    if (g.size() == 1) return expand(g, {0}, {1.0});
    if (g.size() <= 8 && g.front().size() <= 4) return min_norm_face_enumeration(g);
    return wolfe_min_norm_point(g);
}

double distance_to_hull(const Point& p, const std::vector<Point>& generators) {
    std::vector<Point> shifted;
    shifted.reserve(generators.size());
    for (const auto& q : generators) shifted.push_back(sub(q, p));
    return min_norm_in_hull(shifted).norm;
}

}  // namespace nsolab
