#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsolab/hull.hpp"
#include "nsolab/methods.hpp"
#include "nsolab/oracles.hpp"
#include "nsolab/rng.hpp"
#include "reference.hpp"

namespace nsolab::testing {
namespace {

std::string point_str(const Point& x) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

std::uint64_t seed_of(const std::string& id) {
    std::uint64_t h = 0;
    for (unsigned char c : id) h = mix64(h ^ c);
    return h;
}

void record(SuiteResult& r, double err, const std::string& where) {
    ++r.checks;
    r.worst = std::max(r.worst, err);
    if (!(err <= r.tolerance) && r.pass) {
        r.pass = false;
        r.failure = where;
    }
}

std::vector<SubgradientSelection> all_rules() {
    return {SubgradientSelection::min_norm(), SubgradientSelection::sign(),
            SubgradientSelection::random_extreme(11), SubgradientSelection::random_extreme(12345)};
}

}  // namespace

SuiteResult membership_suite(std::size_t points_per_entry) {
    SuiteResult r{"subgradient membership", true, 0, 0.0, 1e-10, {}};
    for (const auto& id : catalog_ids()) {
        const auto spec = catalog_get(id);
        if (!spec.has_generators()) continue;
        CounterRng rng(derive_seed(0x6d656d, seed_of(id)));
        for (std::size_t k = 0; k < points_per_entry; ++k) {
            const Point x = k % 2 == 0 ? sample_point(spec, rng) : sample_kink(spec, rng);
            const auto gens = spec.generators(x);
            for (const auto& sel : all_rules()) {
                const Point g = subgradient_select(spec, x, sel);
                record(r, ref_hull_distance(g, gens),
                       id + " rule " + to_string(sel.rule) + " at " + point_str(x));
            }
            const auto mn = min_norm_subgradient(spec, x);
            record(r, distance(mn.vector, ref_min_norm(gens)), id + " min-norm point at " + point_str(x));
        }
    }
    return r;
}

SuiteResult finite_difference_suite(std::size_t points_per_entry) {
    SuiteResult r{"finite-difference consistency", true, 0, 0.0, 1e-4, {}};
    for (const auto& id : catalog_ids()) {
        const auto spec = catalog_get(id);
        CounterRng rng(derive_seed(0x6664, seed_of(id)));
        std::size_t found = 0;
        for (std::size_t tries = 0; found < points_per_entry && tries < 200 * points_per_entry; ++tries) {
            const Point x = sample_point(spec, rng);
            if (!ref_smooth(spec, x, 1e-3)) continue;
            ++found;
            const Point fd = fd_gradient([&](const Point& z) { return ref_value(spec, z); }, x);
            const double scale = std::max(1.0, norm(fd));
            for (const auto& sel : all_rules()) {
                const Point g = subgradient_select(spec, x, sel);
                record(r, distance(g, fd) / scale, id + " rule " + to_string(sel.rule) + " at " + point_str(x));
            }
            record(r, distance(ref_gradient(spec, x), fd) / scale, id + " reference gradient at " + point_str(x));
            if (spec.has_gradient())
                record(r, distance(spec.gradient(x), fd) / scale, id + " gradient oracle at " + point_str(x));
            record(r, std::abs(spec.value(x) - ref_value(spec, x)) / std::max(1.0, std::abs(ref_value(spec, x))),
                   id + " value at " + point_str(x));
        }
        if (found < points_per_entry) {
            r.pass = false;
            r.failure = id + ": too few smooth samples";
        }
    }
    return r;
}

SuiteResult min_norm_bruteforce_suite(std::size_t cases) {
    SuiteResult r{"min-norm brute-force equivalence", true, 0, 0.0, 1e-4, {}};
    CounterRng rng(0x6d6e, 1);
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t m = 2 + c % 2;
        const std::size_t n = 2 + (c / 2) % 2;
        std::vector<Point> gens(m, Point(n));
        const Point shift = rng.in_ball(Point(n, 0.0), 1.5);
        for (auto& g : gens)
            for (std::size_t i = 0; i < n; ++i) g[i] = shift[i] + rng.uniform(-1.0, 1.0);
        const double lib = min_norm_in_hull(gens).norm;
        const double wolfe = wolfe_min_norm_point(gens).norm;
        const double brute = brute_force_min_norm(gens, 10000, rng);
        const std::string where = "hull of " + std::to_string(m) + " points in R^" + std::to_string(n);
        record(r, std::abs(lib - brute), where + " (face enumeration)");
        record(r, std::abs(wolfe - brute), where + " (Wolfe)");
        // Sampling never beats the exact minimum.
        record(r, std::max(0.0, lib - brute - 1e-12) * 1e6, where + " below sampled minimum");
    }
    return r;
}

SuiteResult momentum_degeneracy_suite(std::size_t draws) {
    SuiteResult r{"momentum degeneracy (bitwise)", true, 0, 0.0, 0.0, {}};
    const std::vector<std::string> ids = {"abs1d", "sin_example", "strict2d", "strict2d_mod", "verdier_ok",
                                          "verdier_bad", "global_l1", "global_pow32", "relu_net", "quad"};
    CounterRng rng(0x6d64, 2);
    for (std::size_t d = 0; d < draws; ++d) {
        const auto spec = catalog_get(ids[rng.below(ids.size())]);
        const Point x0 = sample_point(spec, rng);
        MethodParams p;
        p.alpha = std::pow(10.0, rng.uniform(-3.0, -1.0));
        p.selection = all_rules()[rng.below(4)];
        const std::size_t K = 1 + rng.below(400);
        const auto a = run_subgradient(spec, x0, p, K);
        const auto b = run_momentum(spec, x0, x0, p, K);
        bool same = a.points.size() == b.points.size();
        for (std::size_t k = 0; same && k < a.points.size(); ++k) same = a.points[k] == b.points[k];
        record(r, same ? 0.0 : 1.0, spec.id + " from " + point_str(x0));
    }
    return r;
}

SuiteResult component_sum_suite(std::size_t points) {
    SuiteResult r{"component-sum identity", true, 0, 0.0, 1e-12, {}};
    for (const std::string id : {"global_l1", "global_pow32"}) {
        const auto spec = catalog_get(id);
        CounterRng rng(0x6373, spec.id.size());
        for (std::size_t k = 0; k < points; ++k) {
            const Point x = k % 2 == 0 ? sample_point(spec, rng) : sample_kink(spec, rng);
            double s = 0.0;
            for (const auto& c : spec.components) s += c.value(x);
            s /= static_cast<double>(spec.components.size());
            record(r, std::abs(s - ref_value(spec, x)), id + " at " + point_str(x));
        }
    }
    return r;
}

SuiteResult rpca_structure_suite(std::size_t points) {
    SuiteResult r{"rpca subgradient structure", true, 0, 0.0, 1e-9, {}};
    const auto spec = catalog_get("rpca_l1");
    const auto& in = *spec.rpca;
    const std::size_t m = in.m, n = in.n, rk = in.r, nx = m * rk;
    CounterRng rng(0x7273, 3);
    for (std::size_t k = 0; k < points; ++k) {
        Point x = k % 3 == 0 ? sample_point(spec, rng) : sample_kink(spec, rng);
        if (k % 3 == 2)
            for (std::size_t i = 0; i < rk * rk; ++i) x[i] = 0.0;  // zero leading rows of X
        std::vector<double> R(m * n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = -in.M[i * n + j];
                for (std::size_t c = 0; c < rk; ++c) s += x[i * rk + c] * x[nx + j * rk + c];
                R[i * n + j] = s;
            }
        // Column of the linear map Lambda -> (Lambda Y, Lambda^T X) for entry (i, j).
        auto column = [&](std::size_t i, std::size_t j) {
            Point col(x.size(), 0.0);
            for (std::size_t c = 0; c < rk; ++c) {
                col[i * rk + c] = x[nx + j * rk + c];
                col[nx + j * rk + c] = x[i * rk + c];
            }
            return col;
        };
        std::vector<std::size_t> free_idx;
        Point fixed(x.size(), 0.0);
        for (std::size_t e = 0; e < m * n; ++e) {
            if (R[e] == 0.0) {
                free_idx.push_back(e);
                continue;
            }
            const Point col = column(e / n, e % n);
            const double s = R[e] > 0.0 ? 1.0 : -1.0;
            for (std::size_t q = 0; q < x.size(); ++q) fixed[q] += s * col[q];
        }
        std::vector<Point> cols;
        double lip = 0.0;
        for (std::size_t e : free_idx) {
            cols.push_back(column(e / n, e % n));
            lip += norm2(cols.back());
        }
        for (const auto& sel : all_rules()) {
            const Point g = subgradient_select(spec, x, sel);
            const Point target = sub(g, fixed);
            // Box-constrained least squares over the free entries (FISTA).
            std::vector<double> lam(cols.size(), 0.0), y = lam, prev = lam;
            double t = 1.0;
            auto residual = [&](const std::vector<double>& l) {
                Point res = scaled(target, -1.0);
                for (std::size_t c = 0; c < cols.size(); ++c)
                    for (std::size_t q = 0; q < res.size(); ++q) res[q] += l[c] * cols[c][q];
                return res;
            };
            for (int it = 0; it < 4000 && lip > 0.0; ++it) {
                const Point res = residual(y);
                prev = lam;
                for (std::size_t c = 0; c < cols.size(); ++c)
                    lam[c] = std::clamp(y[c] - dot(cols[c], res) / lip, -1.0, 1.0);
                const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                for (std::size_t c = 0; c < cols.size(); ++c) y[c] = lam[c] + (t - 1.0) / tn * (lam[c] - prev[c]);
                t = tn;
            }
            const double err = norm(residual(lam)) / std::max(1.0, norm(g));
            record(r, err, "rule " + to_string(sel.rule) + " at sample " + std::to_string(k) + " with " +
                               std::to_string(free_idx.size()) + " zero residuals");
        }
    }
    return r;
}

std::vector<SuiteResult> all_property_suites() {
    return {membership_suite(),         finite_difference_suite(), min_norm_bruteforce_suite(),
            momentum_degeneracy_suite(), component_sum_suite(),     rpca_structure_suite()};
}

std::string describe(const SuiteResult& r) {
    std::ostringstream os;
    os.precision(3);
    os << r.name << ": " << (r.pass ? "pass" : "FAIL") << ", " << r.checks << " checks, worst " << r.worst
       << " (tol " << r.tolerance << ")";
    if (!r.pass) os << "; first failure: " << r.failure;
    return os.str();
}

}  // namespace nsolab::testing
