#include "nsolab/oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "nsolab/hull.hpp"
#include "nsolab/rng.hpp"

namespace nsolab {

std::string to_string(SelectionRule rule) {
    switch (rule) {
        case SelectionRule::min_norm: return "min_norm";
        case SelectionRule::deterministic_sign: return "deterministic_sign";
        case SelectionRule::seeded_random_extreme: return "seeded_random_extreme";
    }
    return "unknown";
}

SelectionRule selection_rule_from_string(const std::string& name) {
    if (name == "min_norm") return SelectionRule::min_norm;
    if (name == "deterministic_sign" || name == "sign") return SelectionRule::deterministic_sign;
    if (name == "seeded_random_extreme" || name == "random") return SelectionRule::seeded_random_extreme;
    throw std::invalid_argument("unknown selection rule '" + name + "'");
}

std::size_t hashed_choice(std::uint64_t seed, const Point& x, std::size_t count) {
    std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    for (double v : x) h = mix64(h ^ std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v));
    return static_cast<std::size_t>(h % count);
}

double sin_example_derivative(double x) {
    if (x == 0.0) return 0.0;
    return 2.0 * x * std::sin(1.0 / x) - std::cos(1.0 / x);
}

namespace {

using SignFn = std::function<Point(const Point&)>;

// Subgradient oracle for entries described by a generator list plus a closed
// form for the sign convention.
SubgradFn piecewise_subgrad(GeneratorsFn gens, SignFn sign_rule) {
    return [gens = std::move(gens), sign_rule = std::move(sign_rule)](
               const Point& x, const SubgradientSelection& sel) -> Point {
        switch (sel.rule) {
            case SelectionRule::min_norm: return min_norm_in_hull(gens(x)).point;
            case SelectionRule::deterministic_sign: return sign_rule(x);
            case SelectionRule::seeded_random_extreme: {
                const auto g = gens(x);
                return g[hashed_choice(sel.seed, x, g.size())];
            }
        }
        throw std::logic_error("bad selection rule");
    };
}

std::vector<double> sign_set(double t) {
    if (t > 0.0) return {1.0};
    if (t < 0.0) return {-1.0};
    return {-1.0, 1.0};
}

// Gradient among `cands` with the smallest norm (first wins on ties).
Point smallest(const std::vector<Point>& cands) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
        if (norm2(cands[i]) < norm2(cands[best])) best = i;
    return cands[best];
}

void check_dim(const Point& x, std::size_t n, const std::string& id) {
    if (x.size() != n) {
        std::ostringstream os;
        os << id << ": expected a point of dimension " << n << ", got " << x.size();
        throw std::invalid_argument(os.str());
    }
}

ObjectiveSpec make_abs1d() {
    ObjectiveSpec s;
    s.id = "abs1d";
    s.n = 1;
    s.description = "f(x) = |x|";
    s.value = [](const Point& x) { return std::abs(x[0]); };
    s.generators = [](const Point& x) {
        std::vector<Point> g;
        for (double t : sign_set(x[0])) g.push_back({t});
        return g;
    };
    s.subgrad = piecewise_subgrad(s.generators, [](const Point& x) { return Point{sign0(x[0])}; });
    s.default_anchor = {0.0};
    return s;
}

ObjectiveSpec make_sin_example() {
    ObjectiveSpec s;
    s.id = "sin_example";
    s.n = 1;
    s.description = "f(x) = x^2 sin(1/x), f(0) = 0";
    s.value = [](const Point& x) {
        return x[0] == 0.0 ? 0.0 : x[0] * x[0] * std::sin(1.0 / x[0]);
    };
    s.generators = [](const Point& x) -> std::vector<Point> {
        if (x[0] == 0.0) return {{-1.0}, {1.0}};
        return {{sin_example_derivative(x[0])}};
    };
    // Every rule returns 0 at the origin, keeping it a fixed point.
    s.subgrad = [](const Point& x, const SubgradientSelection&) {
        return Point{sin_example_derivative(x[0])};
    };
    s.default_anchor = {0.0};
    return s;
}

// max{a*phi(x1) + b|x2|, c*phi(x1) + d|x2|} with phi = x1^2 or |x1|^{3/2}.
ObjectiveSpec make_strict(bool modified) {
    ObjectiveSpec s;
    s.id = modified ? "strict2d_mod" : "strict2d";
    s.n = 2;
    s.description = modified ? "f = max{-18|x1|^{3/2} + 12|x2|, 6|x1|^{3/2} + 3|x2|}"
                             : "f = max{-18 x1^2 + 12|x2|, 6 x1^2 + 3|x2|}";
    auto phi = [modified](double t) { return modified ? std::pow(std::abs(t), 1.5) : t * t; };
    auto dphi = [modified](double t) {
        return modified ? 1.5 * sign0(t) * std::sqrt(std::abs(t)) : 2.0 * t;
    };
    auto pieces = [phi](const Point& x) {
        const double p = phi(x[0]);
        const double a = std::abs(x[1]);
        return std::pair{-18.0 * p + 12.0 * a, 6.0 * p + 3.0 * a};
    };
    s.value = [pieces](const Point& x) {
        const auto [p1, p2] = pieces(x);
        return std::max(p1, p2);
    };
    s.generators = [pieces, dphi](const Point& x) {
        const auto [p1, p2] = pieces(x);
        const double d = dphi(x[0]);
        std::vector<Point> g;
        for (double t : sign_set(x[1])) {
            if (p1 >= p2) g.push_back({-18.0 * d, 12.0 * t});
            if (p2 >= p1) g.push_back({6.0 * d, 3.0 * t});
        }
        return unique_points(std::move(g));
    };
    s.subgrad = piecewise_subgrad(s.generators, [pieces, dphi](const Point& x) {
        const auto [p1, p2] = pieces(x);
        const double d = dphi(x[0]);
        const double t = sign0(x[1]);
        const Point g1{-18.0 * d, 12.0 * t};
        const Point g2{6.0 * d, 3.0 * t};
        if (p1 > p2) return g1;
        if (p2 > p1) return g2;
        return smallest({g2, g1});
    });
    s.default_anchor = {0.0, 0.0};
    return s;
}

ObjectiveSpec make_verdier_ok() {
    ObjectiveSpec s;
    s.id = "verdier_ok";
    s.n = 2;
    s.description = "f = |x1 x2 - 1|";
    s.value = [](const Point& x) { return std::abs(x[0] * x[1] - 1.0); };
    s.generators = [](const Point& x) {
        std::vector<Point> g;
        for (double t : sign_set(x[0] * x[1] - 1.0)) g.push_back({t * x[1], t * x[0]});
        return unique_points(std::move(g));
    };
    s.subgrad = piecewise_subgrad(s.generators, [](const Point& x) {
        const double t = sign0(x[0] * x[1] - 1.0);
        return Point{t * x[1], t * x[0]};
    });
    s.default_anchor = {1.0, 1.0};

    // S = {x1 x2 = 1} near (1,1). The nearest point (a, 1/a) solves
    // a^4 - x1 a^3 + x2 a - 1 = 0.
    CriticalSetOracle cs;
    cs.anchor = {1.0, 1.0};
    cs.valid_radius = 0.5;
    cs.project = [](const Point& x) {
        double a = std::max(0.25, 0.5 * (x[0] + 1.0 / std::max(x[1], 0.25)));
        for (int it = 0; it < 100; ++it) {
            const double p = (a - x[0]) * a * a * a + x[1] * a - 1.0;
            const double dp = 4.0 * a * a * a - 3.0 * x[0] * a * a + x[1];
            const double step = p / dp;
            a -= step;
            if (std::abs(step) <= 1e-16 * std::abs(a)) break;
        }
        return Point{a, 1.0 / a};
    };
    cs.distance = [proj = cs.project](const Point& x) { return distance(x, proj(x)); };
    cs.tangent_project = [](const Point& y, const Point& v) {
        const double ny = norm(y);
        const double t0 = y[0] / ny;
        const double t1 = -y[1] / ny;
        const double c = v[0] * t0 + v[1] * t1;
        return Point{c * t0, c * t1};
    };
    cs.riemannian_grad = [](const Point&) { return Point{0.0, 0.0}; };
    s.critical_set = cs;
    return s;
}

ObjectiveSpec make_verdier_bad() {
    ObjectiveSpec s;
    s.id = "verdier_bad";
    s.n = 2;
    s.description = "f = max{-x1^2 + 2 x2, |x2|}";
    s.value = [](const Point& x) { return std::max(-x[0] * x[0] + 2.0 * x[1], std::abs(x[1])); };
    s.generators = [](const Point& x) {
        const double p1 = -x[0] * x[0] + 2.0 * x[1];
        const double p2 = std::abs(x[1]);
        std::vector<Point> g;
        if (p1 >= p2) g.push_back({-2.0 * x[0], 2.0});
        if (p2 >= p1)
            for (double t : sign_set(x[1])) g.push_back({0.0, t});
        return unique_points(std::move(g));
    };
    s.subgrad = piecewise_subgrad(s.generators, [](const Point& x) {
        const double p1 = -x[0] * x[0] + 2.0 * x[1];
        const double p2 = std::abs(x[1]);
        const Point g1{-2.0 * x[0], 2.0};
        const Point g2{0.0, sign0(x[1])};
        if (p1 > p2) return g1;
        if (p2 > p1) return g2;
        return smallest({g2, g1});
    });
    s.default_anchor = {0.0, 0.0};

    CriticalSetOracle cs;
    cs.anchor = {0.0, 0.0};
    cs.valid_radius = 0.5;
    cs.distance = [](const Point& x) { return std::abs(x[1]); };
    cs.project = [](const Point& x) { return Point{x[0], 0.0}; };
    cs.tangent_project = [](const Point&, const Point& v) { return Point{v[0], 0.0}; };
    cs.riemannian_grad = [](const Point&) { return Point{0.0, 0.0}; };
    s.critical_set = cs;
    return s;
}

// Terms h_i of the two illustration objectives, with weights and gradients.
struct IllustrationTerm {
    double weight;
    double (*h)(const Point&);
    Point (*grad)(const Point&);
};

const std::vector<IllustrationTerm>& illustration_terms() {
    static const std::vector<IllustrationTerm> terms = {
        {1.0, [](const Point& x) { return x[0] * x[0] - 1.0; },
         [](const Point& x) { return Point{2.0 * x[0], 0.0}; }},
        {2.0, [](const Point& x) { return x[0] * x[1] + 1.0; },
         [](const Point& x) { return Point{x[1], x[0]}; }},
        {1.0, [](const Point& x) { return x[1] * x[1] - 1.0; },
         [](const Point& x) { return Point{0.0, 2.0 * x[1]}; }},
    };
    return terms;
}

ObjectiveSpec make_global_l1() {
    ObjectiveSpec s;
    s.id = "global_l1";
    s.n = 2;
    s.description = "f = |x1^2 - 1| + 2|x1 x2 + 1| + |x2^2 - 1|";
    const auto* terms = &illustration_terms();
    s.value = [terms](const Point& x) {
        double v = 0.0;
        for (const auto& t : *terms) v += t.weight * std::abs(t.h(x));
        return v;
    };
    // Minkowski sum of the per-term subdifferentials.
    s.generators = [terms](const Point& x) {
        std::vector<Point> acc{{0.0, 0.0}};
        for (const auto& t : *terms) {
            const Point g = t.grad(x);
            std::vector<Point> next;
            for (const auto& a : acc)
                for (double sg : sign_set(t.h(x)))
                    next.push_back({a[0] + t.weight * sg * g[0], a[1] + t.weight * sg * g[1]});
            acc = std::move(next);
        }
        return unique_points(std::move(acc));
    };
    s.subgrad = piecewise_subgrad(s.generators, [terms](const Point& x) {
        Point out{0.0, 0.0};
        for (const auto& t : *terms) {
            const Point g = t.grad(x);
            const double sg = sign0(t.h(x));
            out[0] += t.weight * sg * g[0];
            out[1] += t.weight * sg * g[1];
        }
        return out;
    });
    // Components scaled by N = 3 so that f = (1/3) sum f_i.
    const double N = static_cast<double>(terms->size());
    for (const auto& term : *terms) {
        ComponentOracle c;
        const double w = N * term.weight;
        c.value = [term, w](const Point& x) { return w * std::abs(term.h(x)); };
        c.generators = [term, w](const Point& x) {
            const Point g = term.grad(x);
            std::vector<Point> out;
            for (double sg : sign_set(term.h(x))) out.push_back({w * sg * g[0], w * sg * g[1]});
            return unique_points(std::move(out));
        };
        c.subgrad = piecewise_subgrad(c.generators, [term, w](const Point& x) {
            const Point g = term.grad(x);
            const double sg = sign0(term.h(x));
            return Point{w * sg * g[0], w * sg * g[1]};
        });
        s.components.push_back(std::move(c));
    }
    // Each component is a convex function of a smooth map, hence regular.
    s.components_regular = true;
    s.default_anchor = {1.0, -1.0};
    return s;
}

ObjectiveSpec make_global_pow32() {
    ObjectiveSpec s;
    s.id = "global_pow32";
    s.n = 2;
    s.description = "f = |x1^2 - 1|^{3/2} + 2|x1 x2 + 1|^{3/2} + |x2^2 - 1|^{3/2}";
    const auto* terms = &illustration_terms();
    auto term_grad = [](const IllustrationTerm& t, const Point& x, double w) {
        const double h = t.h(x);
        const double k = w * 1.5 * sign0(h) * std::sqrt(std::abs(h));
        const Point g = t.grad(x);
        return Point{k * g[0], k * g[1]};
    };
    s.value = [terms](const Point& x) {
        double v = 0.0;
        for (const auto& t : *terms) v += t.weight * std::pow(std::abs(t.h(x)), 1.5);
        return v;
    };
    s.gradient = [terms, term_grad](const Point& x) {
        Point out{0.0, 0.0};
        for (const auto& t : *terms) {
            const Point g = term_grad(t, x, t.weight);
            out[0] += g[0];
            out[1] += g[1];
        }
        return out;
    };
    s.generators = [grad = s.gradient](const Point& x) { return std::vector<Point>{grad(x)}; };
    s.subgrad = [grad = s.gradient](const Point& x, const SubgradientSelection&) { return grad(x); };
    const double N = static_cast<double>(terms->size());
    for (const auto& term : *terms) {
        ComponentOracle c;
        const double w = N * term.weight;
        c.value = [term, w](const Point& x) { return w * std::pow(std::abs(term.h(x)), 1.5); };
        c.subgrad = [term, w, term_grad](const Point& x, const SubgradientSelection&) {
            return term_grad(term, x, w);
        };
        c.generators = [term, w, term_grad](const Point& x) {
            return std::vector<Point>{term_grad(term, x, w)};
        };
        s.components.push_back(std::move(c));
    }
    s.components_regular = true;  // C^1 components
    s.default_anchor = {1.0, -1.0};
    return s;
}

// f = |x3 relu(x2) - 1| + |x3 relu(x1 + x2)|
ObjectiveSpec make_relu_net() {
    ObjectiveSpec s;
    s.id = "relu_net";
    s.n = 3;
    s.description = "f = |x3 max{x2,0} - 1| + |x3 max{x1+x2,0}|";
    s.value = [](const Point& x) {
        const double r2 = std::max(x[1], 0.0);
        const double r12 = std::max(x[0] + x[1], 0.0);
        return std::abs(x[2] * r2 - 1.0) + std::abs(x[2] * r12);
    };
    // Gradient of the piece selected by (sa, sb, i2, i12): signs of the two
    // absolute values and indicators of the two ReLUs.
    auto piece = [](const Point& x, double sa, double sb, double i2, double i12) {
        const double s12 = x[0] + x[1];
        return Point{sb * x[2] * i12, sa * x[2] * i2 + sb * x[2] * i12,
                     sa * i2 * x[1] + sb * i12 * s12};
    };
    auto indicator_set = [](double t) -> std::vector<double> {
        if (t > 0.0) return {1.0};
        if (t < 0.0) return {0.0};
        return {0.0, 1.0};
    };
    s.generators = [piece, indicator_set](const Point& x) {
        const double s12 = x[0] + x[1];
        std::vector<Point> g;
        for (double i2 : indicator_set(x[1]))
            for (double i12 : indicator_set(s12)) {
                const double a = x[2] * (i2 > 0.0 ? x[1] : 0.0) - 1.0;
                const double b = x[2] * (i12 > 0.0 ? s12 : 0.0);
                for (double sa : sign_set(a))
                    for (double sb : sign_set(b)) g.push_back(piece(x, sa, sb, i2, i12));
            }
        return unique_points(std::move(g));
    };
    s.subgrad = piecewise_subgrad(s.generators, [piece](const Point& x) {
        const double s12 = x[0] + x[1];
        const double i2 = x[1] > 0.0 ? 1.0 : 0.0;
        const double i12 = s12 > 0.0 ? 1.0 : 0.0;
        const double a = x[2] * std::max(x[1], 0.0) - 1.0;
        const double b = x[2] * std::max(s12, 0.0);
        return piece(x, sign0(a), sign0(b), i2, i12);
    });
    s.default_anchor = {1.0, 1.0, 0.0};

    CriticalSetOracle cs;
    cs.anchor = s.default_anchor;
    cs.valid_radius = 0.4;
    cs.distance = [](const Point& x) { return std::abs(x[2]); };
    cs.project = [](const Point& x) { return Point{x[0], x[1], 0.0}; };
    cs.tangent_project = [](const Point&, const Point& v) { return Point{v[0], v[1], 0.0}; };
    cs.riemannian_grad = [](const Point&) { return Point{0.0, 0.0, 0.0}; };
    s.critical_set = cs;

    ChetaevBundle ch;
    ch.C = [](const Point& x) { return 1.0 - x[0]; };
    ch.theta1 = 1.0;
    ch.c1_of_alpha = [](double alpha) { return alpha; };
    ch.anchor = s.default_anchor;
    ch.neighborhood_radius = 0.4;
    ch.predicted_increment = [](const Point& x, const Point&, double alpha) {
        return alpha * std::abs(x[2]);
    };
    s.chetaev = ch;
    return s;
}

ObjectiveSpec make_quad(std::size_t dim) {
    if (dim == 0) throw CatalogError("quad: dimension must be positive");
    ObjectiveSpec s;
    s.id = "quad";
    s.n = dim;
    s.description = "f = 0.5 ||x||^2";
    s.value = [](const Point& x) { return 0.5 * norm2(x); };
    s.gradient = [](const Point& x) { return x; };
    s.generators = [](const Point& x) { return std::vector<Point>{x}; };
    s.subgrad = [](const Point& x, const SubgradientSelection&) { return x; };
    s.default_anchor.assign(dim, 0.0);

    CriticalSetOracle cs;
    cs.anchor = s.default_anchor;
    cs.valid_radius = std::numeric_limits<double>::infinity();
    cs.distance = [](const Point& x) { return norm(x); };
    cs.project = [dim](const Point&) { return Point(dim, 0.0); };
    cs.tangent_project = [dim](const Point&, const Point&) { return Point(dim, 0.0); };
    cs.riemannian_grad = [dim](const Point&) { return Point(dim, 0.0); };
    s.critical_set = cs;
    return s;
}

// Box-constrained least squares over the free entries of Lambda: minimizes
// ||Lambda Y||^2 + ||Lambda^T X||^2 by cyclic coordinate descent.
Point rpca_min_norm(const RpcaInstance& inst, const Point& x) {
    const auto R = rpca_residual(inst, x);
    const auto v = rpca_view(inst, x);
    const std::size_t m = inst.m, n = inst.n, r = inst.r;
    std::vector<double> lambda(m * n);
    std::vector<std::size_t> free_idx;
    for (std::size_t k = 0; k < m * n; ++k) {
        lambda[k] = sign0(R[k]);
        if (R[k] == 0.0) free_idx.push_back(k);
    }
    if (!free_idx.empty()) {
        Point g = rpca_apply_lambda(inst, x, lambda);
        double* P = g.data();          // Lambda Y, m x r
        double* Q = g.data() + m * r;  // Lambda^T X, n x r
        for (int sweep = 0; sweep < 5000; ++sweep) {
            double change = 0.0;
            for (std::size_t k : free_idx) {
                const std::size_t i = k / n, j = k % n;
                double grad = 0.0, curv = 0.0;
                for (std::size_t c = 0; c < r; ++c) {
                    grad += P[i * r + c] * v.Y[j * r + c] + Q[j * r + c] * v.X[i * r + c];
                    curv += v.Y[j * r + c] * v.Y[j * r + c] + v.X[i * r + c] * v.X[i * r + c];
                }
                if (curv == 0.0) continue;
                const double nl = std::clamp(lambda[k] - grad / curv, -1.0, 1.0);
                const double d = nl - lambda[k];
                if (d == 0.0) continue;
                lambda[k] = nl;
                for (std::size_t c = 0; c < r; ++c) {
                    P[i * r + c] += d * v.Y[j * r + c];
                    Q[j * r + c] += d * v.X[i * r + c];
                }
                change = std::max(change, std::abs(d));
            }
            if (change <= 1e-15) break;
        }
    }
    return rpca_apply_lambda(inst, x, lambda);
}

ObjectiveSpec make_rpca(std::uint64_t seed) {
    auto inst = std::make_shared<const RpcaInstance>(make_rpca_instance(seed));
    ObjectiveSpec s;
    s.id = "rpca_l1";
    s.n = (inst->m + inst->n) * inst->r;
    s.description = "f(X,Y) = ||X Y^T - M||_1 on a synthetic M with zero leading rows";
    s.rpca = inst;
    s.shapes = {{"X", inst->m, inst->r}, {"Y", inst->n, inst->r}};
    s.value = [inst](const Point& x) {
        double v = 0.0;
        for (double e : rpca_residual(*inst, x)) v += std::abs(e);
        return v;
    };
    s.subgrad = [inst](const Point& x, const SubgradientSelection& sel) {
        if (sel.rule == SelectionRule::min_norm) return rpca_min_norm(*inst, x);
        return rpca_apply_lambda(*inst, x, rpca_lambda(*inst, x, sel));
    };
    s.smooth_at = [inst](const Point& x) {
        for (double e : rpca_residual(*inst, x))
            if (e == 0.0) return false;
        return true;
    };
    s.default_anchor = inst->x_star;

    const std::size_t nx = inst->m * inst->r;
    const double radius = inst->sigma_min / 2.0;
    CriticalSetOracle cs;
    cs.anchor = inst->x_star;
    cs.valid_radius = radius;
    cs.distance = [nx](const Point& x) {
        double s2 = 0.0;
        for (std::size_t k = nx; k < x.size(); ++k) s2 += x[k] * x[k];
        return std::sqrt(s2);
    };
    cs.project = [nx](const Point& x) {
        Point p = x;
        std::fill(p.begin() + static_cast<std::ptrdiff_t>(nx), p.end(), 0.0);
        return p;
    };
    cs.tangent_project = [nx](const Point&, const Point& v) {
        Point p = v;
        std::fill(p.begin() + static_cast<std::ptrdiff_t>(nx), p.end(), 0.0);
        return p;
    };
    cs.riemannian_grad = [n = s.n](const Point&) { return Point(n, 0.0); };
    s.critical_set = cs;

    double xs2 = 0.0, ys2 = 0.0;
    for (std::size_t k = 0; k < nx; ++k) xs2 += inst->x_star[k] * inst->x_star[k];
    for (std::size_t k = nx; k < s.n; ++k) ys2 += inst->x_star[k] * inst->x_star[k];
    ChetaevBundle ch;
    ch.C = [nx, base = xs2 - ys2](const Point& x) {
        double v = base;
        for (std::size_t k = 0; k < nx; ++k) v -= x[k] * x[k];
        for (std::size_t k = nx; k < x.size(); ++k) v += x[k] * x[k];
        return v;
    };
    ch.theta1 = 0.0;
    ch.c1_of_alpha = [radius](double alpha) { return alpha * alpha * radius * radius / 2.0; };
    ch.anchor = inst->x_star;
    ch.neighborhood_radius = radius;
    // With g = (Lambda Y, Lambda^T X) the increment is
    // alpha^2 (||Lambda^T X||^2 - ||Lambda Y||^2).
    ch.predicted_increment = [nx](const Point&, const Point& g, double alpha) {
        double gx = 0.0, gy = 0.0;
        for (std::size_t k = 0; k < nx; ++k) gx += g[k] * g[k];
        for (std::size_t k = nx; k < g.size(); ++k) gy += g[k] * g[k];
        return alpha * alpha * (gy - gx);
    };
    ch.increment_scale = [](const Point&, const Point& g, double alpha) {
        return alpha * alpha * norm2(g);
    };
    ch.increment = [nx](const Point& x, const Point& next) {
        double v = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double d = (next[k] - x[k]) * (next[k] + x[k]);
            v += k < nx ? -d : d;
        }
        return v;
    };
    s.chetaev = ch;
    return s;
}

}  // namespace

double RpcaInstance::l1_norm_M() const {
    double v = 0.0;
    for (double e : M) v += std::abs(e);
    return v;
}

RpcaInstance make_rpca_instance(std::uint64_t seed, std::size_t m, std::size_t n, std::size_t r,
                                std::size_t rank, double outlier_fraction) {
    if (r == 0 || r >= m || rank == 0) throw CatalogError("rpca_l1: invalid shape");
    RpcaInstance inst;
    inst.m = m;
    inst.n = n;
    inst.r = r;
    inst.rank = rank;
    inst.outlier_fraction = outlier_fraction;
    inst.seed = seed;
    CounterRng rng(seed, 0x5250434aULL);
    std::vector<double> U(m * rank), V(n * rank);
    for (auto& u : U) u = rng.normal();
    for (auto& v : V) v = rng.normal();
    inst.M.assign(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (std::size_t c = 0; c < rank; ++c) v += U[i * rank + c] * V[j * rank + c];
            if (rng.uniform() < outlier_fraction) v += rng.uniform(-10.0, 10.0);
            inst.M[i * n + j] = i < r ? 0.0 : v;
        }
    inst.x_star.assign((m + n) * r, 0.0);
    for (std::size_t i = 0; i < r; ++i) inst.x_star[i * r + i] = 1.0;
    Eigen::MatrixXd Xh(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t c = 0; c < r; ++c) Xh(i, c) = inst.x_star[i * r + c];
    inst.sigma_min = Eigen::JacobiSVD<Eigen::MatrixXd>(Xh).singularValues().minCoeff();
    return inst;
}

RpcaView rpca_view(const RpcaInstance& inst, const Point& x) {
    check_dim(x, (inst.m + inst.n) * inst.r, "rpca_l1");
    return {x.data(), x.data() + inst.m * inst.r};
}

std::vector<double> rpca_residual(const RpcaInstance& inst, const Point& x) {
    const auto v = rpca_view(inst, x);
    std::vector<double> R(inst.m * inst.n);
    for (std::size_t i = 0; i < inst.m; ++i)
        for (std::size_t j = 0; j < inst.n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < inst.r; ++c) s += v.X[i * inst.r + c] * v.Y[j * inst.r + c];
            R[i * inst.n + j] = s - inst.M[i * inst.n + j];
        }
    return R;
}

Point rpca_apply_lambda(const RpcaInstance& inst, const Point& x, const std::vector<double>& lambda) {
    const auto v = rpca_view(inst, x);
    const std::size_t m = inst.m, n = inst.n, r = inst.r;
    Point g((m + n) * r, 0.0);
    double* P = g.data();
    double* Q = g.data() + m * r;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double l = lambda[i * n + j];
            if (l == 0.0) continue;
            for (std::size_t c = 0; c < r; ++c) {
                P[i * r + c] += l * v.Y[j * r + c];
                Q[j * r + c] += l * v.X[i * r + c];
            }
        }
    return g;
}

std::vector<double> rpca_lambda(const RpcaInstance& inst, const Point& x,
                                const SubgradientSelection& sel) {
    auto R = rpca_residual(inst, x);
    const bool random = sel.rule == SelectionRule::seeded_random_extreme;
    const std::uint64_t base = random ? hashed_choice(sel.seed, x, ~std::size_t{0}) : 0;
    for (std::size_t k = 0; k < R.size(); ++k) {
        if (R[k] == 0.0 && random)
            R[k] = (mix64(base ^ mix64(k)) & 1U) ? 1.0 : -1.0;
        else
            R[k] = sign0(R[k]);
    }
    return R;
}

const std::vector<std::string>& catalog_ids() {
    static const std::vector<std::string> ids = {
        "abs1d",     "sin_example", "strict2d", "strict2d_mod", "verdier_ok", "verdier_bad",
        "global_l1", "global_pow32", "relu_net", "rpca_l1",      "quad"};
    return ids;
}

ObjectiveSpec catalog_get(const std::string& id, const CatalogOptions& opts) {
    if (id == "abs1d") return make_abs1d();
    if (id == "sin_example") return make_sin_example();
    if (id == "strict2d") return make_strict(false);
    if (id == "strict2d_mod") return make_strict(true);
    if (id == "verdier_ok") return make_verdier_ok();
    if (id == "verdier_bad") return make_verdier_bad();
    if (id == "global_l1") return make_global_l1();
    if (id == "global_pow32") return make_global_pow32();
    if (id == "relu_net") return make_relu_net();
    if (id == "rpca_l1") return make_rpca(opts.rpca_seed);
    if (id == "quad") return make_quad(opts.quad_dim);
    std::string msg = "unknown catalog id '" + id + "'; valid ids:";
    for (const auto& k : catalog_ids()) msg += " " + k;
    throw CatalogError(msg);
}

Point subgradient_select(const ObjectiveSpec& spec, const Point& x, const SubgradientSelection& sel) {
    check_dim(x, spec.n, spec.id);
    return spec.subgrad(x, sel);
}

MinNormResult min_norm_subgradient(const ObjectiveSpec& spec, const Point& x) {
    check_dim(x, spec.n, spec.id);
    MinNormResult out;
    if (spec.has_generators()) {
        auto hp = min_norm_in_hull(spec.generators(x));
        out.vector = std::move(hp.point);
    } else if (spec.has_gradient()) {
        out.vector = spec.gradient(x);
    } else if (spec.smooth_at && spec.smooth_at(x)) {
        out.vector = spec.subgrad(x, SubgradientSelection::sign());
    } else {
        throw UnsupportedOracleError(spec.id +
                                     ": no generator oracle and the point is not a smooth point");
    }
    out.norm = norm(out.vector);
    return out;
}

double distance_to_critical(const ObjectiveSpec& spec, const Point& x) {
    if (!spec.critical_set)
        throw UnsupportedOracleError(spec.id + ": no critical-set oracle");
    const auto& cs = *spec.critical_set;
    check_dim(x, spec.n, spec.id);
    const double r = distance(x, cs.anchor);
    if (r > cs.valid_radius) {
        std::ostringstream os;
        os << spec.id << ": point at distance " << r << " from the anchor is outside the valid radius "
           << cs.valid_radius;
        throw OutOfNeighborhoodError(os.str());
    }
    return cs.distance(x);
}

}  // namespace nsolab
