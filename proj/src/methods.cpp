#include "nsolab/methods.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "nsolab/rng.hpp"

namespace nsolab {
namespace {

void check_point(const ObjectiveSpec& spec, const Point& x, const char* what) {
    if (x.size() != spec.n) {
        std::ostringstream os;
        os << spec.id << ": " << what << " has dimension " << x.size() << ", expected " << spec.n;
        throw std::invalid_argument(os.str());
    }
    if (!all_finite(x)) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

void check_params(const MethodParams& p) {
    if (!(p.alpha > 0.0)) throw PreconditionError("step size alpha must be positive");
    if (!(std::abs(p.beta) < 1.0)) throw PreconditionError("momentum beta must lie in (-1, 1)");
    if (!std::isfinite(p.gamma)) throw PreconditionError("gamma must be finite");
    if (!(p.delta > 0.0)) throw PreconditionError("delta must be positive");
}

void check_init_bound(const Point& x0, const Point& xm1, const MethodParams& p) {
    const double d = distance(x0, xm1);
    if (d > p.delta * p.alpha) {
        std::ostringstream os;
        os << "initialization bound violated: ||x_-1 - x_0|| = " << d << " > delta*alpha = "
           << p.delta * p.alpha;
        throw PreconditionError(os.str());
    }
}

double proxy_at(const ObjectiveSpec& spec, const Point& x) {
    try {
        return min_norm_subgradient(spec, x).norm;
    } catch (const UnsupportedOracleError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// Appends a point with its bookkeeping and enforces the divergence guard.
class Recorder {
public:
    Recorder(const ObjectiveSpec& spec, IterateTrace& trace, const RunOptions& opts)
        : spec_(spec), trace_(trace), opts_(opts) {}

    void push(Point x) {
        const bool finite = all_finite(x);
        const double f = finite ? spec_.value(x) : std::numeric_limits<double>::quiet_NaN();
        if (opts_.record_proxy)
            trace_.min_norm_proxy.push_back(finite ? proxy_at(spec_, x)
                                                   : std::numeric_limits<double>::quiet_NaN());
        trace_.points.push_back(std::move(x));
        trace_.f_values.push_back(f);
        const Point& p = trace_.points.back();
        if (!finite || norm(p) > opts_.divergence_bound) {
            std::ostringstream os;
            os << trace_.method_id << " on " << spec_.id << " diverged at point "
               << trace_.points.size() - 1;
            throw DivergenceError(os.str(), trace_);
        }
    }

private:
    const ObjectiveSpec& spec_;
    IterateTrace& trace_;
    const RunOptions& opts_;
};

Point look_ahead(const Point& x, const Point& x_prev, double gamma) {
    if (gamma == 0.0) return x;
    Point y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + gamma * (x[i] - x_prev[i]);
    return y;
}

IterateTrace start_trace(const char* id, const ObjectiveSpec& spec, const MethodParams& p,
                         const Point& xm1) {
    IterateTrace t;
    t.method_id = id;
    t.objective = spec.id;
    t.params = p;
    t.x_minus1 = xm1;
    return t;
}

std::uint64_t ulp_distance(double a, double b) {
    if (a == b) return 0;
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<std::uint64_t>::max();
    auto key = [](double v) {
        const auto u = std::bit_cast<std::uint64_t>(v);
        return (u >> 63) ? ~u + 1 : u | (std::uint64_t{1} << 63);
    };
    const std::uint64_t ka = key(a), kb = key(b);
    return ka > kb ? ka - kb : kb - ka;
}

}  // namespace

Point momentum_step(const Point& x, const Point& x_prev, const Point& g, double alpha, double beta) {
    Point out(x.size());
    if (beta == 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - alpha * g[i];
    } else {
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = x[i] + beta * (x[i] - x_prev[i]) - alpha * g[i];
    }
    return out;
}

IterateTrace run_subgradient(const ObjectiveSpec& spec, const Point& x0, const MethodParams& params,
                             std::size_t K, const RunOptions& opts) {
    check_point(spec, x0, "x0");
    check_params(params);
    IterateTrace t = start_trace("sg", spec, params, x0);
    t.points.reserve(K + 1);
    t.selected_subgrads.reserve(K);
    Recorder rec(spec, t, opts);
    rec.push(x0);
    t.outer_index.push_back(0);
    for (std::size_t k = 0; k < K; ++k) {
        Point g = subgradient_select(spec, t.points.back(), params.selection);
        Point next = momentum_step(t.points.back(), t.points.back(), g, params.alpha, 0.0);
        t.selected_subgrads.push_back(std::move(g));
        rec.push(std::move(next));
        t.outer_index.push_back(t.points.size() - 1);
    }
    return t;
}

IterateTrace run_momentum(const ObjectiveSpec& spec, const Point& x0, const Point& x_minus1,
                          const MethodParams& params, std::size_t K, const RunOptions& opts) {
    check_point(spec, x0, "x0");
    check_point(spec, x_minus1, "x_-1");
    check_params(params);
    check_init_bound(x0, x_minus1, params);
    IterateTrace t = start_trace("momentum", spec, params, x_minus1);
    t.points.reserve(K + 1);
    t.selected_subgrads.reserve(K);
    Recorder rec(spec, t, opts);
    rec.push(x0);
    t.outer_index.push_back(0);
    for (std::size_t k = 0; k < K; ++k) {
        const Point& x = t.points.back();
        const Point& xp = k == 0 ? t.x_minus1 : t.points[t.points.size() - 2];
        Point g = subgradient_select(spec, look_ahead(x, xp, params.gamma), params.selection);
        Point next = momentum_step(x, xp, g, params.alpha, params.beta);
        t.selected_subgrads.push_back(std::move(g));
        rec.push(std::move(next));
        t.outer_index.push_back(t.points.size() - 1);
    }
    return t;
}

IterateTrace run_reshuffling(const ObjectiveSpec& spec, const Point& x0, const Point& x_prev_tail,
                             const MethodParams& params, std::size_t epochs,
                             const RunOptions& opts) {
    if (spec.components.empty())
        throw UnsupportedOracleError(spec.id + ": random reshuffling needs a component split");
    check_point(spec, x0, "x0");
    check_point(spec, x_prev_tail, "x_prev_tail");
    check_params(params);
    check_init_bound(x0, x_prev_tail, params);
    const std::size_t N = spec.components.size();
    IterateTrace t = start_trace("rr", spec, params, x_prev_tail);
    t.points.reserve(epochs * N + 1);
    t.selected_subgrads.reserve(epochs * N);
    t.permutations.reserve(epochs);
    CounterRng rng(params.seed, 0x7272ULL);
    Recorder rec(spec, t, opts);
    rec.push(x0);
    t.outer_index.push_back(0);
    for (std::size_t k = 0; k < epochs; ++k) {
        t.permutations.push_back(rng.permutation(N));
        for (std::size_t i = 0; i < N; ++i) {
            const ComponentOracle& c = spec.components[t.permutations.back()[i]];
            const Point& x = t.points.back();
            const Point& xp = t.points.size() == 1 ? t.x_minus1 : t.points[t.points.size() - 2];
            Point g = c.subgrad(look_ahead(x, xp, params.gamma), params.selection);
            Point next = momentum_step(x, xp, g, params.alpha, params.beta);
            t.selected_subgrads.push_back(std::move(g));
            rec.push(std::move(next));
        }
        t.outer_index.push_back(t.points.size() - 1);
    }
    return t;
}

IterateTrace run_cyclic_cd(const ObjectiveSpec& spec, const Point& x0, const MethodParams& params,
                           std::size_t epochs, const RunOptions& opts) {
    if (!spec.has_gradient())
        throw UnsupportedOracleError(spec.id + ": coordinate descent needs a gradient oracle");
    check_point(spec, x0, "x0");
    check_params(params);
    const std::size_t n = spec.n;
    IterateTrace t = start_trace("cd", spec, params, x0);
    t.params.beta = 0.0;
    t.params.gamma = 0.0;
    t.points.reserve(epochs * n + 1);
    t.selected_subgrads.reserve(epochs * n);
    t.permutations.reserve(epochs);
    CounterRng rng(params.seed, 0x6364ULL);
    Recorder rec(spec, t, opts);
    rec.push(x0);
    t.outer_index.push_back(0);
    for (std::size_t k = 0; k < epochs; ++k) {
        t.permutations.push_back(rng.permutation(n));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t coord = t.permutations.back()[i];
            const Point& x = t.points.back();
            const Point full = spec.gradient(x);
            Point g(n, 0.0);
            g[coord] = full[coord];
            Point next = momentum_step(x, x, g, params.alpha, 0.0);
            t.selected_subgrads.push_back(std::move(g));
            rec.push(std::move(next));
        }
        t.outer_index.push_back(t.points.size() - 1);
    }
    return t;
}

std::uint64_t replay_max_ulp(const IterateTrace& trace) {
    if (trace.points.size() != trace.selected_subgrads.size() + 1)
        throw std::invalid_argument("trace has inconsistent point and subgradient counts");
    // Only the momentum and reshuffling recursions carry a beta term.
    const bool heavy = trace.method_id == "momentum" || trace.method_id == "rr";
    const double beta = heavy ? trace.params.beta : 0.0;
    std::uint64_t worst = 0;
    for (std::size_t j = 0; j < trace.selected_subgrads.size(); ++j) {
        const Point& x = trace.points[j];
        const Point& xp = j == 0 ? trace.x_minus1 : trace.points[j - 1];
        const Point next =
            momentum_step(x, xp, trace.selected_subgrads[j], trace.params.alpha, beta);
        for (std::size_t i = 0; i < next.size(); ++i)
            worst = std::max(worst, ulp_distance(next[i], trace.points[j + 1][i]));
    }
    return worst;
}

void recompute_subgradients(IterateTrace& trace, const ObjectiveSpec& spec) {
    const auto& pts = trace.points;
    if (pts.empty()) throw std::invalid_argument("trace has no points");
    const MethodParams& p = trace.params;
    const std::size_t steps = pts.size() - 1;
    std::vector<Point> gs;
    gs.reserve(steps);
    auto prev = [&](std::size_t j) -> const Point& { return j == 0 ? trace.x_minus1 : pts[j - 1]; };
    if (trace.method_id == "sg") {
        for (std::size_t j = 0; j < steps; ++j) gs.push_back(subgradient_select(spec, pts[j], p.selection));
    } else if (trace.method_id == "momentum") {
        for (std::size_t j = 0; j < steps; ++j)
            gs.push_back(subgradient_select(spec, look_ahead(pts[j], prev(j), p.gamma), p.selection));
    } else if (trace.method_id == "rr" || trace.method_id == "cd") {
        const bool rr = trace.method_id == "rr";
        const std::size_t width = rr ? spec.components.size() : spec.n;
        if (width == 0 || steps % width != 0 || trace.permutations.size() != steps / width)
            throw std::invalid_argument("trace permutations do not match its step count");
        for (std::size_t j = 0; j < steps; ++j) {
            const std::size_t idx = trace.permutations[j / width][j % width];
            if (idx >= width) throw std::invalid_argument("permutation entry out of range");
            if (rr) {
                gs.push_back(spec.components[idx].subgrad(look_ahead(pts[j], prev(j), p.gamma), p.selection));
            } else {
                const Point full = spec.gradient(pts[j]);
                Point g(spec.n, 0.0);
                g[idx] = full[idx];
                gs.push_back(std::move(g));
            }
        }
    } else {
        throw std::invalid_argument("unknown method tag '" + trace.method_id + "'");
    }
    trace.selected_subgrads = std::move(gs);
}

bool permutations_valid(const IterateTrace& trace) {
    for (const auto& p : trace.permutations) {
        std::vector<bool> seen(p.size(), false);
        for (std::size_t v : p) {
            if (v >= p.size() || seen[v]) return false;
            seen[v] = true;
        }
    }
    return true;
}

}  // namespace nsolab
