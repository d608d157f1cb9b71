#include "nsolab/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nsolab/analysis.hpp"
#include "nsolab/flow.hpp"
#include "nsolab/hull.hpp"
#include "nsolab/parallel.hpp"
#include "nsolab/rng.hpp"

namespace nsolab {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::stable_evidence: return "stable_evidence";
        case Verdict::escape_evidence: return "escape_evidence";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LineFit {
    double slope = kNaN;
    double intercept = kNaN;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit f;
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 2) return f;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

// Bins (key, value) pairs into `nbins` equal-width bins over the key range
// and returns (mean key, max value) for every nonempty bin.
std::pair<std::vector<double>, std::vector<double>> binned_max(const std::vector<double>& keys,
                                                               const std::vector<double>& vals,
                                                               std::size_t nbins) {
    std::vector<double> bk, bv;
    if (keys.empty() || nbins == 0) return {bk, bv};
    const auto [lo_it, hi_it] = std::minmax_element(keys.begin(), keys.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return {{lo}, {*std::max_element(vals.begin(), vals.end())}};
    std::vector<double> sum(nbins, 0.0), mx(nbins, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> cnt(nbins, 0);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto b = static_cast<std::size_t>((keys[i] - lo) / (hi - lo) * static_cast<double>(nbins));
        b = std::min(b, nbins - 1);
        sum[b] += keys[i];
        ++cnt[b];
        mx[b] = std::max(mx[b], vals[i]);
    }
    for (std::size_t b = 0; b < nbins; ++b) {
        if (cnt[b] == 0) continue;
        bk.push_back(sum[b] / static_cast<double>(cnt[b]));
        bv.push_back(mx[b]);
    }
    return {bk, bv};
}

// x* + rho u with u uniform in the unit ball and rho log-uniform over
// `decades` decades below `radius`.
Point multiscale_sample(CounterRng& rng, const Point& center, double radius, double decades) {
    const double rho = radius * std::pow(10.0, -decades * rng.uniform());
    return rng.in_ball(center, rho);
}

// Independent log-uniform scale per coordinate, so curved approaches like x2 ~ x1^2 get sampled.
Point anisotropic_sample(CounterRng& rng, const Point& center, double radius, double decades) {
    Point x = center;
    const double side = radius / std::sqrt(static_cast<double>(center.size()));
    for (auto& v : x) {
        const double mag = side * std::pow(10.0, -decades * rng.uniform());
        v += rng.uniform() < 0.5 ? -mag : mag;
    }
    return x;
}

std::size_t tail_start(std::size_t count, double fraction) {
    const auto len = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count)));
    return count - std::max<std::size_t>(1, std::min(len, count));
}

}  // namespace

ProbeReport probe_local_stability(const ObjectiveSpec& spec, const Point& x_star,
                                  const StabilityProbeParams& p) {
    if (p.delta_grid.empty() || p.alpha_grid.empty())
        throw PreconditionError("probe_local_stability: grids must be nonempty");
    for (double v : p.delta_grid)
        if (!(v > 0.0)) throw PreconditionError("probe_local_stability: delta grid must be positive");
    for (double v : p.alpha_grid)
        if (!(v > 0.0)) throw PreconditionError("probe_local_stability: alpha grid must be positive");

    ProbeReport rep;
    rep.probe = "local_stability";
    rep.objective = spec.id;
    rep.delta_grid = p.delta_grid;
    rep.alpha_grid = p.alpha_grid;
    const std::size_t nd = p.delta_grid.size(), na = p.alpha_grid.size();
    const std::size_t total = nd * na * p.trials;
    rep.runs.resize(total);
    std::vector<Point> escape_points(total);

    parallel_for(total, p.jobs, [&](std::size_t idx) {
        const std::size_t cell = idx / std::max<std::size_t>(p.trials, 1);
        const double delta = p.delta_grid[cell / na];
        const double alpha = p.alpha_grid[cell % na];
        CounterRng rng(derive_seed(p.seed, idx));
        RunRecord r;
        r.cell = cell;
        r.trial = idx % std::max<std::size_t>(p.trials, 1);
        r.alpha = alpha;
        r.x0 = rng.in_ball(x_star, delta);
        Point x = r.x0;
        for (std::size_t k = 0; k <= p.K; ++k) {
            if (k > 0) {
                const Point g = subgradient_select(spec, x, p.selection);
                for (std::size_t i = 0; i < x.size(); ++i) x[i] -= alpha * g[i];
                if (!all_finite(x) || norm(x) > 1e12) {
                    r.diverged = true;
                    r.escaped = true;
                    r.escape_step = k;
                    break;
                }
            }
            if (distance(x, x_star) > p.epsilon) {
                r.escaped = true;
                r.escape_step = k;
                break;
            }
        }
        r.final_f = r.diverged ? kNaN : spec.value(x);
        if (r.escaped) escape_points[idx] = x;
        rep.runs[idx] = std::move(r);
    });

    rep.escape_fraction.assign(nd, std::vector<double>(na, 0.0));
    for (std::size_t idx = 0; idx < total; ++idx) {
        const RunRecord& r = rep.runs[idx];
        if (!r.escaped) continue;
        rep.escape_fraction[r.cell / na][r.cell % na] += 1.0 / static_cast<double>(p.trials);
        if (!rep.witness) rep.witness = Witness{r.x0, r.alpha, r.escape_step, escape_points[idx]};
    }
    // Stable evidence needs some cell whose finer cells (smaller delta and
    // alpha) all have zero escapes; with decreasing grids that is exactly
    // the finest cell.
    if (p.trials == 0) {
        rep.verdict = Verdict::inconclusive;
    } else {
        bool found_clean_block = false;
        for (std::size_t i = 0; i < nd && !found_clean_block; ++i)
            for (std::size_t j = 0; j < na && !found_clean_block; ++j) {
                bool clean = true;
                for (std::size_t a = 0; a < nd; ++a)
                    for (std::size_t b = 0; b < na; ++b)
                        if (p.delta_grid[a] <= p.delta_grid[i] && p.alpha_grid[b] <= p.alpha_grid[j] &&
                            rep.escape_fraction[a][b] > 0.0)
                            clean = false;
                found_clean_block = clean;
            }
        rep.verdict = found_clean_block ? Verdict::stable_evidence : Verdict::escape_evidence;
    }
    rep.fitted["epsilon"] = p.epsilon;
    rep.fitted["trials"] = static_cast<double>(p.trials);
    rep.fitted["K"] = static_cast<double>(p.K);
    rep.fitted["finest_cell_escape_fraction"] = rep.escape_fraction.back().back();
    return rep;
}

BoundaryExit probe_boundary_exit_strict2d(double epsilon, double alpha, double t) {
    if (!(t >= 0.0 && t < 1.0)) throw PreconditionError("boundary exit: t must lie in [0, 1)");
    if (!(epsilon > 0.0) || !(alpha > 0.0))
        throw PreconditionError("boundary exit: epsilon and alpha must be positive");
    const Point end = analysis::strict2d_segment_end(epsilon);
    static const ObjectiveSpec spec = catalog_get("strict2d");
    BoundaryExit out;
    out.start = {t * end[0], t * end[1]};
    const Point g = subgradient_select(spec, out.start, SubgradientSelection::min_norm());
    out.after = {out.start[0] - alpha * g[0], out.start[1] - alpha * g[1]};
    out.after_one_step_norm = norm(out.after);
    return out;
}

ProbeReport probe_global_stability(const ObjectiveSpec& spec, const GlobalProbeParams& p) {
    if (p.box_lo.size() != spec.n || p.box_hi.size() != spec.n)
        throw PreconditionError("probe_global_stability: box dimension mismatch");
    if (p.alpha_grid.empty()) throw PreconditionError("probe_global_stability: empty alpha grid");

    ProbeReport rep;
    rep.probe = "global_stability";
    rep.objective = spec.id;
    rep.alpha_grid = p.alpha_grid;
    const std::size_t na = p.alpha_grid.size();
    const std::size_t total = na * p.trials;
    rep.runs.resize(total);
    std::vector<Point> last_points(total);
    std::vector<char> pointwise_ok(total, 0), hull_ok(total, 0);

    parallel_for(total, p.jobs, [&](std::size_t idx) {
        const std::size_t cell = idx / std::max<std::size_t>(p.trials, 1);
        CounterRng rng(derive_seed(p.seed, idx));
        RunRecord r;
        r.cell = cell;
        r.trial = idx % std::max<std::size_t>(p.trials, 1);
        r.alpha = p.alpha_grid[cell];
        r.x0 = rng.in_box(p.box_lo, p.box_hi);
        MethodParams mp;
        mp.alpha = r.alpha;
        mp.beta = p.beta;
        mp.gamma = p.gamma;
        mp.seed = derive_seed(p.seed ^ 0x9e3779b97f4a7c15ULL, idx);
        mp.selection = p.selection;
        IterateTrace tr;
        try {
            if (p.method == "sg") tr = run_subgradient(spec, r.x0, mp, p.K);
            else if (p.method == "momentum") tr = run_momentum(spec, r.x0, r.x0, mp, p.K);
            else if (p.method == "rr") tr = run_reshuffling(spec, r.x0, r.x0, mp, p.K);
            else if (p.method == "cd") tr = run_cyclic_cd(spec, r.x0, mp, p.K);
            else throw PreconditionError("unknown method '" + p.method + "'");
        } catch (const DivergenceError& e) {
            r.diverged = true;
            r.escaped = true;
            last_points[idx] = e.partial().points.back();
            rep.runs[idx] = std::move(r);
            return;
        }
        const auto& outer = tr.outer_index;
        const std::size_t start = tail_start(outer.size(), p.tail_fraction);
        double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin, fsum = 0.0;
        double dmin = std::numeric_limits<double>::infinity();
        std::vector<Point> tail_subgrads;
        for (std::size_t q = start; q < outer.size(); ++q) {
            const Point& x = tr.points[outer[q]];
            const double f = tr.f_values[outer[q]];
            fmin = std::min(fmin, f);
            fmax = std::max(fmax, f);
            fsum += f;
            const MinNormResult mn = min_norm_subgradient(spec, x);
            dmin = std::min(dmin, mn.norm);
            tail_subgrads.push_back(mn.vector);
        }
        r.tail_oscillation = fmax - fmin;
        r.tail_f = fsum / static_cast<double>(outer.size() - start);
        r.tail_min_dist = dmin;
        r.tail_hull_dist = wolfe_min_norm_point(unique_points(std::move(tail_subgrads))).norm;
        r.final_f = tr.f_values.back();
        pointwise_ok[idx] = r.tail_oscillation <= p.epsilon && r.tail_min_dist <= p.epsilon;
        hull_ok[idx] = r.tail_oscillation <= p.epsilon && r.tail_hull_dist <= p.epsilon;
        r.escaped = !pointwise_ok[idx];
        r.escape_step = tr.points.size() - 1;
        last_points[idx] = tr.points.back();
        rep.runs[idx] = std::move(r);
    });

    rep.escape_fraction.assign(1, std::vector<double>(na, 0.0));
    bool all_pointwise = p.trials > 0, all_hull = p.trials > 0;
    double max_osc = 0.0, max_dmin = 0.0, max_hull = 0.0, min_level = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < total; ++idx) {
        const RunRecord& r = rep.runs[idx];
        all_pointwise = all_pointwise && pointwise_ok[idx];
        all_hull = all_hull && hull_ok[idx];
        if (r.diverged) {
            max_osc = max_dmin = max_hull = std::numeric_limits<double>::infinity();
        } else {
            max_osc = std::max(max_osc, r.tail_oscillation);
            max_dmin = std::max(max_dmin, r.tail_min_dist);
            max_hull = std::max(max_hull, r.tail_hull_dist);
            min_level = std::min(min_level, r.tail_f);
        }
        if (r.escaped) {
            rep.escape_fraction[0][r.cell] += 1.0 / static_cast<double>(p.trials);
            if (!rep.witness) rep.witness = Witness{r.x0, r.alpha, r.escape_step, last_points[idx]};
        }
    }
    // A run counts as stabilized when the window is flat and either measure
    // certifies near-stationarity; the flags keep the two measures apart.
    rep.verdict = (all_pointwise || all_hull) ? Verdict::stable_evidence : Verdict::inconclusive;
    rep.flags["pointwise_pass"] = all_pointwise;
    rep.flags["hull_pass"] = all_hull;
    rep.fitted["epsilon"] = p.epsilon;
    rep.fitted["max_tail_oscillation"] = max_osc;
    rep.fitted["max_tail_min_dist"] = max_dmin;
    rep.fitted["max_tail_hull_dist"] = max_hull;
    rep.fitted["min_tail_level"] = min_level;
    rep.notes.push_back("tail window: last " + std::to_string(p.tail_fraction) +
                        " of the outer iterates; method " + p.method);
    if (p.method == "rr" && !spec.components_regular)
        rep.notes.push_back("components of " + spec.id + " are not known to be subdifferentially regular");
    return rep;
}

ChetaevLedger chetaev_increment_check(const IterateTrace& trace, const ObjectiveSpec& spec) {
    if (!spec.chetaev || !spec.critical_set)
        throw UnsupportedOracleError(spec.id + ": Chetaev ledger needs chetaev and critical_set");
    if (trace.method_id != "sg")
        throw PreconditionError("Chetaev ledger applies to subgradient-method traces");
    const ChetaevBundle& ch = *spec.chetaev;
    const CriticalSetOracle& cs = *spec.critical_set;
    const double alpha = trace.params.alpha;
    const double c1 = ch.c1_of_alpha(alpha);

    ChetaevLedger L;
    const std::size_t steps = trace.steps();
    L.increments.reserve(steps);
    L.predicted.reserve(steps);
    L.identity_errors.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const Point& x = trace.points[k];
        const Point& nx = trace.points[k + 1];
        const Point& g = trace.selected_subgrads[k];
        const double inc = ch.increment ? ch.increment(x, nx) : ch.C(nx) - ch.C(x);
        const double pred = ch.predicted_increment ? ch.predicted_increment(x, g, alpha) : kNaN;
        double err = std::abs(inc - pred);
        if (ch.increment_scale) {
            const double scale = ch.increment_scale(x, g, alpha);
            err = scale > 0.0 ? err / scale : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        }
        L.increments.push_back(inc);
        L.predicted.push_back(pred);
        L.identity_errors.push_back(err);
        L.max_identity_error_all = std::max(L.max_identity_error_all, err);

        if (!L.truncated && distance(x, ch.anchor) > ch.neighborhood_radius) {
            L.truncated = true;
            L.truncated_at = k;
        }
        if (L.truncated) continue;
        const double residual = inc - c1 * std::pow(cs.distance(x), ch.theta1);
        L.residuals.push_back(residual);
        L.min_slack = std::min(L.min_slack, residual);
        L.max_identity_error = std::max(L.max_identity_error, err);
    }
    if (!L.truncated) L.truncated_at = steps;
    return L;
}

ProbeReport probe_strong_instability(const ObjectiveSpec& spec, const Point& x_star,
                                     const InstabilityParams& p) {
    if (!(p.alpha_lo > 0.0) || p.alpha_hi < p.alpha_lo)
        throw PreconditionError("instability probe: need 0 < alpha_lo <= alpha_hi");

    ProbeReport rep;
    rep.probe = "strong_instability";
    rep.objective = spec.id;
    rep.runs.resize(p.trials);
    std::vector<Point> escape_points(p.trials);
    const double radius = p.radius0 * (1.0 + norm(x_star));

    parallel_for(p.trials, p.jobs, [&](std::size_t idx) {
        CounterRng rng(derive_seed(p.seed, idx));
        RunRecord r;
        r.trial = idx;
        r.alpha = rng.uniform(p.alpha_lo, p.alpha_hi);
        r.x0 = rng.in_ball(x_star, radius);
        MethodParams mp;
        mp.alpha = r.alpha;
        mp.selection = p.selection;
        IterateTrace tr;
        try {
            tr = run_subgradient(spec, r.x0, mp, p.K);
        } catch (const DivergenceError& e) {
            tr = e.partial();
            r.diverged = true;
        }
        const std::size_t usable = r.diverged ? tr.points.size() - 1 : tr.points.size();
        for (std::size_t k = 0; k < usable; ++k) {
            if (distance(tr.points[k], x_star) > p.epsilon) {
                r.escaped = true;
                r.escape_step = k;
                escape_points[idx] = tr.points[k];
                break;
            }
        }
        if (r.diverged && !r.escaped) {
            r.escaped = true;
            r.escape_step = tr.points.size() - 1;
            escape_points[idx] = tr.points.back();
        }
        if (!r.diverged) {
            r.final_f = tr.f_values.back();
            const std::size_t start = tail_start(tr.f_values.size(), 0.2);
            double s = 0.0;
            for (std::size_t k = start; k < tr.f_values.size(); ++k) s += tr.f_values[k];
            r.tail_f = s / static_cast<double>(tr.f_values.size() - start);
        }
        if (!r.diverged && spec.chetaev && spec.critical_set) {
            const ChetaevLedger L = chetaev_increment_check(tr, spec);
            r.ledger_steps = L.truncated_at;
            r.ledger_truncated = L.truncated;
            r.ledger_identity_error = L.max_identity_error;
            r.ledger_identity_error_all = L.max_identity_error_all;
            r.ledger_min_slack = L.min_slack;
        }
        rep.runs[idx] = std::move(r);
    });

    std::size_t escaped = 0;
    double worst_identity = 0.0, worst_identity_all = 0.0, max_tail = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < p.trials; ++idx) {
        const RunRecord& r = rep.runs[idx];
        if (r.escaped) {
            ++escaped;
            if (!rep.witness) rep.witness = Witness{r.x0, r.alpha, r.escape_step, escape_points[idx]};
        }
        if (!std::isnan(r.ledger_identity_error)) {
            worst_identity = std::max(worst_identity, r.ledger_identity_error);
            worst_identity_all = std::max(worst_identity_all, r.ledger_identity_error_all);
        }
        if (!std::isnan(r.tail_f)) max_tail = std::max(max_tail, r.tail_f);
    }
    const double frac = p.trials ? static_cast<double>(escaped) / static_cast<double>(p.trials) : 0.0;
    rep.escape_fraction = {{frac}};
    rep.alpha_grid = {p.alpha_lo, p.alpha_hi};
    rep.verdict = p.trials == 0 ? Verdict::inconclusive
                  : escaped > 0 ? Verdict::escape_evidence
                                : Verdict::stable_evidence;
    rep.fitted["escape_fraction"] = frac;
    rep.fitted["epsilon"] = p.epsilon;
    rep.fitted["start_radius"] = radius;
    if (spec.chetaev) {
        rep.fitted["max_identity_error"] = worst_identity;
        rep.fitted["max_identity_error_all_steps"] = worst_identity_all;
    }
    rep.fitted["max_tail_f"] = max_tail;
    rep.fitted["f_star"] = spec.value(x_star);
    return rep;
}

SubregularityFit fit_metric_subregularity(const ObjectiveSpec& spec, const Point& x_star,
                                          double sample_radius, std::size_t samples,
                                          std::uint64_t seed) {
    if (!spec.critical_set) throw UnsupportedOracleError(spec.id + ": no critical-set oracle");
    CounterRng rng(seed, 0x7372ULL);
    std::vector<double> lg, ld;
    SubregularityFit fit;
    fit.g_min = fit.d_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const Point x = rng.in_ball(x_star, sample_radius);
        double g, d;
        try {
            g = min_norm_subgradient(spec, x).norm;
            d = distance_to_critical(spec, x);
        } catch (const UnsupportedOracleError&) {
            continue;
        } catch (const OutOfNeighborhoodError&) {
            continue;
        }
        if (!(g > 0.0) || !(d > 0.0) || !std::isfinite(g) || !std::isfinite(d)) continue;
        lg.push_back(std::log(g));
        ld.push_back(std::log(d));
        fit.c_unit = std::max(fit.c_unit, d / g);
        fit.g_min = std::min(fit.g_min, g);
        fit.g_max = std::max(fit.g_max, g);
        fit.d_min = std::min(fit.d_min, d);
        fit.d_max = std::max(fit.d_max, d);
    }
    fit.valid = lg.size();
    if (fit.valid < 10)
        throw InsufficientDataError("fit_metric_subregularity: fewer than 10 valid samples");
    fit.bounded_away = std::log10(fit.g_max / fit.g_min) < 1.0 && std::log10(fit.d_max / fit.d_min) >= 2.0;
    const std::size_t nbins = std::clamp<std::size_t>(fit.valid / 20, 2, 25);
    const auto [bx, by] = binned_max(lg, ld, nbins);
    fit.bins = bx.size();
    const LineFit lf = least_squares(bx, by);
    fit.theta2 = lf.slope;
    fit.c2 = std::exp(lf.intercept);
    return fit;
}

double verdier_ratio(const ObjectiveSpec& spec, const Point& y, const Point& x, const Point& v) {
    if (!spec.critical_set) throw UnsupportedOracleError(spec.id + ": no critical-set oracle");
    const auto& cs = *spec.critical_set;
    const Point pt = cs.tangent_project(y, v);
    const Point rg = cs.riemannian_grad(y);
    return distance(pt, rg) / distance(x, y);
}

double verdier_ratio(const ObjectiveSpec& spec, const Point& y, const Point& x) {
    std::vector<Point> vs;
    if (spec.has_generators()) vs = spec.generators(x);
    else vs.push_back(subgradient_select(spec, x, SubgradientSelection::sign()));
    double best = 0.0;
    for (const auto& v : vs) best = std::max(best, verdier_ratio(spec, y, x, v));
    return best;
}

VerdierScan verdier_ratio_scan(const ObjectiveSpec& spec, const Point& x_star, double sample_radius,
                               std::size_t samples, std::uint64_t seed) {
    if (!spec.critical_set) throw UnsupportedOracleError(spec.id + ": no critical-set oracle");
    const auto& cs = *spec.critical_set;
    CounterRng rng(seed, 0x7665ULL);
    VerdierScan scan;
    std::vector<double> logd, logr;
    for (std::size_t i = 0; i < samples; ++i) {
        const Point x = (i / 2) % 2 == 0 ? multiscale_sample(rng, x_star, sample_radius, 6.0)
                                         : anisotropic_sample(rng, x_star, sample_radius, 6.0);
        const double dx = cs.distance(x);
        if (!(dx > 0.0)) continue;
        Point y;
        if (i % 2 == 0) {
            y = cs.project(x);
        } else {
            y = cs.project(rng.in_ball(x, dx));
        }
        if (distance(y, cs.anchor) > cs.valid_radius || distance(x, cs.anchor) > cs.valid_radius) continue;
        const double dist = distance(x, y);
        if (!(dist > 0.0)) continue;
        const double ratio = verdier_ratio(spec, y, x);
        if (!std::isfinite(ratio)) continue;
        if (ratio > scan.sup_ratio) {
            scan.sup_ratio = ratio;
            scan.argmax_x = x;
            scan.argmax_y = y;
        }
        logd.push_back(std::log10(dist));
        logr.push_back(std::log10(std::max(ratio, 1e-300)));
    }
    scan.valid = logd.size();
    if (scan.valid < 10) throw InsufficientDataError("verdier_ratio_scan: fewer than 10 valid samples");
    const double lo = *std::min_element(logd.begin(), logd.end());
    const double hi = *std::max_element(logd.begin(), logd.end());
    const auto nbins = static_cast<std::size_t>(std::max(2.0, std::ceil(hi - lo)));
    const auto [bx, by] = binned_max(logd, logr, nbins);
    for (std::size_t b = 0; b < bx.size(); ++b) {
        scan.bin_distance.push_back(std::pow(10.0, bx[b]));
        scan.bin_sup.push_back(std::pow(10.0, by[b]));
    }
    const LineFit lf = least_squares(bx, by);
    scan.slope = std::isnan(lf.slope) ? 0.0 : lf.slope;
    const auto [mn, mx] = std::minmax_element(scan.bin_sup.begin(), scan.bin_sup.end());
    const double range = *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
    scan.diverging = scan.slope <= -0.25 && range > 4.0;
    return scan;
}

double sharp_weak_gap(const ObjectiveSpec& spec, const Point& x_star, const Point& x, const Point& s,
                      double rho) {
    const Point d = sub(x, x_star);
    return spec.value(x) - spec.value(x_star) - dot(d, s) - 0.5 * rho * norm2(d);
}

SharpWeakResult sharp_weak_check(const ObjectiveSpec& spec, const Point& x_star, double sample_radius,
                                 std::size_t samples, std::uint64_t seed) {
    SharpWeakResult res;
    res.rho_grid = {0.0, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
    const double fstar = spec.value(x_star);
    CounterRng rng(seed, 0x7377ULL);
    constexpr double eps = std::numeric_limits<double>::epsilon();

    // Largest tolerance-adjusted gap per grid value, with its witness.
    std::vector<double> worst(res.rho_grid.size(), -std::numeric_limits<double>::infinity());
    std::vector<SharpWeakViolation> worst_at(res.rho_grid.size());
    for (std::size_t i = 0; i < samples; ++i) {
        const Point x = i % 2 == 0 ? multiscale_sample(rng, x_star, sample_radius, 12.0)
                                   : anisotropic_sample(rng, x_star, sample_radius, 12.0);
        const Point d = sub(x, x_star);
        const double r = norm(d);
        if (!(r > 0.0)) continue;
        const double fx = spec.value(x);
        res.mu_hat = std::min(res.mu_hat, (fx - fstar) / r);
        std::vector<Point> ss;
        if (spec.has_generators()) ss = spec.generators(x);
        else ss.push_back(subgradient_select(spec, x, SubgradientSelection::sign()));
        for (const auto& s : ss) {
            const double lin = dot(d, s);
            for (std::size_t q = 0; q < res.rho_grid.size(); ++q) {
                const double quad = 0.5 * res.rho_grid[q] * r * r;
                const double gap = fx - fstar - lin - quad;
                const double tol = 64.0 * eps * (std::abs(fx) + std::abs(fstar) + std::abs(lin) + quad);
                if (gap - tol > worst[q]) {
                    worst[q] = gap - tol;
                    worst_at[q] = {x, s, res.rho_grid[q], gap};
                }
            }
        }
    }
    for (std::size_t q = 0; q < res.rho_grid.size(); ++q) {
        if (worst[q] <= 0.0) {
            res.rho_hat = res.rho_grid[q];
            break;
        }
    }
    if (std::isnan(res.rho_hat) && !res.rho_grid.empty()) res.violated = worst_at.back();
    return res;
}

std::vector<ApproximationPoint> probe_trajectory_approximation(const ObjectiveSpec& spec,
                                                               const Point& x0,
                                                               const std::vector<double>& alpha_grid,
                                                               double T, double c,
                                                               const SubgradientSelection& sel) {
    std::vector<ApproximationPoint> out;
    for (double alpha : alpha_grid) {
        ApproximationPoint ap;
        ap.alpha = alpha;
        ap.K = static_cast<std::size_t>(std::floor(T / alpha + 1e-9));
        MethodParams mp;
        mp.alpha = alpha;
        mp.selection = sel;
        IterateTrace tr;
        try {
            tr = run_subgradient(spec, x0, mp, ap.K);
        } catch (const DivergenceError& e) {
            tr = e.partial();
            ap.diverged = true;
        }
        FlowParams fp;
        fp.c = c;
        fp.h = alpha / 100.0;
        fp.T = static_cast<double>(ap.K) * alpha;
        if (ap.K == 0) {
            out.push_back(ap);
            continue;
        }
        TrajectorySample flow;
        try {
            flow = integrate(spec, x0, fp);
        } catch (const FlowDivergenceError& e) {
            flow = e.partial();
            ap.diverged = true;
        }
        for (std::size_t k = 0; k < tr.points.size(); ++k) {
            const std::size_t j = 100 * k;
            if (j >= flow.states.size()) break;
            ap.sup_deviation = std::max(ap.sup_deviation, distance(tr.points[k], flow.states[j]));
        }
        out.push_back(ap);
    }
    return out;
}

}  // namespace nsolab
