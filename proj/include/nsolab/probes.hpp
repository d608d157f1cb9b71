#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsolab/methods.hpp"
#include "nsolab/oracles.hpp"
#include "nsolab/types.hpp"

namespace nsolab {

enum class Verdict { stable_evidence, escape_evidence, inconclusive };
std::string to_string(Verdict v);

struct Witness {
    Point x0;
    double alpha = 0.0;
    std::size_t k = 0;
    Point xk;
};

/// Per-run summary kept in reports. Fields that a probe does not compute
/// stay NaN / false.
struct RunRecord {
    std::size_t cell = 0;
    std::size_t trial = 0;
    double alpha = 0.0;
    Point x0;
    bool escaped = false;
    bool diverged = false;
    std::size_t escape_step = 0;
    double final_f = std::numeric_limits<double>::quiet_NaN();
    double tail_f = std::numeric_limits<double>::quiet_NaN();
    double tail_oscillation = std::numeric_limits<double>::quiet_NaN();
    double tail_min_dist = std::numeric_limits<double>::quiet_NaN();  // min_k d(0, df(x_k))
    double tail_hull_dist = std::numeric_limits<double>::quiet_NaN(); // d(0, conv of tail subgradients)
    std::size_t ledger_steps = 0;
    bool ledger_truncated = false;
    double ledger_identity_error = std::numeric_limits<double>::quiet_NaN();
    double ledger_identity_error_all = std::numeric_limits<double>::quiet_NaN();
    double ledger_min_slack = std::numeric_limits<double>::quiet_NaN();
};

struct ProbeReport {
    std::string probe;
    std::string objective;
    Verdict verdict = Verdict::inconclusive;
    std::vector<double> delta_grid;
    std::vector<double> alpha_grid;
    std::vector<std::vector<double>> escape_fraction;  // [delta index][alpha index]
    std::optional<Witness> witness;
    std::map<std::string, double> fitted;
    std::map<std::string, bool> flags;
    std::vector<RunRecord> runs;
    std::vector<std::string> notes;
};

struct StabilityProbeParams {
    double epsilon = 0.1;
    std::vector<double> delta_grid{0.1};
    std::vector<double> alpha_grid{0.1};
    std::size_t trials = 100;
    std::size_t K = 10000;
    std::uint64_t seed = 0;
    SubgradientSelection selection = SubgradientSelection::sign();
    std::size_t jobs = 0;  // 0 = default_jobs()
};

/// Escape means some iterate satisfies ||x_k - x*|| > epsilon (the closed
/// ball counts as inside). Diverged runs count as escapes.
ProbeReport probe_local_stability(const ObjectiveSpec& spec, const Point& x_star,
                                  const StabilityProbeParams& p);

struct BoundaryExit {
    Point start;
    Point after;
    double after_one_step_norm = 0.0;
};

/// Point t * (a, b) on the segment from the origin to the point where the
/// two pieces of strict2d meet on the circle of radius epsilon, followed by
/// one min-norm subgradient step. Requires 0 <= t < 1.
BoundaryExit probe_boundary_exit_strict2d(double epsilon, double alpha, double t);

struct GlobalProbeParams {
    Point box_lo;
    Point box_hi;
    double epsilon = 0.1;
    std::vector<double> alpha_grid{1e-3};
    std::size_t trials = 50;
    std::size_t K = 200000;            // iterations, or epochs for rr / cd
    std::string method = "sg";         // sg | momentum | rr | cd
    double beta = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    SubgradientSelection selection = SubgradientSelection::sign();
    double tail_fraction = 0.2;
    std::size_t jobs = 0;
};

/// Tail test on the outer iterates x_k. A run passes when
/// (a) max - min of f over the tail window is <= epsilon, and
/// (b) min over the tail of d(0, df(x_k)) is <= epsilon.
/// The report also carries d(0, conv{min-norm subgradients over the tail}),
/// flag "hull_pass", as a window-level stationarity measure. The verdict is
/// stable_evidence when every run passes under either measure.
ProbeReport probe_global_stability(const ObjectiveSpec& spec, const GlobalProbeParams& p);

struct InstabilityParams {
    double epsilon = 0.5;
    double radius0 = 1e-3;
    double alpha_lo = 0.05;
    double alpha_hi = 0.15;
    std::size_t trials = 5;
    std::size_t K = 10000;
    std::uint64_t seed = 0;
    SubgradientSelection selection = SubgradientSelection::sign();
    std::size_t jobs = 0;
};

/// Starts uniform in B(x*, radius0 (1 + ||x*||)), alpha uniform in
/// [alpha_lo, alpha_hi]; records escapes from B(x*, epsilon) and, when the
/// spec carries a Chetaev bundle, the ledger of each run.
ProbeReport probe_strong_instability(const ObjectiveSpec& spec, const Point& x_star,
                                     const InstabilityParams& p);

struct ChetaevLedger {
    std::vector<double> increments;       // C(x_{k+1}) - C(x_k), every step
    std::vector<double> predicted;        // closed-form increments, every step
    std::vector<double> identity_errors;  // |increment - predicted| (relative when scaled)
    std::vector<double> residuals;        // increment - c1 d(x_k, S)^theta1, in-neighborhood prefix
    double min_slack = std::numeric_limits<double>::infinity();
    double max_identity_error = 0.0;      // over the in-neighborhood prefix
    double max_identity_error_all = 0.0;  // over every step
    bool truncated = false;
    std::size_t truncated_at = 0;         // first step whose x_k left the neighborhood
};

ChetaevLedger chetaev_increment_check(const IterateTrace& trace, const ObjectiveSpec& spec);

struct SubregularityFit {
    double theta2 = std::numeric_limits<double>::quiet_NaN();
    double c2 = std::numeric_limits<double>::quiet_NaN();
    double c_unit = 0.0;           // sup d(x,S) / d(0,df(x)), the constant at exponent 1
    std::size_t valid = 0;
    std::size_t bins = 0;
    double g_min = 0.0, g_max = 0.0;  // range of d(0, df(x))
    double d_min = 0.0, d_max = 0.0;  // range of d(x, S)
    bool bounded_away = false;        // d(0, df) spans < 1 decade while d(x,S) spans >= 2
};

/// Fits log d(x,S) = log c2 + theta2 log d(0, df(x)) on binned upper envelopes.
SubregularityFit fit_metric_subregularity(const ObjectiveSpec& spec, const Point& x_star,
                                          double sample_radius, std::size_t samples,
                                          std::uint64_t seed = 0);

struct VerdierScan {
    double sup_ratio = 0.0;
    bool diverging = false;
    double slope = 0.0;                 // of log bin-sup against log ||x - y||
    std::vector<double> bin_distance;   // representative ||x - y|| per bin
    std::vector<double> bin_sup;
    std::size_t valid = 0;
    Point argmax_x, argmax_y;
};

/// ||P_{T_S(y)}(v) - grad_S f(y)|| / ||x - y||.
double verdier_ratio(const ObjectiveSpec& spec, const Point& y, const Point& x, const Point& v);

/// Largest ratio over the generators of df(x) (or the selected subgradient).
double verdier_ratio(const ObjectiveSpec& spec, const Point& y, const Point& x);

VerdierScan verdier_ratio_scan(const ObjectiveSpec& spec, const Point& x_star,
                               double sample_radius, std::size_t samples,
                               std::uint64_t seed = 0);

struct SharpWeakViolation {
    Point x;
    Point s;
    double rho = 0.0;
    double gap = 0.0;  // f(x) - f(x*) - <x - x*, s> - rho/2 ||x - x*||^2 > 0
};

struct SharpWeakResult {
    double mu_hat = std::numeric_limits<double>::infinity();
    double rho_hat = std::numeric_limits<double>::quiet_NaN();  // NaN when no grid value works
    std::optional<SharpWeakViolation> violated;
    std::vector<double> rho_grid;
};

SharpWeakResult sharp_weak_check(const ObjectiveSpec& spec, const Point& x_star,
                                 double sample_radius, std::size_t samples,
                                 std::uint64_t seed = 0);

/// f(x) - f(x*) - <x - x*, s> - rho/2 ||x - x*||^2.
double sharp_weak_gap(const ObjectiveSpec& spec, const Point& x_star, const Point& x,
                      const Point& s, double rho);

struct ApproximationPoint {
    double alpha = 0.0;
    std::size_t K = 0;
    double sup_deviation = 0.0;
    bool diverged = false;
};

/// For each alpha: K = floor(T / alpha) subgradient steps against the
/// canonical trajectory integrated with h = alpha / 100.
std::vector<ApproximationPoint> probe_trajectory_approximation(
    const ObjectiveSpec& spec, const Point& x0, const std::vector<double>& alpha_grid, double T,
    double c, const SubgradientSelection& sel = SubgradientSelection::sign());

}  // namespace nsolab
