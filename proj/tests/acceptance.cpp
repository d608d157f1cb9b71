// Acceptance checks. Prints one line per criterion:
//   criterion N: PASS|FAIL <detail> [<seconds>s / budget <seconds>s]
// A criterion passes only when its tolerance holds and it finishes within budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsolab/analysis.hpp"
#include "nsolab/flow.hpp"
#include "nsolab/methods.hpp"
#include "nsolab/oracles.hpp"
#include "nsolab/probes.hpp"
#include "nsolab/rng.hpp"
#include "properties.hpp"

using namespace nsolab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Tolerances pinned from the acceptance list.
constexpr double kEnergyTol = 1e-3;
constexpr double kHalvingLo = 0.4, kHalvingHi = 0.6;
constexpr double kSinBound = 0.05;
constexpr double kReluIdentityTol = 1e-14;
constexpr double kRpcaIdentityTol = 1e-10;
constexpr double kVerdierOkBound = 1.0 + 1e-6;
constexpr double kVerdierBadRatio = 20.0;
constexpr double kGlobalTol = 0.1;
constexpr double kApproxSlack = 1e-6;

Outcome criterion_1() {
    const auto spec = catalog_get("quad", {1, 0});
    const auto residual = [&](double h) {
        FlowParams fp;
        fp.h = h;
        fp.T = 1.0;
        return energy_balance(integrate(spec, {1.0}, fp), spec).residual;
    };
    const double r1 = residual(1e-4), r2 = residual(5e-5);
    const double ratio = r2 / r1;
    return {r1 <= kEnergyTol && ratio >= kHalvingLo && ratio <= kHalvingHi,
            fmt("residual(h=1e-4)=%.3e", r1) + fmt(" ratio(h/2)=%.4f", ratio)};
}

Outcome criterion_2() {
    MethodParams p;
    p.alpha = 0.01;
    const auto t = run_subgradient(catalog_get("sin_example"), {-0.01}, p, 99);
    double worst = 0.0;
    for (const auto& x : t.points) worst = std::max(worst, std::abs(x[0]));
    return {worst <= kSinBound, fmt("iterates=%.0f", static_cast<double>(t.points.size())) +
                                    fmt(" max|x_k|=%.5f", worst) + fmt(" bound=%.2f", kSinBound)};
}

Outcome criterion_3() {
    const auto spec = catalog_get("sin_example");
    bool pass = true;
    std::string detail;
    for (double eps : {0.45, 0.3, 0.2}) {
        const auto c = analysis::sin_stability_constants(eps);
        MethodParams p;
        p.alpha = c.alpha_bar;
        CounterRng rng(derive_seed(3, static_cast<std::uint64_t>(eps * 1000)));
        std::size_t escapes = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const auto t = run_subgradient(spec, {rng.uniform(-c.delta, c.delta)}, p, 10000);
            for (const auto& x : t.points) {
                if (std::abs(x[0]) > eps) {
                    ++escapes;
                    break;
                }
            }
        }
        pass = pass && escapes == 0;
        detail += fmt("eps=%.2f", eps) + fmt(" N=%.0f", static_cast<double>(c.N)) + fmt(" delta=%.5f", c.delta) +
                  fmt(" alpha_bar=%.3e", c.alpha_bar) + fmt(" escapes=%.0f; ", static_cast<double>(escapes));
    }
    return {pass, detail};
}

Outcome criterion_4() {
    StabilityProbeParams p;
    p.epsilon = 0.5;
    p.delta_grid = {0.1, 0.03, 0.01};
    p.alpha_grid = {0.01, 0.003, 0.001};
    p.trials = 100;
    p.K = 10000;
    const auto r = probe_local_stability(catalog_get("strict2d"), {0.0, 0.0}, p);
    const double finest = r.escape_fraction.back().back();
    const auto b = probe_boundary_exit_strict2d(1.0, 0.1, 0.999);
    return {finest == 0.0 && b.after_one_step_norm > 1.0,
            fmt("finest-cell escape fraction=%.3f", finest) + fmt(" coarsest=%.3f", r.escape_fraction[0][0]) +
                fmt(" boundary exit norm=%.6f", b.after_one_step_norm)};
}

Outcome criterion_5() {
    InstabilityParams p;
    p.epsilon = 0.5;
    p.radius0 = 1e-3;
    p.alpha_lo = 0.05;
    p.alpha_hi = 0.15;
    p.trials = 5;
    p.K = 10000;
    const auto r = probe_strong_instability(catalog_get("relu_net"), {1.0, 1.0, 0.0}, p);
    const double frac = r.fitted.at("escape_fraction");
    const double err = r.fitted.at("max_identity_error");
    return {frac == 1.0 && err <= kReluIdentityTol,
            fmt("escape fraction=%.2f", frac) + fmt(" max |dC - alpha|x3|| in neighborhood=%.2e", err)};
}

Outcome criterion_6() {
    const auto spec = catalog_get("rpca_l1");
    const auto& in = *spec.rpca;
    double xf2 = 0.0;
    for (std::size_t i = 0; i < in.m * in.r; ++i) xf2 += in.x_star[i] * in.x_star[i];
    InstabilityParams p;
    p.epsilon = 0.5 * std::sqrt(xf2);
    p.radius0 = 1e-3;
    p.alpha_lo = 0.01;
    p.alpha_hi = 0.02;
    p.trials = 20;
    p.K = 1000;
    const auto r = probe_strong_instability(spec, in.x_star, p);
    const double frac = r.fitted.at("escape_fraction");
    const double err = r.fitted.at("max_identity_error_all_steps");
    const double l1 = in.l1_norm_M();
    bool below = true;
    for (const auto& run : r.runs) below = below && run.tail_f < l1;
    return {frac == 1.0 && err <= kRpcaIdentityTol && below,
            fmt("escape fraction=%.2f", frac) + fmt(" max relative identity error=%.2e", err) +
                fmt(" max tail f=%.4f", r.fitted.at("max_tail_f")) + fmt(" ||M||_1=%.4f", l1)};
}

Outcome criterion_7() {
    const auto ok = verdier_ratio_scan(catalog_get("verdier_ok"), {1.0, 1.0}, 0.4, 2000, 3);
    const auto bad = verdier_ratio_scan(catalog_get("verdier_bad"), {0.0, 0.0}, 0.4, 2000, 3);
    const auto relu = verdier_ratio_scan(catalog_get("relu_net"), {1.0, 1.0, 0.0}, 0.3, 2000, 3);
    // Counterexample sequence at k = 10 with the subgradient (-2/k, 2) of the active piece -x1^2 + 2 x2.
    const double k = 10.0;
    const double seq = verdier_ratio(catalog_get("verdier_bad"), {1.0 / k, 0.0}, {1.0 / k, 1.0 / (k * k)},
                                     {-2.0 / k, 2.0});
    const bool pass = ok.sup_ratio <= kVerdierOkBound && !ok.diverging && bad.diverging &&
                      seq >= kVerdierBadRatio && relu.sup_ratio <= std::sqrt(5.0) + 1e-6;
    return {pass, fmt("verdier_ok sup=%.6f", ok.sup_ratio) + (ok.diverging ? " diverging" : " bounded") +
                      fmt("; verdier_bad slope=%.3f", bad.slope) + (bad.diverging ? " diverging" : " bounded") +
                      fmt(" ratio(k=10)=%.6f", seq) + fmt("; relu_net sup=%.6f", relu.sup_ratio)};
}

Outcome criterion_8() {
    const auto spec = catalog_get("global_l1");
    struct Variant {
        std::string method;
        double alpha;
        double beta;
    };
    const std::vector<Variant> variants = {{"sg", 1e-3, 0.0}, {"momentum", 1e-3 * (1.0 - 0.5), 0.5},
                                           {"rr", 1e-3 / 3.0, 0.0}};
    bool literal = true, hull = true;
    std::string detail;
    for (const auto& v : variants) {
        GlobalProbeParams p;
        p.box_lo = {-2.0, -2.0};
        p.box_hi = {2.0, 2.0};
        p.epsilon = kGlobalTol;
        p.alpha_grid = {v.alpha};
        p.trials = 50;
        p.K = 200000;
        p.method = v.method;
        p.beta = v.beta;
        const auto r = probe_global_stability(spec, p);
        literal = literal && r.flags.at("pointwise_pass");
        hull = hull && r.flags.at("hull_pass");
        detail += v.method + fmt(" osc=%.4f", r.fitted.at("max_tail_oscillation")) +
                  fmt(" tail-min d(0,df)=%.4f", r.fitted.at("max_tail_min_dist")) +
                  fmt(" [hull measure %.2e]; ", r.fitted.at("max_tail_hull_dist"));
    }
    detail += std::string("literal measure ") + (literal ? "passes" : "fails") + ", hull measure " +
              (hull ? "passes" : "fails");
    return {literal, detail};
}

Outcome criterion_9() {
    const std::vector<double> alphas = {0.1, 0.05, 0.025};
    bool pass = true;
    std::string detail;
    const auto check = [&](const std::string& name, const ObjectiveSpec& spec, const Point& x0) {
        const auto pts = probe_trajectory_approximation(spec, x0, alphas, 1.0, 1.0);
        detail += name;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pass = pass && pts[i].sup_deviation <= pts[i].alpha + kApproxSlack;
            if (i > 0) pass = pass && pts[i].sup_deviation < pts[i - 1].sup_deviation;
            detail += fmt(" %.4f", pts[i].sup_deviation);
        }
        detail += "; ";
    };
    check("quad x0=1:", catalog_get("quad", {1, 0}), {1.0});
    check("abs1d x0=0.5:", catalog_get("abs1d"), {0.5});
    return {pass, detail};
}

Outcome criterion_10() {
    bool pass = true;
    std::string detail;
    for (const auto& r : testing::all_property_suites()) {
        pass = pass && r.pass;
        detail += testing::describe(r) + "; ";
    }
    return {pass, detail};
}

struct Criterion {
    std::function<Outcome()> run;
    double budget_seconds;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria = {
        {criterion_1, 1.0},  {criterion_2, 0.1},  {criterion_3, 5.0},  {criterion_4, 30.0},
        {criterion_5, 5.0},  {criterion_6, 60.0}, {criterion_7, 10.0}, {criterion_8, 300.0},
        {criterion_9, 10.0}, {criterion_10, 60.0},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (only != 0 && only != id) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs < criteria[i].budget_seconds;
        const bool pass = o.pass && in_budget;
        if (!pass) ++failures;
        std::printf("criterion %d: %s %s [%.3fs / budget %.1fs%s]\n", id, pass ? "PASS" : "FAIL", o.detail.c_str(),
                    secs, criteria[i].budget_seconds, in_budget ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
