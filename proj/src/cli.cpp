#include "nsolab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "nsolab/analysis.hpp"
#include "nsolab/flow.hpp"
#include "nsolab/io.hpp"
#include "nsolab/methods.hpp"
#include "nsolab/oracles.hpp"
#include "nsolab/parallel.hpp"
#include "nsolab/probes.hpp"
#include "nsolab/rng.hpp"

namespace nsolab::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct HelpRequested {
    std::string text;
};

struct Settings {
    std::string command;
    std::string figure;
    std::string objective;
    std::string method = "sg";
    std::vector<double> alpha;
    double beta = 0.0;
    double gamma = 0.0;
    std::vector<double> delta;
    std::uint64_t seed = 0;
    std::size_t iters = 0;
    double epsilon = kNaN;
    std::size_t trials = 0;
    std::string out;
    Point x0, x_prev, x_star, box_lo, box_hi;
    double T = 1.0;
    double h = 1e-3;
    double c = 1.0;
    bool no_slide = false;
    std::string selection = "deterministic_sign";
    std::uint64_t selection_seed = 0;
    std::size_t jobs = 0;
    std::optional<std::size_t> quad_dim;
    std::optional<std::uint64_t> rpca_seed;
    double radius0 = 1e-3;
    double alpha_lo = 0.05;
    double alpha_hi = 0.15;
    double radius = kNaN;
    std::size_t samples = 2000;
    double tail_fraction = 0.2;
};

const std::vector<std::string> kCommands = {"run",           "flow",          "probe-local",
                                            "probe-global",  "probe-instability",
                                            "check-regularity", "reproduce"};

std::string error_line(const std::string& kind, const std::string& message) {
    return json{{"error", kind}, {"message", message}}.dump();
}

// Flags taken from the config file unless the command line already has them.
std::vector<std::string> config_args(const json& cfg, const std::vector<std::string>& user) {
    auto given = [&](const std::string& flag) {
        for (const auto& a : user)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    auto scalar = [](const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
        if (v.is_number_float()) return io::format_number(v.get<double>());
        throw UsageError("config values must be strings, numbers, booleans or arrays");
    };
    std::vector<std::string> out;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "command" || key == "figure" || key == "config") continue;
        std::string flag = "--" + key;
        for (auto& ch : flag)
            if (ch == '_') ch = '-';
        if (given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
            continue;
        }
        out.push_back(flag);
        if (value.is_array()) {
            if (value.empty()) throw UsageError("config key '" + key + "' is an empty array");
            for (const auto& v : value) out.push_back(scalar(v));
        } else {
            out.push_back(scalar(value));
        }
    }
    return out;
}

Settings parse_settings(std::vector<std::string> args) {
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (config_path) {
        json cfg;
        try {
            cfg = json::parse(io::read_file(*config_path));
        } catch (const json::exception& e) {
            throw UsageError("config file '" + *config_path + "' is not valid JSON: " + e.what());
        } catch (const std::runtime_error& e) {
            throw UsageError(e.what());
        }
        if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
        const bool has_command = !args.empty() && std::find(kCommands.begin(), kCommands.end(), args[0]) != kCommands.end();
        std::vector<std::string> extra = config_args(cfg, args);
        if (!has_command && cfg.contains("command")) {
            std::vector<std::string> head{cfg["command"].get<std::string>()};
            if (cfg.contains("figure") && head[0] == "reproduce") head.push_back(cfg["figure"].get<std::string>());
            args.insert(args.begin(), head.begin(), head.end());
        } else if (has_command && args[0] == "reproduce" && cfg.contains("figure") &&
                   (args.size() < 2 || args[1].rfind("--", 0) == 0)) {
            args.insert(args.begin() + 1, cfg["figure"].get<std::string>());
        }
        args.insert(args.end(), extra.begin(), extra.end());
    }

    Settings s;
    CLI::App app{"Nonsmooth optimization stability lab", "nsolab"};
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);
    std::uint64_t rpca_seed = 0;
    app.add_option("--objective", s.objective, "catalog id");
    app.add_option("--method", s.method, "sg | momentum | rr | cd")
        ->check(CLI::IsMember({"sg", "momentum", "rr", "cd"}));
    app.add_option("--alpha", s.alpha, "step size (a grid for probes)")->delimiter(',');
    app.add_option("--beta", s.beta, "momentum coefficient");
    app.add_option("--gamma", s.gamma, "look-ahead coefficient");
    app.add_option("--delta", s.delta, "initialization bound for run, start radius grid for probe-local")
        ->delimiter(',');
    app.add_option("--seed", s.seed, "master seed");
    app.add_option("--iters", s.iters, "iterations (epochs for rr and cd)");
    app.add_option("--epsilon", s.epsilon, "neighborhood radius / tail tolerance");
    app.add_option("--trials", s.trials, "trials per probe cell");
    app.add_option("--out", s.out, "output directory");
    app.add_option("--x0", s.x0, "initial point")->delimiter(',');
    app.add_option("--x-prev", s.x_prev, "x_{-1} for momentum and reshuffling")->delimiter(',');
    app.add_option("--x-star", s.x_star, "reference point for probes")->delimiter(',');
    app.add_option("--box-lo", s.box_lo, "lower corner of the start box")->delimiter(',');
    app.add_option("--box-hi", s.box_hi, "upper corner of the start box")->delimiter(',');
    app.add_option("--T", s.T, "flow horizon");
    app.add_option("--h", s.h, "flow step");
    app.add_option("--c", s.c, "flow scaling constant");
    app.add_flag("--no-slide", s.no_slide, "plain Euler steps across kinks");
    app.add_option("--selection", s.selection, "min_norm | deterministic_sign | seeded_random_extreme");
    app.add_option("--selection-seed", s.selection_seed, "seed of the random-extreme rule");
    app.add_option("--jobs", s.jobs, "worker threads (default NSOLAB_JOBS or core count)");
    std::size_t quad_dim = 2;
    auto* quad_opt = app.add_option("--quad-dim", quad_dim, "dimension of quad (default: length of --x0, else 2)");
    auto* rpca_opt = app.add_option("--rpca-seed", rpca_seed, "seed of the synthetic RPCA matrix (default --seed)");
    app.add_option("--radius0", s.radius0, "relative start radius for probe-instability");
    app.add_option("--alpha-lo", s.alpha_lo, "lower end of the step-size interval");
    app.add_option("--alpha-hi", s.alpha_hi, "upper end of the step-size interval");
    app.add_option("--radius", s.radius, "sampling radius for check-regularity");
    app.add_option("--samples", s.samples, "samples for check-regularity");
    app.add_option("--tail-fraction", s.tail_fraction, "tail window fraction for probe-global");
    for (const auto& name : kCommands) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
        if (name == "reproduce") sub->add_option("figure", s.figure, "figure id")->required();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    s.command = app.get_subcommands().front()->get_name();
    if (rpca_opt->count() > 0) s.rpca_seed = rpca_seed;
    if (quad_opt->count() > 0) s.quad_dim = quad_dim;
    return s;
}

SubgradientSelection selection_of(const Settings& s) {
    SubgradientSelection sel;
    try {
        sel.rule = selection_rule_from_string(s.selection);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    sel.seed = s.selection_seed;
    return sel;
}

std::size_t quad_dim_of(const Settings& s) {
    if (s.quad_dim) return *s.quad_dim;
    return s.x0.empty() ? 2 : s.x0.size();
}

ObjectiveSpec objective_of(const Settings& s) {
    if (s.objective.empty()) throw UsageError("--objective is required");
    CatalogOptions opts;
    opts.quad_dim = quad_dim_of(s);
    opts.rpca_seed = s.rpca_seed.value_or(s.seed);
    return catalog_get(s.objective, opts);
}

json catalog_json(const Settings& s) {
    return {{"quad_dim", quad_dim_of(s)}, {"rpca_seed", s.rpca_seed.value_or(s.seed)}};
}

Point require_point(const Point& p, const ObjectiveSpec& spec, const char* flag, const Point& fallback) {
    const Point& v = p.empty() ? fallback : p;
    if (v.size() != spec.n)
        throw UsageError(std::string(flag) + " needs " + std::to_string(spec.n) + " values for " + spec.id);
    return v;
}

double scalar_alpha(const Settings& s, double fallback) {
    if (s.alpha.empty()) return fallback;
    if (s.alpha.size() != 1) throw UsageError("--alpha takes one value for this command");
    return s.alpha.front();
}

fs::path output_dir(const Settings& s, const std::string& what) {
    if (!s.out.empty()) return s.out;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%SZ") << "-" << s.seed;
    return fs::path("runs") / s.command / what / os.str();
}

void write_json(const fs::path& path, const json& j) { io::write_file(path, j.dump(2) + "\n"); }

void write_rpca_matrix(const fs::path& dir, const ObjectiveSpec& spec) {
    if (!spec.rpca) return;
    const auto& inst = *spec.rpca;
    io::write_file(dir / "M.csv", io::matrix_csv(inst.M, inst.m, inst.n));
}

void write_trace(const fs::path& dir, const std::string& name, const IterateTrace& trace,
                 const ObjectiveSpec& spec, const json& catalog) {
    io::write_file(dir / (name + ".csv"), io::trace_csv(trace, spec));
    json meta = io::trace_metadata(trace);
    meta["catalog"] = catalog;
    write_json(dir / (name + ".json"), meta);
}

json point_json(const Point& p) {
    json a = json::array();
    for (double v : p) a.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    return a;
}

IterateTrace run_method(const ObjectiveSpec& spec, const std::string& method, const Point& x0, const Point& xprev,
                        const MethodParams& mp, std::size_t iters, const RunOptions& ro) {
    if (method == "sg") return run_subgradient(spec, x0, mp, iters, ro);
    if (method == "momentum") return run_momentum(spec, x0, xprev, mp, iters, ro);
    if (method == "rr") return run_reshuffling(spec, x0, xprev, mp, iters, ro);
    if (method == "cd") return run_cyclic_cd(spec, x0, mp, iters, ro);
    throw UsageError("unknown method '" + method + "'");
}

int cmd_run(const Settings& s, std::ostream& out) {
    const ObjectiveSpec spec = objective_of(s);
    const Point x0 = require_point(s.x0, spec, "--x0", spec.default_anchor);
    const Point xprev = require_point(s.x_prev, spec, "--x-prev", x0);
    MethodParams mp;
    mp.alpha = scalar_alpha(s, 0.01);
    mp.beta = s.beta;
    mp.gamma = s.gamma;
    if (s.delta.size() > 1) throw UsageError("--delta takes one value for run");
    if (!s.delta.empty()) mp.delta = s.delta.front();
    mp.seed = s.seed;
    mp.selection = selection_of(s);
    RunOptions ro;
    ro.record_proxy = true;
    const std::size_t iters = s.iters ? s.iters : 100;
    const fs::path dir = output_dir(s, spec.id);
    IterateTrace trace;
    int code = ok;
    std::string note;
    try {
        trace = run_method(spec, s.method, x0, xprev, mp, iters, ro);
    } catch (const DivergenceError& e) {
        trace = e.partial();
        code = diverged;
        note = e.what();
    }
    write_trace(dir, "trace", trace, spec, catalog_json(s));
    write_rpca_matrix(dir, spec);
    json summary = {{"command", "run"},
                    {"objective", spec.id},
                    {"method", trace.method_id},
                    {"out_dir", dir.string()},
                    {"points", trace.points.size()},
                    {"final_x", point_json(trace.last())},
                    {"final_f", std::isfinite(trace.f_values.back()) ? json(trace.f_values.back()) : json(nullptr)},
                    {"diverged", code == diverged}};
    if (!note.empty()) summary["message"] = note;
    out << summary.dump() << "\n";
    return code;
}

int cmd_flow(const Settings& s, std::ostream& out) {
    const ObjectiveSpec spec = objective_of(s);
    const Point x0 = require_point(s.x0, spec, "--x0", spec.default_anchor);
    FlowParams fp;
    fp.c = s.c;
    fp.h = s.h;
    fp.T = s.T;
    fp.selection = s.selection == "deterministic_sign" ? SubgradientSelection::min_norm() : selection_of(s);
    fp.slide_on_kinks = !s.no_slide;
    const fs::path dir = output_dir(s, spec.id);
    TrajectorySample sample;
    int code = ok;
    try {
        sample = integrate(spec, x0, fp);
    } catch (const FlowDivergenceError& e) {
        sample = e.partial();
        code = diverged;
    }
    io::write_file(dir / "flow.csv", io::flow_csv(sample, spec));
    const EnergyBalance eb = energy_balance(sample, spec);
    json meta = {{"objective", spec.id},
                 {"catalog", catalog_json(s)},
                 {"c", fp.c},
                 {"h", fp.h},
                 {"T", fp.T},
                 {"selection", to_string(fp.selection.rule)},
                 {"slide_on_kinks", fp.slide_on_kinks},
                 {"slide_steps", sample.slide_steps},
                 {"max_speed", sample.max_speed},
                 {"energy_balance", {{"lhs", eb.lhs}, {"rhs", eb.rhs}, {"residual", eb.residual}}},
                 {"max_f_increase", max_f_increase(sample)},
                 {"diverged", code == diverged}};
    write_json(dir / "flow.json", meta);
    write_rpca_matrix(dir, spec);
    out << json{{"command", "flow"},
                {"objective", spec.id},
                {"out_dir", dir.string()},
                {"samples", sample.states.size()},
                {"final_state", point_json(sample.states.back())},
                {"energy_residual", eb.residual},
                {"diverged", code == diverged}}
               .dump()
        << "\n";
    return code;
}

bool any_diverged(const ProbeReport& r) {
    for (const auto& run : r.runs)
        if (run.diverged) return true;
    return false;
}

int finish_probe(const ProbeReport& rep, const fs::path& dir, const json& extra, std::ostream& out) {
    json j = io::report_json(rep);
    for (const auto& [k, v] : extra.items()) j[k] = v;
    write_json(dir / "report.json", j);
    io::write_file(dir / "escape_matrix.csv", io::escape_matrix_csv(rep));
    json summary = {{"command", rep.probe},
                    {"objective", rep.objective},
                    {"out_dir", dir.string()},
                    {"verdict", to_string(rep.verdict)},
                    {"escape_fraction", j["escape_fraction"]},
                    {"witness", j["witness"]}};
    if (rep.fitted.count("escape_fraction")) summary["escape_fraction"] = rep.fitted.at("escape_fraction");
    out << summary.dump() << "\n";
    return any_diverged(rep) ? diverged : ok;
}

int cmd_probe_local(const Settings& s, std::ostream& out) {
    const ObjectiveSpec spec = objective_of(s);
    StabilityProbeParams p;
    p.epsilon = std::isnan(s.epsilon) ? 0.1 : s.epsilon;
    p.delta_grid = s.delta.empty() ? std::vector<double>{0.1, 0.01, 0.001} : s.delta;
    p.alpha_grid = s.alpha.empty() ? std::vector<double>{0.1, 0.01, 0.001} : s.alpha;
    p.trials = s.trials ? s.trials : 20;
    p.K = s.iters ? s.iters : 1000;
    p.seed = s.seed;
    p.selection = selection_of(s);
    p.jobs = s.jobs;
    const Point xs = require_point(s.x_star, spec, "--x-star", spec.default_anchor);
    const ProbeReport rep = probe_local_stability(spec, xs, p);
    const fs::path dir = output_dir(s, spec.id);
    write_rpca_matrix(dir, spec);
    return finish_probe(rep, dir,
                        {{"x_star", point_json(xs)}, {"epsilon", p.epsilon}, {"K", p.K}, {"seed", p.seed},
                         {"catalog", catalog_json(s)}, {"rng", CounterRng::kName}},
                        out);
}

int cmd_probe_global(const Settings& s, std::ostream& out) {
    const ObjectiveSpec spec = objective_of(s);
    GlobalProbeParams p;
    p.box_lo = require_point(s.box_lo, spec, "--box-lo", Point(spec.n, -2.0));
    p.box_hi = require_point(s.box_hi, spec, "--box-hi", Point(spec.n, 2.0));
    p.epsilon = std::isnan(s.epsilon) ? 0.1 : s.epsilon;
    p.alpha_grid = s.alpha.empty() ? std::vector<double>{1e-3} : s.alpha;
    p.trials = s.trials ? s.trials : 10;
    p.K = s.iters ? s.iters : 20000;
    p.method = s.method;
    p.beta = s.beta;
    p.gamma = s.gamma;
    p.seed = s.seed;
    p.selection = selection_of(s);
    p.tail_fraction = s.tail_fraction;
    p.jobs = s.jobs;
    const ProbeReport rep = probe_global_stability(spec, p);
    const fs::path dir = output_dir(s, spec.id);
    return finish_probe(rep, dir,
                        {{"method", p.method}, {"beta", p.beta}, {"gamma", p.gamma}, {"K", p.K},
                         {"seed", p.seed}, {"catalog", catalog_json(s)}, {"rng", CounterRng::kName}},
                        out);
}

// Default epsilon: 0.5, or half of ||X*||_F for rpca_l1.
InstabilityParams instability_params(const Settings& s, const ObjectiveSpec& spec) {
    InstabilityParams p;
    double eps = 0.5;
    if (spec.rpca) {
        double xs2 = 0.0;
        for (std::size_t k = 0; k < spec.rpca->m * spec.rpca->r; ++k) xs2 += spec.rpca->x_star[k] * spec.rpca->x_star[k];
        eps = 0.5 * std::sqrt(xs2);
    }
    p.epsilon = std::isnan(s.epsilon) ? eps : s.epsilon;
    p.radius0 = s.radius0;
    p.alpha_lo = s.alpha_lo;
    p.alpha_hi = s.alpha_hi;
    p.trials = s.trials ? s.trials : 5;
    p.K = s.iters ? s.iters : 10000;
    p.seed = s.seed;
    p.selection = selection_of(s);
    p.jobs = s.jobs;
    return p;
}

int cmd_probe_instability(const Settings& s, std::ostream& out) {
    const ObjectiveSpec spec = objective_of(s);
    const InstabilityParams p = instability_params(s, spec);
    const Point xs = require_point(s.x_star, spec, "--x-star", spec.default_anchor);
    const ProbeReport rep = probe_strong_instability(spec, xs, p);
    const fs::path dir = output_dir(s, spec.id);
    write_rpca_matrix(dir, spec);
    return finish_probe(rep, dir,
                        {{"x_star", point_json(xs)}, {"K", p.K}, {"seed", p.seed}, {"catalog", catalog_json(s)},
                         {"rng", CounterRng::kName}},
                        out);
}

int cmd_check_regularity(const Settings& s, std::ostream& out) {
    const ObjectiveSpec spec = objective_of(s);
    const Point xs = require_point(s.x_star, spec, "--x-star", spec.default_anchor);
    double radius = s.radius;
    if (std::isnan(radius))
        radius = spec.critical_set ? std::min(0.5 * spec.critical_set->valid_radius, 0.1) : 0.1;
    json j = {{"objective", spec.id}, {"x_star", point_json(xs)}, {"radius", radius},
              {"samples", s.samples}, {"seed", s.seed}, {"catalog", catalog_json(s)}};
    auto guarded = [&](const char* key, auto&& fn) {
        try {
            j[key] = fn();
        } catch (const UnsupportedOracleError& e) {
            j[key] = {{"unavailable", e.what()}};
        } catch (const InsufficientDataError& e) {
            j[key] = {{"unavailable", e.what()}};
        }
    };
    guarded("subregularity", [&] { return io::regularity_json(fit_metric_subregularity(spec, xs, radius, s.samples, s.seed)); });
    guarded("verdier", [&] { return io::regularity_json(verdier_ratio_scan(spec, xs, radius, s.samples, s.seed)); });
    guarded("sharp_weak", [&] { return io::regularity_json(sharp_weak_check(spec, xs, radius, s.samples, s.seed)); });
    const fs::path dir = output_dir(s, spec.id);
    write_json(dir / "regularity.json", j);
    out << json{{"command", "check-regularity"}, {"objective", spec.id}, {"out_dir", dir.string()}}.dump() << "\n";
    return ok;
}

std::string human(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Figures.

// Figures.

struct FigureContext {
    const Settings& s;
    fs::path dir;
    std::ostringstream summary;
    int code = ok;
};

IterateTrace traced(FigureContext& ctx, const ObjectiveSpec& spec, const std::string& method, const Point& x0,
                    const Point& xprev, const MethodParams& mp, std::size_t iters) {
    RunOptions ro;
    ro.record_proxy = true;
    try {
        return run_method(spec, method, x0, xprev, mp, iters, ro);
    } catch (const DivergenceError& e) {
        ctx.code = diverged;
        ctx.summary << "diverged: " << e.what() << "\n";
        return e.partial();
    }
}

TrajectorySample flowed(FigureContext& ctx, const ObjectiveSpec& spec, const Point& x0, double c, double h,
                        double T) {
    FlowParams fp;
    fp.c = c;
    fp.h = h;
    fp.T = T;
    try {
        return integrate(spec, x0, fp);
    } catch (const FlowDivergenceError& e) {
        ctx.code = diverged;
        ctx.summary << "flow diverged: " << e.what() << "\n";
        return e.partial();
    }
}

void fig_stable_critical(FigureContext& ctx) {
    const ObjectiveSpec spec = catalog_get("sin_example");
    MethodParams mp;
    mp.alpha = 0.01;
    mp.selection = selection_of(ctx.s);
    const IterateTrace t = traced(ctx, spec, "sg", {-0.01}, {-0.01}, mp, ctx.s.iters ? ctx.s.iters : 100);
    write_trace(ctx.dir, "trace", t, spec, catalog_json(ctx.s));
    const auto table = analysis::sin_critical_points(12);
    io::write_file(ctx.dir / "sin_critical_points.csv", analysis::sin_table_csv(table));
    double max_abs = 0.0;
    for (const auto& p : t.points) max_abs = std::max(max_abs, std::abs(p[0]));
    ctx.summary << "Subgradient method on f(x) = x^2 sin(1/x) with alpha = 0.01 from x0 = -0.01.\n"
                << "The figure shows the iterates staying near the origin, a critical point that is\n"
                << "not a local minimum. Largest |x_k| over the run: " << human(max_abs) << ".\n"
                << "sin_critical_points.csv lists the roots t_k of tan(t) = t/2 and the critical points 1/t_k.\n";
}

void fig_strict(FigureContext& ctx) {
    const ObjectiveSpec spec = catalog_get("strict2d");
    const Point x0 = ctx.s.x0.empty() ? Point{0.2, 0.3} : ctx.s.x0;
    MethodParams mp;
    mp.alpha = scalar_alpha(ctx.s, 1e-3);
    mp.selection = selection_of(ctx.s);
    const std::size_t K = ctx.s.iters ? ctx.s.iters : 2000;
    const IterateTrace t = traced(ctx, spec, "sg", x0, x0, mp, K);
    write_trace(ctx.dir, "trace", t, spec, catalog_json(ctx.s));
    const TrajectorySample flow = flowed(ctx, spec, x0, 1.0, mp.alpha / 10.0, static_cast<double>(K) * mp.alpha);
    io::write_file(ctx.dir / "flow.csv", io::flow_csv(flow, spec));
    ctx.summary << "Discrete (trace.csv) and continuous (flow.csv) subgradient trajectories of\n"
                << "f = max{-18 x1^2 + 12|x2|, 6 x1^2 + 3|x2|} from x0 = (" << human(x0[0]) << ", "
                << human(x0[1]) << "), alpha = " << human(mp.alpha)
                << ". Both settle at the strict local minimum (0, 0).\n";
}

void fig_goout(FigureContext& ctx) {
    const ObjectiveSpec spec = catalog_get("strict2d");
    const std::size_t trials = ctx.s.trials ? ctx.s.trials : 100;
    const std::size_t K = ctx.s.iters ? ctx.s.iters : 1000;
    std::vector<IterateTrace> traces(trials);
    std::vector<char> div(trials, 0);
    parallel_for(trials, ctx.s.jobs, [&](std::size_t i) {
        CounterRng rng(derive_seed(ctx.s.seed, i), 0x676fULL);
        const Point x0 = rng.in_ball({0.0, 0.0}, 1.0);
        MethodParams mp;
        mp.alpha = std::pow(10.0, rng.uniform(-3.0, -1.0));
        mp.selection = selection_of(ctx.s);
        try {
            traces[i] = run_subgradient(spec, x0, mp, K);
        } catch (const DivergenceError& e) {
            traces[i] = e.partial();
            div[i] = 1;
        }
    });
    json runs = json::array();
    std::size_t left = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        const IterateTrace& t = traces[i];
        double max_norm = 0.0;
        for (const auto& p : t.points) max_norm = std::max(max_norm, norm(p));
        left += max_norm > 1.0;
        if (div[i]) ctx.code = diverged;
        std::ostringstream name;
        name << "trial_" << std::setw(3) << std::setfill('0') << i;
        write_trace(ctx.dir, name.str(), t, spec, catalog_json(ctx.s));
        runs.push_back({{"trial", i},
                        {"alpha", t.params.alpha},
                        {"x0", point_json(t.points.front())},
                        {"max_norm", max_norm},
                        {"left_unit_ball", max_norm > 1.0},
                        {"final_x", point_json(t.last())},
                        {"diverged", static_cast<bool>(div[i])}});
    }
    write_json(ctx.dir / "trials.json", {{"trials", trials}, {"K", K}, {"left_unit_ball", left}, {"runs", runs}});
    ctx.summary << trials << " subgradient runs on strict2d, starts uniform in the unit ball, alpha\n"
                << "log-uniform in [1e-3, 1e-1]. Runs whose iterates left the unit ball: " << left << ".\n"
                << "Starting in B(0, eps) does not keep the iterates in B(0, eps): delta must be\n"
                << "smaller than eps.\n";
}

void fig_illustration(FigureContext& ctx, bool pow32) {
    const ObjectiveSpec spec = catalog_get(pow32 ? "global_pow32" : "global_l1");
    const ObjectiveSpec cd_spec = catalog_get("global_pow32");
    const double alpha = scalar_alpha(ctx.s, pow32 ? 1e-2 : 1e-3);
    const double beta = ctx.s.beta != 0.0 ? ctx.s.beta : 0.5;
    const std::size_t K = ctx.s.iters ? ctx.s.iters : 20000;
    const double N = static_cast<double>(spec.components.size());
    CounterRng rng(ctx.s.seed, 0x696cULL);
    const Point lo{-2.0, -2.0}, hi{2.0, 2.0};
    struct Item {
        std::string name, method;
        const ObjectiveSpec* spec;
        double alpha, beta, c;
        std::size_t iters;
    };
    const std::vector<Item> items = {
        {"sg_momentum", "momentum", &spec, alpha * (1.0 - beta), beta, 1.0 / (1.0 - beta), K},
        {"rr_momentum", "rr", &spec, alpha * (1.0 - beta) / N, beta, N / (1.0 - beta), K / 3},
        {"cd", "cd", &cd_spec, alpha, 0.0, 1.0, K / 2},
    };
    json meta = json::array();
    for (const auto& it : items) {
        const Point x0 = rng.in_box(lo, hi);
        MethodParams mp;
        mp.alpha = it.alpha;
        mp.beta = it.beta;
        mp.seed = derive_seed(ctx.s.seed, meta.size());
        mp.selection = selection_of(ctx.s);
        const IterateTrace t = traced(ctx, *it.spec, it.method, x0, x0, mp, it.iters);
        write_trace(ctx.dir, it.name, t, *it.spec, catalog_json(ctx.s));
        const TrajectorySample flow = flowed(ctx, *it.spec, x0, 1.0, 1e-3, 5.0);
        io::write_file(ctx.dir / (it.name + "_flow.csv"), io::flow_csv(flow, *it.spec));
        meta.push_back({{"name", it.name},
                        {"objective", it.spec->id},
                        {"method", it.method},
                        {"alpha", it.alpha},
                        {"beta", it.beta},
                        {"flow_constant", it.c},
                        {"x0", point_json(x0)},
                        {"final_x", point_json(t.last())},
                        {"final_f", t.f_values.back()}});
    }
    write_json(ctx.dir / "runs.json", meta);
    ctx.summary << "Momentum subgradient, reshuffling with momentum and cyclic coordinate descent on "
                << spec.id << ",\nwith one flow trajectory from each start (*_flow.csv). Step sizes are scaled by\n"
                << "(1 - beta) and (1 - beta)/N so every method follows the same flow.\n";
    if (!pow32)
        ctx.summary << "Coordinate descent needs a gradient, so its trace runs on global_pow32 instead.\n";
}

void fig_unstable(FigureContext& ctx, bool rpca) {
    const ObjectiveSpec spec = rpca ? objective_of([&] {
        Settings t = ctx.s;
        t.objective = "rpca_l1";
        return t;
    }())
                                    : catalog_get("relu_net");
    InstabilityParams p = instability_params(ctx.s, spec);
    if (rpca) {
        if (ctx.s.alpha_lo == 0.05 && ctx.s.alpha_hi == 0.15) {
            p.alpha_lo = 0.01;
            p.alpha_hi = 0.02;
        }
        if (!ctx.s.iters) p.K = 1000;
    }
    const Point xs = spec.default_anchor;
    const ProbeReport rep = probe_strong_instability(spec, xs, p);
    json j = io::report_json(rep);
    json ledgers = json::array();
    for (const auto& run : rep.runs) {
        MethodParams mp;
        mp.alpha = run.alpha;
        mp.selection = p.selection;
        const IterateTrace t = traced(ctx, spec, "sg", run.x0, run.x0, mp, p.K);
        std::ostringstream name;
        name << "trial_" << run.trial;
        write_trace(ctx.dir, name.str(), t, spec, catalog_json(ctx.s));
        if (t.steps() + 1 == t.points.size()) ledgers.push_back(io::ledger_json(chetaev_increment_check(t, spec)));
    }
    j["ledgers"] = ledgers;
    write_json(ctx.dir / "report.json", j);
    write_rpca_matrix(ctx.dir, spec);
    if (any_diverged(rep)) ctx.code = diverged;
    ctx.summary << p.trials << " subgradient runs started within relative distance "
                << human(p.radius0) << " of the spurious minimum of " << spec.id
                << ",\nalpha uniform in [" << human(p.alpha_lo) << ", " << human(p.alpha_hi)
                << "]. Escape fraction from B(x*, " << human(p.epsilon)
                << "): " << human(rep.fitted.at("escape_fraction")) << ".\n"
                << "Column C of each trial CSV is the Chetaev function; it increases along the run.\n";
    if (rpca)
        ctx.summary << "The data matrix is synthetic (M.csv): low rank plus sparse outliers with the first r rows\n"
                    << "set to zero, standing in for the video data. f at x* is ||M||_1 = "
                    << human(spec.rpca->l1_norm_M()) << "; tail f values drop below it.\n";
}

int cmd_reproduce(const Settings& s, std::ostream& out) {
    const auto& ids = figure_ids();
    if (std::find(ids.begin(), ids.end(), s.figure) == ids.end()) {
        std::string list;
        for (const auto& id : ids) list += (list.empty() ? "" : ", ") + id;
        throw UsageError("unknown figure id '" + s.figure + "'; expected one of: " + list);
    }
    FigureContext ctx{s, output_dir(s, s.figure), {}, ok};
    if (s.figure == "fig-stable-critical") fig_stable_critical(ctx);
    else if (s.figure == "fig-strict") fig_strict(ctx);
    else if (s.figure == "fig-goout") fig_goout(ctx);
    else if (s.figure == "fig-illustration-a") fig_illustration(ctx, false);
    else if (s.figure == "fig-illustration-b") fig_illustration(ctx, true);
    else if (s.figure == "fig-nn") fig_unstable(ctx, false);
    else fig_unstable(ctx, true);
    io::write_file(ctx.dir / "summary.txt", ctx.summary.str());
    out << json{{"command", "reproduce"}, {"figure", s.figure}, {"out_dir", ctx.dir.string()}}.dump() << "\n";
    return ctx.code;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"fig-stable-critical", "fig-strict",         "fig-goout",
                                                 "fig-illustration-a",  "fig-illustration-b", "fig-nn",
                                                 "fig-rpca"};
    return ids;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        const Settings s = parse_settings(args);
        if (s.command == "run") return cmd_run(s, out);
        if (s.command == "flow") return cmd_flow(s, out);
        if (s.command == "probe-local") return cmd_probe_local(s, out);
        if (s.command == "probe-global") return cmd_probe_global(s, out);
        if (s.command == "probe-instability") return cmd_probe_instability(s, out);
        if (s.command == "check-regularity") return cmd_check_regularity(s, out);
        return cmd_reproduce(s, out);
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const UsageError& e) {
        err << error_line("usage", e.what()) << "\n";
    } catch (const CatalogError& e) {
        err << error_line("catalog", e.what()) << "\n";
    } catch (const PreconditionError& e) {
        err << error_line("precondition", e.what()) << "\n";
    } catch (const UnsupportedOracleError& e) {
        err << error_line("unsupported_oracle", e.what()) << "\n";
    } catch (const DivergenceError& e) {
        err << error_line("divergence", e.what()) << "\n";
        return diverged;
    } catch (const FlowDivergenceError& e) {
        err << error_line("divergence", e.what()) << "\n";
        return diverged;
    } catch (const std::exception& e) {
        err << error_line("runtime", e.what()) << "\n";
    }
    return usage_error;
}

}  // namespace nsolab::cli
