#include "nsolab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "nsolab/rng.hpp"

namespace nsolab::io {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const Point& p) {
    json a = json::array();
    for (double v : p) a.push_back(number(v));
    return a;
}

Point point_from_json(const json& j) {
    Point p;
    for (const auto& v : j) p.push_back(v.is_null() ? kNaN : v.get<double>());
    return p;
}

std::string csv_header(std::size_t n) {
    std::string h = "k";
    for (std::size_t i = 0; i < n; ++i) h += ",x_" + std::to_string(i);
    return h + ",f,dproxy,C";
}

void append_row(std::string& out, std::size_t k, const Point& x, double f, double dproxy, double c) {
    out += std::to_string(k);
    for (double v : x) out += "," + format_number(v);
    out += "," + format_number(f) + "," + format_number(dproxy) + "," + format_number(c);
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_csv(const IterateTrace& trace, const ObjectiveSpec& spec) {
    std::string out = csv_header(spec.n) + "\n";
    for (std::size_t k = 0; k < trace.points.size(); ++k) {
        const double d = k < trace.min_norm_proxy.size() ? trace.min_norm_proxy[k] : kNaN;
        const double c = spec.chetaev ? spec.chetaev->C(trace.points[k]) : kNaN;
        append_row(out, k, trace.points[k], trace.f_values[k], d, c);
        out += "\n";
    }
    return out;
}

std::string flow_csv(const TrajectorySample& sample, const ObjectiveSpec& spec) {
    std::string out = csv_header(spec.n) + ",t,energy\n";
    for (std::size_t k = 0; k < sample.states.size(); ++k) {
        double d = kNaN;
        try {
            d = min_norm_subgradient(spec, sample.states[k]).norm;
        } catch (const UnsupportedOracleError&) {
        }
        const double c = spec.chetaev ? spec.chetaev->C(sample.states[k]) : kNaN;
        append_row(out, k, sample.states[k], sample.f_values[k], d, c);
        out += "," + format_number(sample.times[k]) + "," + format_number(sample.energy[k]) + "\n";
    }
    return out;
}

json params_json(const MethodParams& p) {
    return {{"alpha", p.alpha},
            {"beta", p.beta},
            {"gamma", p.gamma},
            {"delta", p.delta},
            {"seed", p.seed},
            {"selection", to_string(p.selection.rule)},
            {"selection_seed", p.selection.seed}};
}

MethodParams params_from_json(const json& j) {
    MethodParams p;
    p.alpha = j.at("alpha").get<double>();
    p.beta = j.value("beta", 0.0);
    p.gamma = j.value("gamma", 0.0);
    p.delta = j.value("delta", 1.0);
    p.seed = j.value("seed", std::uint64_t{0});
    p.selection.rule = selection_rule_from_string(j.value("selection", std::string("deterministic_sign")));
    p.selection.seed = j.value("selection_seed", std::uint64_t{0});
    return p;
}

json trace_metadata(const IterateTrace& trace) {
    return {{"method", trace.method_id},
            {"objective", trace.objective},
            {"params", params_json(trace.params)},
            {"rng", CounterRng::kName},
            {"x_minus1", point_json(trace.x_minus1)},
            {"permutations", trace.permutations},
            {"outer_index", trace.outer_index},
            {"points", trace.points.size()}};
}

ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (first) {
            out.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != out.header.size())
            throw std::invalid_argument("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(out.header.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            if (c.empty()) {
                row.push_back(kNaN);
                continue;
            }
            std::size_t used = 0;
            const double v = std::stod(c, &used);
            if (used != c.size()) throw std::invalid_argument("bad number '" + c + "' in csv");
            row.push_back(v);
        }
        out.rows.push_back(std::move(row));
    }
    if (out.header.empty()) throw std::invalid_argument("csv has no header");
    return out;
}

IterateTrace trace_from_files(const std::string& csv_text, const json& meta, const ObjectiveSpec& spec) {
    const ParsedCsv csv = parse_csv(csv_text);
    if (csv.header.size() < spec.n + 4 || csv.header[0] != "k")
        throw std::invalid_argument("csv header does not match the trace schema");
    IterateTrace t;
    t.method_id = meta.at("method").get<std::string>();
    t.objective = meta.at("objective").get<std::string>();
    if (t.objective != spec.id) throw std::invalid_argument("trace objective does not match the spec");
    t.params = params_from_json(meta.at("params"));
    t.x_minus1 = point_from_json(meta.at("x_minus1"));
    t.permutations = meta.value("permutations", std::vector<std::vector<std::size_t>>{});
    t.outer_index = meta.value("outer_index", std::vector<std::size_t>{});
    for (const auto& row : csv.rows) {
        t.points.emplace_back(row.begin() + 1, row.begin() + 1 + static_cast<std::ptrdiff_t>(spec.n));
        t.f_values.push_back(row[spec.n + 1]);
        if (!std::isnan(row[spec.n + 2])) t.min_norm_proxy.push_back(row[spec.n + 2]);
    }
    recompute_subgradients(t, spec);
    return t;
}

json report_json(const ProbeReport& r) {
    json j;
    j["probe"] = r.probe;
    j["objective"] = r.objective;
    j["verdict"] = to_string(r.verdict);
    j["delta_grid"] = r.delta_grid;
    j["alpha_grid"] = r.alpha_grid;
    json ef = json::array();
    for (const auto& row : r.escape_fraction) ef.push_back(row);
    j["escape_fraction"] = ef;
    if (r.witness) {
        j["witness"] = {{"x0", point_json(r.witness->x0)},
                        {"alpha", r.witness->alpha},
                        {"k", r.witness->k},
                        {"xk", point_json(r.witness->xk)}};
    } else {
        j["witness"] = nullptr;
    }
    json fitted = json::object();
    for (const auto& [k, v] : r.fitted) fitted[k] = number(v);
    j["fitted"] = fitted;
    j["flags"] = r.flags;
    j["notes"] = r.notes;
    json runs = json::array();
    for (const auto& run : r.runs) {
        runs.push_back({{"cell", run.cell},
                        {"trial", run.trial},
                        {"alpha", run.alpha},
                        {"x0", point_json(run.x0)},
                        {"escaped", run.escaped},
                        {"diverged", run.diverged},
                        {"escape_step", run.escape_step},
                        {"final_f", number(run.final_f)},
                        {"tail_f", number(run.tail_f)},
                        {"tail_oscillation", number(run.tail_oscillation)},
                        {"tail_min_dist", number(run.tail_min_dist)},
                        {"tail_hull_dist", number(run.tail_hull_dist)},
                        {"ledger_steps", run.ledger_steps},
                        {"ledger_truncated", run.ledger_truncated},
                        {"ledger_identity_error", number(run.ledger_identity_error)},
                        {"ledger_identity_error_all", number(run.ledger_identity_error_all)},
                        {"ledger_min_slack", number(run.ledger_min_slack)}});
    }
    j["runs"] = runs;
    return j;
}

json ledger_json(const ChetaevLedger& L) {
    return {{"steps", L.increments.size()},
            {"truncated", L.truncated},
            {"truncated_at", L.truncated_at},
            {"min_slack", number(L.min_slack)},
            {"max_identity_error", number(L.max_identity_error)},
            {"max_identity_error_all", number(L.max_identity_error_all)}};
}

json regularity_json(const SubregularityFit& fit) {
    return {{"theta2", number(fit.theta2)}, {"c2", number(fit.c2)},     {"c_unit", number(fit.c_unit)},
            {"valid", fit.valid},           {"bins", fit.bins},         {"g_min", number(fit.g_min)},
            {"g_max", number(fit.g_max)},   {"d_min", number(fit.d_min)}, {"d_max", number(fit.d_max)},
            {"bounded_away", fit.bounded_away}};
}

json regularity_json(const VerdierScan& scan) {
    return {{"sup_ratio", number(scan.sup_ratio)},
            {"diverging", scan.diverging},
            {"slope", number(scan.slope)},
            {"bin_distance", scan.bin_distance},
            {"bin_sup", scan.bin_sup},
            {"valid", scan.valid},
            {"argmax_x", point_json(scan.argmax_x)},
            {"argmax_y", point_json(scan.argmax_y)}};
}

json regularity_json(const SharpWeakResult& res) {
    json j = {{"mu_hat", number(res.mu_hat)}, {"rho_hat", number(res.rho_hat)}, {"rho_grid", res.rho_grid}};
    if (res.violated) {
        j["violated"] = {{"x", point_json(res.violated->x)},
                         {"s", point_json(res.violated->s)},
                         {"rho", res.violated->rho},
                         {"gap", number(res.violated->gap)}};
    } else {
        j["violated"] = nullptr;
    }
    return j;
}

std::string escape_matrix_csv(const ProbeReport& r) {
    std::string out = "delta";
    for (double a : r.alpha_grid) out += ",alpha=" + format_number(a);
    out += "\n";
    for (std::size_t i = 0; i < r.escape_fraction.size(); ++i) {
        out += i < r.delta_grid.size() ? format_number(r.delta_grid[i]) : std::string();
        for (double v : r.escape_fraction[i]) out += "," + format_number(v);
        out += "\n";
    }
    return out;
}

std::string matrix_csv(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
    if (data.size() != rows * cols) throw std::invalid_argument("matrix_csv: size mismatch");
    std::string out;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (j) out += ",";
            out += format_number(data[i * cols + j]);
        }
        out += "\n";
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << contents;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace nsolab::io
