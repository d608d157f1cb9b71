#include "doctest.h"

#include <cmath>

#include "nsolab/io.hpp"
#include "nsolab/methods.hpp"

using namespace nsolab;
using nlohmann::json;

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) CHECK(std::stod(io::format_number(v)) == v);
    CHECK(io::format_number(std::nan("")).empty());
}

TEST_CASE("trace CSV schema") {
    const auto spec = catalog_get("relu_net");
    MethodParams p;
    p.alpha = 0.1;
    RunOptions ro;
    ro.record_proxy = true;
    const auto t = run_subgradient(spec, {1.0, 1.0, 0.01}, p, 5, ro);
    const auto csv = io::parse_csv(io::trace_csv(t, spec));
    CHECK(csv.header == std::vector<std::string>{"k", "x_0", "x_1", "x_2", "f", "dproxy", "C"});
    REQUIRE(csv.rows.size() == 6);
    CHECK(csv.rows[0][0] == 0.0);
    CHECK(csv.rows[3][4] == t.f_values[3]);
    CHECK(csv.rows[3][6] == 1.0 - t.points[3][0]);
    CHECK(csv.rows[3][5] == t.min_norm_proxy[3]);

    // No Chetaev function and no proxy: empty cells.
    const auto abs = catalog_get("abs1d");
    const auto u = io::parse_csv(io::trace_csv(run_subgradient(abs, {1.0}, p, 2), abs));
    CHECK(std::isnan(u.rows[0][2] + 0.0) == false);
    CHECK(std::isnan(u.rows[0][3]));
    CHECK(std::isnan(u.rows[0][4]));
}

TEST_CASE("trace round-trip through CSV and JSON replays exactly") {
    MethodParams p;
    p.alpha = 0.01;
    p.beta = 0.4;
    p.gamma = 0.3;
    p.seed = 17;
    p.selection = SubgradientSelection::random_extreme(5);
    const auto l1 = catalog_get("global_l1");
    const auto pow = catalog_get("global_pow32");
    struct Case {
        IterateTrace trace;
        const ObjectiveSpec* spec;
    };
    const std::vector<Case> cases = {
        {run_subgradient(l1, {1.3, -0.7}, p, 200), &l1},
        {run_momentum(l1, {1.3, -0.7}, {1.3, -0.705}, p, 200), &l1},
        {run_reshuffling(l1, {1.3, -0.7}, {1.3, -0.7}, p, 60), &l1},
        {run_cyclic_cd(pow, {1.3, -0.7}, p, 60), &pow},
    };
    for (const auto& c : cases) {
        const std::string csv = io::trace_csv(c.trace, *c.spec);
        const json meta = json::parse(io::trace_metadata(c.trace).dump());
        const auto back = io::trace_from_files(csv, meta, *c.spec);
        CHECK(back.method_id == c.trace.method_id);
        CHECK(back.points == c.trace.points);
        CHECK(back.permutations == c.trace.permutations);
        CHECK(back.selected_subgrads == c.trace.selected_subgrads);
        CHECK(replay_max_ulp(back) == 0);
    }
}

TEST_CASE("params JSON round-trip") {
    MethodParams p;
    p.alpha = 0.123;
    p.beta = -0.5;
    p.gamma = 2.0;
    p.delta = 3.0;
    p.seed = 99;
    p.selection = SubgradientSelection::random_extreme(4);
    const auto q = io::params_from_json(io::params_json(p));
    CHECK(q.alpha == p.alpha);
    CHECK(q.beta == p.beta);
    CHECK(q.gamma == p.gamma);
    CHECK(q.delta == p.delta);
    CHECK(q.seed == p.seed);
    CHECK(q.selection.rule == p.selection.rule);
    CHECK(q.selection.seed == p.selection.seed);
}

TEST_CASE("flow CSV appends time and energy") {
    const auto spec = catalog_get("quad", {1, 0});
    FlowParams fp;
    fp.h = 0.1;
    fp.T = 1.0;
    const auto s = integrate(spec, {1.0}, fp);
    const auto csv = io::parse_csv(io::flow_csv(s, spec));
    CHECK(csv.header == std::vector<std::string>{"k", "x_0", "f", "dproxy", "C", "t", "energy"});
    REQUIRE(csv.rows.size() == 11);
    CHECK(csv.rows[10][5] == doctest::Approx(1.0));
    CHECK(csv.rows[10][6] == s.energy.back());
    CHECK(csv.rows[10][3] == doctest::Approx(std::abs(s.states.back()[0])));
}

TEST_CASE("report and escape matrix serialization") {
    ProbeReport r;
    r.probe = "probe-local";
    r.objective = "abs1d";
    r.verdict = Verdict::stable_evidence;
    r.delta_grid = {0.1, 0.01};
    r.alpha_grid = {0.1};
    r.escape_fraction = {{0.0}, {0.5}};
    r.fitted["epsilon"] = 0.1;
    r.witness = Witness{{0.05}, 0.1, 3, {0.2}};
    const json j = io::report_json(r);
    CHECK(j["verdict"] == "stable_evidence");
    CHECK(j["escape_fraction"][1][0] == 0.5);
    CHECK(j["witness"]["k"] == 3);
    const auto m = io::parse_csv(io::escape_matrix_csv(r));
    REQUIRE(m.rows.size() == 2);
    CHECK(m.rows[1][0] == 0.01);
    CHECK(m.rows[1][1] == 0.5);
    CHECK(io::matrix_csv({1.0, 2.0, 3.0, 4.0}, 2, 2) == "1,2\n3,4\n");
}

TEST_CASE("metadata records the generator name") {
    MethodParams p;
    const auto t = run_subgradient(catalog_get("abs1d"), {1.0}, p, 1);
    const json meta = io::trace_metadata(t);
    CHECK(meta["rng"] == "ctr64-v1");
    CHECK(meta["method"] == "sg");
}
