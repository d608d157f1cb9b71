#include "doctest.h"

#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "nsolab/cli.hpp"
#include "nsolab/io.hpp"
#include "nsolab/methods.hpp"

using namespace nsolab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "nsolab_cli_test" / name;
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("run writes the documented trace") {
    const auto dir = scratch("run");
    const auto r = invoke({"run", "--objective", "abs1d", "--method", "sg", "--alpha", "0.3", "--x0", "1.0",
                           "--iters", "4", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const json summary = json::parse(r.out);
    CHECK(summary["points"] == 5);
    const auto csv = io::parse_csv(io::read_file(dir / "trace.csv"));
    REQUIRE(csv.rows.size() == 5);
    const double expect[] = {1.0, 0.7, 0.4, 0.1, -0.2};
    for (int k = 0; k < 5; ++k) CHECK(csv.rows[k][1] == doctest::Approx(expect[k]).epsilon(1e-15));
    CHECK(fs::exists(dir / "trace.json"));
}

TEST_CASE("emitted traces re-parse and replay exactly") {
    for (const std::string method : {"sg", "momentum", "rr"}) {
        const auto dir = scratch("replay_" + method);
        const auto r = invoke({"run", "--objective", "global_l1", "--method", method, "--alpha", "0.01", "--beta",
                               "0.3", "--x0", "1.5,-0.5", "--iters", "200", "--seed", "3", "--out", dir.string()});
        REQUIRE(r.code == 0);
        const auto meta = json::parse(io::read_file(dir / "trace.json"));
        const auto t = io::trace_from_files(io::read_file(dir / "trace.csv"), meta, catalog_get("global_l1"));
        CHECK(t.method_id == method);
        CHECK(replay_max_ulp(t) == 0);
    }
}

TEST_CASE("flow example") {
    const auto dir = scratch("flow");
    const auto r = invoke({"flow", "--objective", "quad", "--x0", "1", "--T", "1", "--h", "1e-4", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const json summary = json::parse(r.out);
    CHECK(summary["final_state"][0].get<double>() == doctest::Approx(0.36788).epsilon(1e-4));
    CHECK(fs::exists(dir / "flow.csv"));
}

TEST_CASE("probe-instability example") {
    const auto dir = scratch("instab");
    const auto r = invoke({"probe-instability", "--objective", "relu_net", "--trials", "5", "--seed", "1", "--out",
                           dir.string()});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["escape_fraction"] == 1.0);
    const json rep = json::parse(io::read_file(dir / "report.json"));
    CHECK(rep["runs"].size() == 5);
}

TEST_CASE("identical commands give byte-identical artifacts") {
    const auto a = scratch("det_a"), b = scratch("det_b");
    for (const auto& dir : {a, b}) {
        const auto r = invoke({"probe-local", "--objective", "strict2d", "--epsilon", "0.5", "--delta", "0.1,0.01",
                               "--alpha", "0.01", "--trials", "10", "--iters", "200", "--seed", "4", "--out",
                               dir.string()});
        REQUIRE(r.code == 0);
    }
    for (const std::string f : {"report.json", "escape_matrix.csv"})
        CHECK(io::read_file(a / f) == io::read_file(b / f));
    const auto c = scratch("det_c"), d = scratch("det_d");
    for (const auto& dir : {c, d})
        REQUIRE(invoke({"run", "--objective", "relu_net", "--alpha", "0.1", "--iters", "50", "--x0", "1,1,0.01",
                        "--selection", "seeded_random_extreme", "--out", dir.string()})
                    .code == 0);
    CHECK(io::read_file(c / "trace.csv") == io::read_file(d / "trace.csv"));
    CHECK(io::read_file(c / "trace.json") == io::read_file(d / "trace.json"));
}

TEST_CASE("usage errors exit 1 with one-line JSON") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"run", "--objective", "nope"},
             {"run", "--objective", "abs1d", "--bogus"},
             {"frobnicate"},
             {},
             {"reproduce", "fig-none"},
             {"run", "--objective", "abs1d", "--x0", "1,2"},
             {"run", "--objective", "abs1d", "--method", "cd"},
             {"run", "--objective", "quad", "--method", "momentum", "--x0", "1", "--x-prev", "5"}}) {
        const auto r = invoke(args);
        CHECK(r.code == 1);
        REQUIRE_FALSE(r.err.empty());
        const std::string first = r.err.substr(0, r.err.find('\n'));
        const json e = json::parse(first);
        CHECK(e.contains("error"));
        CHECK(e.contains("message"));
    }
}

TEST_CASE("help prints usage and exits 0") {
    const auto r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Subcommands") != std::string::npos);
    CHECK(r.err.empty());
}

TEST_CASE("divergent runs exit 2 and keep the partial trace") {
    const auto dir = scratch("div");
    const auto r = invoke({"run", "--objective", "quad", "--alpha", "3.5", "--x0", "1,1", "--iters", "500", "--out",
                           dir.string()});
    CHECK(r.code == 2);
    CHECK(json::parse(r.out)["diverged"] == true);
    CHECK(io::parse_csv(io::read_file(dir / "trace.csv")).rows.size() > 2);
}

TEST_CASE("config file keys mirror flags and flags win") {
    const auto dir = scratch("cfg");
    fs::create_directories(dir);
    const auto cfg = dir / "cfg.json";
    io::write_file(cfg, json{{"command", "run"},
                             {"objective", "abs1d"},
                             {"alpha", 0.3},
                             {"x0", 1.0},
                             {"iters", 4}}
                            .dump());
    auto r = invoke({"--config", cfg.string(), "--out", (dir / "a").string()});
    REQUIRE(r.code == 0);
    auto csv = io::parse_csv(io::read_file(dir / "a" / "trace.csv"));
    CHECK(csv.rows.back()[1] == doctest::Approx(-0.2));
    r = invoke({"run", "--config", cfg.string(), "--alpha", "0.25", "--out", (dir / "b").string()});
    REQUIRE(r.code == 0);
    csv = io::parse_csv(io::read_file(dir / "b" / "trace.csv"));
    CHECK(csv.rows.back()[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("check-regularity writes every section") {
    const auto dir = scratch("reg");
    const auto r = invoke({"check-regularity", "--objective", "verdier_ok", "--x-star", "1,1", "--radius", "0.3",
                           "--samples", "500", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const json j = json::parse(io::read_file(dir / "regularity.json"));
    CHECK(j.contains("subregularity"));
    CHECK(j["verdier"]["sup_ratio"].get<double>() <= 1.0 + 1e-6);
    CHECK(j.contains("sharp_weak"));
}

TEST_CASE("reproduce the stable-critical figure") {
    const auto dir = scratch("fig");
    const auto r = invoke({"reproduce", "fig-stable-critical", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto csv = io::parse_csv(io::read_file(dir / "trace.csv"));
    CHECK(csv.rows.size() == 101);
    CHECK(csv.rows[0][1] == -0.01);
    CHECK(fs::exists(dir / "summary.txt"));
    CHECK(cli::figure_ids().size() == 7);
}
