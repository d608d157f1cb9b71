#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsolab/analysis.hpp"
#include "nsolab/flow.hpp"
#include "nsolab/methods.hpp"
#include "nsolab/oracles.hpp"
#include "nsolab/probes.hpp"

namespace nsolab::io {

using nlohmann::json;

/// Shortest decimal form that round-trips (%.17g); empty for NaN.
std::string format_number(double v);

/// Header `k,x_0..x_{n-1},f,dproxy,C`. dproxy comes from the recorded
/// min-norm proxy and C from the Chetaev function; cells stay empty when
/// either is unavailable.
std::string trace_csv(const IterateTrace& trace, const ObjectiveSpec& spec);

/// Same leading columns as trace_csv, followed by t and energy.
std::string flow_csv(const TrajectorySample& sample, const ObjectiveSpec& spec);

json params_json(const MethodParams& p);
MethodParams params_from_json(const json& j);

/// Method tag, objective, params, rng name, x_-1, permutations, outer indices.
json trace_metadata(const IterateTrace& trace);

struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // NaN for empty cells
};

ParsedCsv parse_csv(const std::string& text);

/// Rebuilds a trace from its CSV and metadata, recomputing the selected
/// subgradients so that replay_max_ulp can be applied.
IterateTrace trace_from_files(const std::string& csv_text, const json& meta, const ObjectiveSpec& spec);

json report_json(const ProbeReport& report);
json ledger_json(const ChetaevLedger& ledger);
json regularity_json(const SubregularityFit& fit);
json regularity_json(const VerdierScan& scan);
json regularity_json(const SharpWeakResult& res);

/// Rows are delta values, columns alpha values.
std::string escape_matrix_csv(const ProbeReport& report);

/// Row-major matrix as CSV without a header.
std::string matrix_csv(const std::vector<double>& data, std::size_t rows, std::size_t cols);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace nsolab::io
