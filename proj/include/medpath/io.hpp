#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "medpath/metrics.hpp"
#include "medpath/penalties.hpp"
#include "medpath/screening.hpp"
#include "medpath/selection.hpp"
#include "medpath/simgen.hpp"
#include "medpath/solver.hpp"
#include "medpath/types.hpp"

namespace medpath {

using Json = nlohmann::json;

// Dataset CSV: header "y,x,m1,...,mp", one row per subject, decimal-point
// reals, newline-terminated rows.
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

// Shortest round-trip decimal form; identical across runs.
std::string format_double(double v);

// Writes via a temp file in the same directory plus rename.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);
void write_json_file(const Json& j, const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

Json to_json(const PenaltyConfig& pen);
PenaltyConfig penalty_config_from_json(const Json& j);

Json to_json(const SolverConfig& cfg);
SolverConfig solver_config_from_json(const Json& j);

Json to_json(const GridSpec& grid);
GridSpec grid_spec_from_json(const Json& j);

Json to_json(const Scenario& sc);
Scenario scenario_from_json(const Json& j);

Json to_json(const FitResult& fit);
FitResult fit_result_from_json(const Json& j);

Json to_json(const MetricsReport& m);
MetricsReport metrics_report_from_json(const Json& j);

Json to_json(const ScreenResult& s);

Json to_json(const Truth& t);
Truth truth_from_json(const Json& j);

// Minimal structural validation against the shipped schema subset
// (type / properties / required / items / enum). Returns error strings,
// empty when the document conforms.
std::vector<std::string> schema_errors(const Json& doc, const Json& schema);

}  // namespace medpath
