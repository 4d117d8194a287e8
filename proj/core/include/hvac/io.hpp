#pragma once

// JSON building / scenario files, CSV reports and key=value overrides.

#include "hvac/compare.hpp"
#include "hvac/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hvac {

nlohmann::json to_json(const Building& building);
nlohmann::json to_json(const Scenario& scenario);
Building building_from_json(const nlohmann::json& j);
Scenario scenario_from_json(const nlohmann::json& j);

void save_building(const std::filesystem::path& path, const Building& building);
void save_scenario(const std::filesystem::path& path, const Scenario& scenario);
Building load_building(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

/// Fixed-format number used in every CSV cell.
std::string format_number(double v);

/// One row per executed step: states before the step, controls, power and cost.
void write_report_csv(std::ostream& out, const RunReport& report);
/// Per-epoch solver diagnostics; wall time only when timing is set.
void write_stats_csv(std::ostream& out, const RunReport& report, bool timing);
/// method, cost, max_co2_ppm, max_temp_violation_C[, mean_epoch_ms]
void write_comparison_csv(std::ostream& out, const std::vector<MethodOutcome>& rows, bool timing);

/// Applies "key=value". Unknown keys and unparsable values throw InputError.
void apply_override(const std::string& assignment, CompareConfig& config, Building& building);
/// Keys accepted by apply_override, for help text.
std::vector<std::string> override_keys();

}  // namespace hvac
