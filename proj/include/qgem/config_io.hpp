#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "qgem/budget.hpp"
#include "qgem/entangle.hpp"
#include "qgem/interferometer.hpp"

namespace qgem::io {

// Shortest round-trip decimal rendering (locale-independent).
std::string format_double(double v);

// RFC-4180 field quoting: wraps and doubles quotes when the field contains
// a comma, quote, CR, or LF.
std::string csv_field(const std::string& raw);

struct LoadedConfig {
    budget::ExperimentConfig config;
    std::optional<budget::ScanSpec> scan;
};

// Strict schema-1 JSON: every key must be known, quantities are numbers
// (raw SI) or "value unit" strings. Throws config_error.
LoadedConfig config_from_json(const nlohmann::json& j);
LoadedConfig load_config_file(const std::string& path);

// Canonical form: quantities as SI "value unit" strings, defaults included.
nlohmann::json config_to_json(const budget::ExperimentConfig& config);

nlohmann::json report_to_json(const budget::FeasibilityReport& report);

// Header: one column per axis path, then
// phi_grav,phi_dip,negativity,witness,runs,ratio,pass. CRLF line endings.
std::string scan_to_csv(const budget::ScanSpec& spec, const std::vector<budget::ScanRow>& rows);
nlohmann::json scan_to_json(const budget::ScanSpec& spec,
                            const std::vector<budget::ScanRow>& rows);

// Header t,x_left,x_right,v_left,v_right; SI values, CRLF line endings.
std::string trajectory_to_csv(const sg::BranchTrajectory& traj);

// {"rho": 4x4 array of [re, im], ...}.
nlohmann::json state_to_json(const ent::TwoQubitState& state);

nlohmann::json phases_to_json(const ent::BranchPhases& phases);

} // namespace qgem::io
