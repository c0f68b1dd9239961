#pragma once

// Text serialisation of fields, step logs, interface reports and run
// manifests. Numbers carry 17 significant digits so outputs are byte-stable.

#include <string>
#include <vector>

#include "json.hpp"

#include "fracflow/effective.hpp"

namespace fracflow {

std::string format_number(double v);

/// Columns x, y, subdomain, psi, saturation; one line per cell.
std::string snapshot_csv(const FlowProblem& problem, const StateField& state);

/// Legacy VTK rectilinear grid covering all blocks, cell data psi,
/// saturation and subdomain.
std::string snapshot_vtk(const FlowProblem& problem, const StateField& state, const std::string& title);

/// step, time, iterations, residual, mass_balance.
std::string steps_csv(const std::vector<StepInfo>& steps);

/// step, time, jump_integral, budget_residual, psi_f_min, psi_f_max.
std::string interface_report_csv(const std::vector<InterfaceReport>& reports);

/// y, psi_f on Gamma.
std::string interface_profile_csv(const Grid& grid, const std::vector<double>& trace);

std::string sha256_hex(const std::string& data);

/// Creates parent directories as needed; throws std::runtime_error on I/O failure.
void write_text(const std::string& path, const std::string& content);

/// "0.18" -> "t0.18" style tag for file names.
std::string time_tag(double t);

struct ManifestInfo {
  std::string command;
  std::string config_path;
  std::string config_text;
  nlohmann::ordered_json config_echo;
  nlohmann::ordered_json run;  ///< command-specific summary
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

nlohmann::ordered_json make_manifest(const ManifestInfo& info);

}  // namespace fracflow
