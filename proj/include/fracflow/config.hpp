#pragma once

// Run configuration: YAML text with sections geometry, scaling, materials,
// solver, initial, sources, boundary, sweep, output and (optionally)
// reference. See configs/figure5.cfg for a complete example.
//
// Without a reference section every number is dimensionless. With one, heads
// are in m, times in s, sources in 1/s, Neumann fluxes in m/s and
// geometry.epsilon is the fracture aperture in m; the values are scaled by
// nondimensionalize().

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracflow/effective.hpp"

namespace fracflow {

struct RunConfig {
  SimulationConfig sim;
  /// Dimensionless material parameters behind sim.matrix / sim.fracture.
  VanGenuchtenParams matrix_params, fracture_params;
  KirchhoffTableOptions table;

  /// geometry.fracture_cells was given explicitly; otherwise it follows
  /// default_fracture_nx() whenever epsilon changes.
  bool fracture_cells_given = false;

  std::vector<double> sweep_epsilons;
  std::vector<int> sweep_fracture_cells;  ///< resolved, parallel to sweep_epsilons
  std::optional<EffectiveVariant> variant;  ///< sweep.variant; unset = from (kappa, lambda)

  std::vector<double> snapshot_times;  ///< empty = final time only
  bool write_vtk = true;

  std::string source_name;
  std::string source_text;  ///< file contents as read, for hashing

  /// Echo of every value the solver consumes, as dimensionless config.
  /// Parsing the dump of the echo yields the same echo.
  nlohmann::ordered_json echo() const;

  EffectiveVariant effective_variant() const;
  /// Replaces epsilon and re-derives the fracture resolution if needed.
  void set_epsilon(double eps);
};

/// Throws ConfigError naming every missing key, unknown key or bad value
/// found; UnsupportedRegime for (kappa, lambda) outside the effective models.
RunConfig parse_config_string(const std::string& text, const std::string& name = "<string>");
RunConfig parse_config(const std::string& path);

}  // namespace fracflow
