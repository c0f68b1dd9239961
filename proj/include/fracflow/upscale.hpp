#pragma once

// Averages across the fracture, L2 error norms, and the epsilon sweep that
// compares the epsilon-model against an effective model at t = T.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fracflow/effective.hpp"

namespace fracflow {

/// Mean across the fracture width per row: (1/eps) sum psi dx.
std::vector<double> x_average(const Grid& grid, const std::vector<double>& field);

/// Length-weighted mean of per-row values; uniform rows when dy is empty.
double y_average(const std::vector<double>& ubar, const std::vector<double>& dy = {});

/// sqrt(sum (a - b)^2 |cell|) over the cells of `sub`. The grids must carry
/// the same block resolution; cell centres are compared after the rigid
/// shift that maps the block onto its position at eps = 0. Throws
/// std::invalid_argument on incompatible grids.
double l2_error(const Grid& grid_a, const std::vector<double>& a, const Grid& grid_b, const std::vector<double>& b,
                Subdomain sub);

/// L2 norm over Gamma of a per-row difference.
double l2_error_gamma(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& dy);

/// Column nearest to z0 in (-1/2, 1/2) (z = x / eps).
int flatness_column(const Grid& grid, double z0);

/// || u(., z0) - mean_x u ||_Gamma for a fracture field.
double transversal_flatness(const Grid& grid, const std::vector<double>& field, double z0);
/// Same, on the Kirchhoff potential (differences taken in double-double).
double transversal_flatness(const Grid& grid, const std::vector<Potential>& u, double z0);

/// Kirchhoff potential of every fracture cell, in grid order of the block.
std::vector<Potential> fracture_potential(const FlowProblem& problem, const StateField& state);

/// Per-row heights of the matrix grid.
std::vector<double> row_heights(const Grid& grid);

inline constexpr std::array<double, 3> kFlatnessPoints{-0.5, 0.0, 0.5};

struct ConvergenceRow {
  double epsilon = 0.0;
  int fracture_nx = 0;
  double err_fracture = 0.0;
  double err_m1 = 0.0;
  double err_m2 = 0.0;
  std::array<double, 3> flatness{};  ///< at kFlatnessPoints
  int iterations_total = 0;
  int steps = 0;
  double max_mass_balance = 0.0;
  double wall_seconds = 0.0;
  bool ok = true;
  std::string failure;
  std::vector<double> fracture_average;  ///< x-averaged fracture head at t = T

  double flatness_mid() const { return flatness[1]; }
};

struct ConvergenceTable {
  ScalingRegime regime;  ///< epsilon unused
  EffectiveVariant variant = EffectiveVariant::I;
  double time = 0.0;     ///< evaluation time
  int effective_iterations = 0;
  double effective_mass_balance = 0.0;
  double effective_wall_seconds = 0.0;
  std::vector<double> effective_trace;  ///< head on Gamma at `time`
  std::vector<ConvergenceRow> rows;     ///< epsilon strictly decreasing

  bool all_ok() const;
  /// Least-squares slope of log(flatness at kFlatnessPoints[k]) against
  /// log(eps) over successful rows with positive flatness.
  double flatness_slope(std::size_t k) const;

  std::string to_csv() const;
  /// gnuplot-style indexed blocks "epsilon value", one per series.
  std::string plot_data() const;
};

struct SweepOptions {
  std::vector<double> epsilons;
  /// Fracture cells across the width per epsilon; empty -> default_fracture_nx.
  std::vector<int> fracture_nx;
  int jobs = 1;
  std::function<void(const std::string&)> log;
};

/// matrix_nx * 2^(log10 eps), at least one cell: 160 -> 160, 80, 40, 20, 10
/// for eps = 1 ... 1e-4.
int default_fracture_nx(int matrix_nx, double epsilon);

/// Errors of one epsilon-model state against the effective solution.
ConvergenceRow compare_to_effective(const EffectiveProblem& effective, const StateField& effective_state,
                                    const FlowProblem& full, const StateField& full_state);

/// Runs the effective model once and the epsilon-model per epsilon (up to
/// `jobs` concurrently). Member failures are recorded in their row.
/// Throws ConfigError when the variant does not match the regime or the
/// epsilon list is not strictly decreasing.
ConvergenceTable epsilon_sweep(const SimulationConfig& base, EffectiveVariant variant, const SweepOptions& opts);

}  // namespace fracflow
