#pragma once

// Reduced models in which the fracture has collapsed onto Gamma = {0} x (0,1).
//
//   I    1-D Richards equation on Gamma, source [q_m]
//   II   stationary 1-D elliptic equation on Gamma, source [q_m]
//   III  one spatially constant head with d/dt S_f = int [q_m] dy
//   IV   one spatially constant head with int [q_m] dy = 0
//   V    no fracture unknown; head and flux continuous across Gamma
//
// Matrix cells next to Gamma see the fracture head through a half-cell
// transmissibility (trace coupling psi_m = Psi_f on Gamma). [q_m] is the net
// flux from both matrix blocks into Gamma per unit length.

#include <string>
#include <vector>

#include "fracflow/fullmodel.hpp"

namespace fracflow {

enum class EffectiveVariant { I, II, III, IV, V };

std::string to_string(EffectiveVariant v);

class UnsupportedRegime : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Variant for (kappa, lambda). Throws UnsupportedRegime for kappa < -1,
/// lambda >= 1, and kappa == -1 with lambda in (-1, 1).
EffectiveVariant select_variant(const ScalingRegime& regime);

/// Fracture head on Gamma: one value per row (I, II), one scalar (III, IV)
/// or empty (V).
struct InterfaceField {
  std::vector<double> psi_f;
  double time = 0.0;
};

class EffectiveProblem {
 public:
  /// Reduced-geometry problem; config.regime.epsilon is ignored.
  EffectiveProblem(const SimulationConfig& config, EffectiveVariant variant);

  const FlowProblem& matrix() const { return matrix_; }
  const Grid& grid() const { return matrix_.grid(); }
  const SimulationConfig& config() const { return matrix_.config(); }
  EffectiveVariant variant() const { return variant_; }

  int num_cells() const { return int(matrix_.grid().num_cells()); }
  int num_fracture_dofs() const { return n_frac_; }
  int num_unknowns() const { return num_cells() + n_frac_; }
  /// Unknown a matrix cell on `row` couples to across Gamma; -1 for V.
  int fracture_dof(int row) const;

  /// Gamma faces by row.
  const std::vector<int>& gamma_faces() const { return gamma_faces_; }
  /// Matrix cells adjacent to Gamma on a row: {m1 cell, m2 cell}.
  std::pair<int, int> gamma_cells(int row) const;

  double storage_constant() const { return config().porosity_constant; }
  double conductivity_constant() const { return config().conductivity_constant; }
  /// Condition at y = 0 (Edge::Bottom) or y = 1 (Edge::Top) of Gamma.
  BcType end_type(Edge e) const { return e == Edge::Bottom ? end_type_[0] : end_type_[1]; }
  double end_value(Edge e) const { return e == Edge::Bottom ? end_value_[0] : end_value_[1]; }

  /// Matrix cells followed by fracture unknowns.
  StateField initial_state() const;

  StateField matrix_part(const StateField& full) const;
  InterfaceField interface_part(const StateField& full) const;

 private:
  FlowProblem matrix_;
  EffectiveVariant variant_;
  int n_frac_ = 0;
  std::vector<int> gamma_faces_;
  std::array<BcType, 2> end_type_{BcType::NoFlow, BcType::NoFlow};
  std::array<double, 2> end_value_{0.0, 0.0};
};

/// Monolithic linearised system over matrix cells and fracture unknowns.
LinearSystem assemble_effective(const EffectiveProblem& problem, const StateField& prev,
                                const StateField& iterate, double t);

/// Half-cell transmissibility from a matrix cell to Gamma.
double gamma_half_transmissibility(const EffectiveProblem& problem, int row, bool m1_side,
                                   const std::vector<double>& cell_k);

/// Head on Gamma per row. For V it is reconstructed from flux continuity.
std::vector<double> interface_trace(const EffectiveProblem& problem, const StateField& full,
                                    const std::vector<double>& cell_k);

/// [q_m]_Gamma per row, flux into Gamma per unit length.
std::vector<double> jump_flux(const EffectiveProblem& problem, const StateField& full,
                              const std::vector<double>& cell_k);
std::vector<double> jump_flux(const EffectiveProblem& problem, const StateField& full);

/// Midpoint sum of [q_m] over Gamma.
double integrate_jump(const EffectiveProblem& problem, const std::vector<double>& jump);

struct InterfaceReport {
  int step = 0;
  double time = 0.0;
  double jump_integral = 0.0;    ///< int [q_m] dy with the converged linearisation
  double budget_residual = 0.0;  ///< III: c_phi (S_f^k - S_f^{k-1}) - dt int [q_m]; IV: the constraint
  double psi_f_min = 0.0, psi_f_max = 0.0;
};

struct EffectiveStepResult {
  StateField state;  ///< full unknown vector
  StepInfo info;
  InterfaceReport report;
  std::vector<double> cell_conductivity;
};

EffectiveStepResult effective_step(const EffectiveProblem& problem, const StateField& prev, int step,
                                   LinearSolver* solver = nullptr);

struct EffectiveSeries {
  TimeSeries matrix;                    ///< matrix cells only
  std::vector<InterfaceField> interface;  ///< parallel to matrix.states
  std::vector<InterfaceReport> reports;   ///< one per step
  std::vector<std::vector<double>> traces;  ///< head on Gamma per stored state
};

EffectiveSeries run_effective(const EffectiveProblem& problem);
EffectiveSeries run_effective(const SimulationConfig& config, EffectiveVariant variant);

}  // namespace fracflow
