#pragma once

// Richards' equation on the two-block + fracture geometry: implicit Euler in
// time, two-point flux approximation in space, modified Picard linearisation,
// one monolithic linear system per iteration.

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "fracflow/constitutive.hpp"
#include "fracflow/mesh.hpp"

namespace fracflow {

enum class BcType { NoFlow, Dirichlet, Neumann };

std::string to_string(BcType t);

/// Condition on part of one edge of a subdomain block. `from`/`to` are
/// fractions of the edge length measured from its low-coordinate end. Faces
/// whose centre falls inside [from, to] receive the condition; a later
/// segment overrides an earlier one. Neumann values are inflow fluxes.
struct BoundarySegment {
  Subdomain domain = Subdomain::M1;
  Edge edge = Edge::Bottom;
  double from = 0.0;
  double to = 1.0;
  BcType type = BcType::NoFlow;
  double value = 0.0;
};

using SourceFunction = std::function<double(Subdomain, double x, double y, double t)>;
using InitialFunction = std::function<double(Subdomain, double x, double y)>;

enum class LinearSolverKind { Direct, ConjugateGradient };

/// Reference scales of the dimensional problem.
struct ReferenceScales {
  double length = 1.0;        ///< L [m]
  double porosity = 1.0;      ///< phi_m
  double conductivity = 1.0;  ///< K_m [m/s]

  /// phi_m L / K_m [s].
  double time() const { return porosity * length / conductivity; }
};

struct SimulationConfig {
  ScalingRegime regime;
  double matrix_width = 1.0;
  GridResolution resolution;

  ConstitutiveModel matrix;
  ConstitutiveModel fracture;
  /// Proportionality constants of phi_f/phi_m = c_phi eps^kappa and
  /// K_f/K_m = c_K eps^lambda.
  double porosity_constant = 1.0;
  double conductivity_constant = 1.0;

  double end_time = 1.0;
  double dt = 0.1;
  double picard_tol = 1e-5;
  int picard_max_iters = 100;
  LinearSolverKind linear_solver = LinearSolverKind::Direct;
  double linear_tol = 1e-13;  ///< relative residual, iterative solver only

  /// Edges not covered by a segment are no-flow.
  std::vector<BoundarySegment> boundary;
  /// Per subdomain, indexed by Subdomain.
  std::array<double, 3> initial_head{0.0, 0.0, 0.0};
  std::array<double, 3> source{0.0, 0.0, 0.0};
  /// Optional overrides of the constant values above.
  InitialFunction initial_field;
  SourceFunction source_field;

  ReferenceScales reference;

  double fracture_storage_scale() const;
  double fracture_conductivity_scale() const;
  int num_steps() const;
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimensional description of the injection problem.
struct DimensionalInputs {
  ReferenceScales reference;
  double fracture_width = 0.01;  ///< l [m]
  double kappa = -1.0, lambda = -1.0;
  VanGenuchtenParams matrix = silt_loam();
  VanGenuchtenParams fracture = touchet_silt_loam();
  double end_time = 1.0;  ///< [s]
  double dt = 0.1;        ///< [s]
  std::array<double, 3> initial_head{0.0, 0.0, 0.0};  ///< [m]
  std::array<double, 3> source{0.0, 0.0, 0.0};        ///< [1/s]
  /// Dirichlet values in [m], Neumann inflow in [m/s].
  std::vector<BoundarySegment> boundary;
  GridResolution resolution;
  KirchhoffTableOptions table;
};

/// psi = psi_hat / L, alpha = alpha_hat L, t = t_hat / T_ref, f = f_hat T_ref / phi_m,
/// q = q_hat / K_m, eps = l / L. The porosity and conductivity constants are
/// theta_S,f / theta_S,m and K_S,f / K_S,m.
SimulationConfig nondimensionalize(const DimensionalInputs& in);

/// Pressure head per unknown at one time level.
struct StateField {
  std::vector<double> psi;
  double time = 0.0;
};

/// Discretised problem: grid plus per-cell coefficients and per-face
/// boundary data.
class FlowProblem {
 public:
  FlowProblem(Grid grid, SimulationConfig config);

  const Grid& grid() const { return grid_; }
  const SimulationConfig& config() const { return config_; }

  const ConstitutiveModel& model(int cell) const;
  double storage_scale(int cell) const { return storage_[std::size_t(cell)]; }
  double conductivity_scale(int cell) const { return cond_[std::size_t(cell)]; }
  BcType bc_type(int face) const { return bc_type_[std::size_t(face)]; }
  double bc_value(int face) const { return bc_value_[std::size_t(face)]; }
  double source(int cell, double t) const;

  StateField initial_state() const;
  /// S(psi) per cell.
  std::vector<double> saturation(const StateField& s) const;
  /// Scaled conductivity sigma K(S(psi)) per cell.
  std::vector<double> conductivity(const StateField& s) const;

 private:
  Grid grid_;
  SimulationConfig config_;
  std::vector<double> storage_, cond_;
  std::vector<BcType> bc_type_;
  std::vector<double> bc_value_;
};

/// Problem on the epsilon-geometry described by config.regime.
FlowProblem make_problem(const SimulationConfig& config);

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
};

/// Linearised system for psi^{k,it+1} given psi^{k-1} and psi^{k,it} at time t.
LinearSystem assemble_system(const FlowProblem& problem, const StateField& prev, const StateField& iterate,
                             double t);

struct StepInfo {
  int step = 0;
  double time = 0.0;
  int iterations = 0;
  double residual = 0.0;  ///< max-norm of the last head update
  std::vector<double> update_history;
  double mass_balance = 0.0;  ///< relative discrete balance defect
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int step, int iteration, std::vector<double> history)
      : std::runtime_error(what), step(step), iteration(iteration), history(std::move(history)) {}
  int step;
  int iteration;
  std::vector<double> history;
};

/// Sparse symmetric solve with the pattern analysed once.
class LinearSolver {
 public:
  explicit LinearSolver(LinearSolverKind kind = LinearSolverKind::Direct, double tol = 1e-13);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Throws std::runtime_error when the factorisation fails.
  Eigen::VectorXd solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                        const Eigen::VectorXd& guess);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct StepResult {
  StateField state;
  StepInfo info;
  /// Scaled cell conductivities of the final linearisation; the converged
  /// fluxes are conservative with respect to these.
  std::vector<double> cell_conductivity;
};

/// One implicit Euler step. Throws SolverError when the Picard iteration
/// does not reach picard_tol within picard_max_iters.
StepResult picard_solve(const FlowProblem& problem, const StateField& prev, int step,
                        LinearSolver* solver = nullptr);

struct TimeSeries {
  std::vector<StateField> states;  ///< states[0] is the initial condition
  std::vector<StepInfo> steps;
  double wall_seconds = 0.0;

  const StateField& final_state() const { return states.back(); }
  /// State whose time is closest to t.
  const StateField& at(double t) const;
};

TimeSeries run_simulation(const FlowProblem& problem);
TimeSeries run_simulation(const SimulationConfig& config);

/// Per-face flux; owner -> neighbour for interior faces, outward for
/// boundary faces. Uses the given scaled cell conductivities.
std::vector<double> face_fluxes(const FlowProblem& problem, const StateField& state,
                                const std::vector<double>& cell_conductivity);
std::vector<double> face_fluxes(const FlowProblem& problem, const StateField& state);

struct MassBalance {
  double storage = 0.0;   ///< sum sigma (S^k - S^{k-1}) |cell| / dt
  double sources = 0.0;   ///< sum f |cell|
  double outflow = 0.0;   ///< net outward boundary flux
  double scale = 0.0;     ///< sum of absolute contributions
  double residual() const { return storage - sources + outflow; }
  double relative() const { return scale > 0.0 ? std::abs(residual()) / scale : 0.0; }
};

MassBalance mass_balance(const FlowProblem& problem, const StateField& prev, const StateField& next,
                         const std::vector<double>& cell_conductivity);

/// Discrete energy sum sigma W(psi) |cell| (storage scale included).
double discrete_energy(const FlowProblem& problem, const StateField& state);

namespace detail {

/// Routes reduced-interface faces: returns the unknown a matrix cell on row
/// `row` couples to through a half-cell transmissibility, or -1 to treat the
/// face as an ordinary interior face.
using GammaRoute = std::function<int(int row)>;

/// Storage + face rows for every grid cell into the triplet list / rhs.
/// `row_sum`, when given, receives the row sums of the matrix (storage and
/// Dirichlet terms) accumulated without the cancelling face terms.
void assemble_cell_rows(const FlowProblem& problem, const StateField& prev, const StateField& iterate,
                        double t, const std::vector<double>& cell_k,
                        std::vector<Eigen::Triplet<double>>& triplets, Eigen::VectorXd& rhs,
                        const GammaRoute& gamma, Eigen::VectorXd* row_sum = nullptr);

/// rhs - A psi with every off-diagonal entry applied to a head difference,
/// so large transmissibilities do not swamp the residual in rounding.
Eigen::VectorXd flux_residual(const std::vector<Eigen::Triplet<double>>& triplets, const Eigen::VectorXd& rhs,
                              const Eigen::VectorXd& row_sum, const std::vector<double>& psi);

std::vector<double> scaled_conductivity(const FlowProblem& problem, const std::vector<double>& psi);

/// Boundary contribution to the balance (outflow and absolute scale).
void boundary_balance(const FlowProblem& problem, const StateField& next, const std::vector<double>& cell_k,
                      double& outflow, double& scale);

}  // namespace detail

}  // namespace fracflow
