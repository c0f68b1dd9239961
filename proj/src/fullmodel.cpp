#include "fracflow/fullmodel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace fracflow {

std::string to_string(BcType t) {
  switch (t) {
    case BcType::NoFlow: return "no_flow";
    case BcType::Dirichlet: return "dirichlet";
    case BcType::Neumann: return "neumann";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Configuration

double SimulationConfig::fracture_storage_scale() const {
  if (regime.epsilon == 0.0) return porosity_constant;
  return porosity_constant * std::pow(regime.epsilon, regime.kappa);
}

double SimulationConfig::fracture_conductivity_scale() const {
  if (regime.epsilon == 0.0) return conductivity_constant;
  return conductivity_constant * std::pow(regime.epsilon, regime.lambda);
}

int SimulationConfig::num_steps() const {
  const auto n = std::llround(end_time / dt);
  if (n < 1) throw ConfigError("end_time must cover at least one time step");
  return int(n);
}

void SimulationConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("solver.dt must be positive");
  if (!(end_time > 0.0)) throw ConfigError("solver.end_time must be positive");
  if (!(picard_tol > 0.0)) throw ConfigError("solver.picard_tol must be positive");
  if (picard_max_iters < 1) throw ConfigError("solver.picard_max_iters must be at least 1");
  if (!(regime.epsilon >= 0.0)) throw ConfigError("geometry.epsilon must be non-negative");
  if (!matrix.valid()) throw ConfigError("materials.matrix is missing");
  if (regime.epsilon > 0.0 && !fracture.valid()) throw ConfigError("materials.fracture is missing");
  if (!(porosity_constant > 0.0 && conductivity_constant > 0.0))
    throw ConfigError("scaling constants must be positive");
  for (const auto& s : boundary)
    if (!(s.from >= 0.0 && s.to <= 1.0 && s.from <= s.to))
      throw ConfigError("boundary segment range must satisfy 0 <= from <= to <= 1");
  (void)num_steps();
}

SimulationConfig nondimensionalize(const DimensionalInputs& in) {
  const auto& ref = in.reference;
  if (!(ref.length > 0.0 && ref.porosity > 0.0 && ref.conductivity > 0.0))
    throw ConfigError("reference scales must be positive");
  const double t_ref = ref.time();

  SimulationConfig c;
  c.reference = ref;
  c.regime = {in.fracture_width / ref.length, in.kappa, in.lambda};
  c.resolution = in.resolution;
  // alpha carries 1/length.
  VanGenuchtenParams pm = in.matrix, pf = in.fracture;
  pm.alpha *= ref.length;
  pf.alpha *= ref.length;
  c.matrix = ConstitutiveModel::van_genuchten(pm, in.table);
  c.fracture = ConstitutiveModel::van_genuchten(pf, in.table);
  c.porosity_constant = in.fracture.theta_S / in.matrix.theta_S;
  c.conductivity_constant = in.fracture.K_S / in.matrix.K_S;
  c.end_time = in.end_time / t_ref;
  c.dt = in.dt / t_ref;
  for (std::size_t i = 0; i < 3; ++i) {
    c.initial_head[i] = in.initial_head[i] / ref.length;
    c.source[i] = in.source[i] * t_ref / ref.porosity;
  }
  c.boundary = in.boundary;
  for (auto& s : c.boundary) {
    if (s.type == BcType::Dirichlet) s.value /= ref.length;
    if (s.type == BcType::Neumann) s.value /= ref.conductivity;
  }
  return c;
}

// ---------------------------------------------------------------------------
// FlowProblem

FlowProblem::FlowProblem(Grid grid, SimulationConfig config) : grid_(std::move(grid)), config_(std::move(config)) {
  config_.validate();
  const auto& cells = grid_.cells();
  storage_.resize(cells.size());
  cond_.resize(cells.size());
  const double fs = config_.fracture_storage_scale();
  const double fk = config_.fracture_conductivity_scale();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const bool frac = cells[i].sub == Subdomain::Fracture;
    storage_[i] = frac ? fs : 1.0;
    cond_[i] = frac ? fk : 1.0;
  }

  const auto& faces = grid_.faces();
  bc_type_.assign(faces.size(), BcType::NoFlow);
  bc_value_.assign(faces.size(), 0.0);
  const auto& layout = grid_.layout();
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    if (!f.is_boundary()) continue;
    const Subdomain sub = cells[std::size_t(f.owner)].sub;
    const Box& box = layout.box(sub);
    const bool along_x = f.edge == Edge::Bottom || f.edge == Edge::Top;
    const double frac = along_x ? (f.xc - box.x0) / box.width() : (f.yc - box.y0) / box.height();
    for (const auto& seg : config_.boundary) {
      if (seg.domain != sub || seg.edge != f.edge) continue;
      if (frac < seg.from || frac > seg.to) continue;
      bc_type_[i] = seg.type;
      bc_value_[i] = seg.value;
    }
  }
}

const ConstitutiveModel& FlowProblem::model(int cell) const {
  return grid_.cells()[std::size_t(cell)].sub == Subdomain::Fracture ? config_.fracture : config_.matrix;
}

double FlowProblem::source(int cell, double t) const {
  const Cell& c = grid_.cells()[std::size_t(cell)];
  if (config_.source_field) return config_.source_field(c.sub, c.xc, c.yc, t);
  return config_.source[std::size_t(c.sub)];
}

StateField FlowProblem::initial_state() const {
  StateField s;
  s.time = 0.0;
  s.psi.reserve(grid_.num_cells());
  for (const Cell& c : grid_.cells())
    s.psi.push_back(config_.initial_field ? config_.initial_field(c.sub, c.xc, c.yc)
                                          : config_.initial_head[std::size_t(c.sub)]);
  return s;
}

std::vector<double> FlowProblem::saturation(const StateField& s) const {
  std::vector<double> out(grid_.num_cells());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = model(int(i)).saturation(s.psi[i]);
  return out;
}

std::vector<double> FlowProblem::conductivity(const StateField& s) const {
  return detail::scaled_conductivity(*this, s.psi);
}

FlowProblem make_problem(const SimulationConfig& config) {
  config.validate();
  return FlowProblem(build_grid(build_geometry(config.regime, config.matrix_width), config.resolution), config);
}

// ---------------------------------------------------------------------------
// Assembly

namespace detail {

std::vector<double> scaled_conductivity(const FlowProblem& problem, const std::vector<double>& psi) {
  const std::size_t n = problem.grid().num_cells();
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i)
    k[i] = problem.conductivity_scale(int(i)) * problem.model(int(i)).conductivity(psi[i]);
  return k;
}

void assemble_cell_rows(const FlowProblem& problem, const StateField& prev, const StateField& iterate, double t,
                        const std::vector<double>& cell_k, std::vector<Eigen::Triplet<double>>& triplets,
                        Eigen::VectorXd& rhs, const GammaRoute& gamma, Eigen::VectorXd* row_sum) {
  const Grid& g = problem.grid();
  const auto& cells = g.cells();
  const auto& faces = g.faces();
  const double dt = problem.config().dt;

  for (int c = 0; c < int(cells.size()); ++c) {
    const Cell& cell = cells[std::size_t(c)];
    const ConstitutiveModel& m = problem.model(c);
    const double psi_it = iterate.psi[std::size_t(c)];
    const double area = cell.area();
    const double w = problem.storage_scale(c) * area / dt;
    const double ds = m.d_saturation(psi_it);

    // Modified Picard: S(psi^{it+1}) ~ S(psi^it) + S'(psi^it) (psi^{it+1} - psi^it).
    double diag = w * ds;
    double excess = diag;
    double b = w * (ds * psi_it - m.saturation(psi_it) + m.saturation(prev.psi[std::size_t(c)])) +
               problem.source(c, t) * area;

    for (int fi : g.cell_faces(c)) {
      const Face& f = faces[std::size_t(fi)];
      if (f.is_boundary()) {
        switch (problem.bc_type(fi)) {
          case BcType::Dirichlet: {
            const double tb = boundary_transmissibility(f, cell_k[std::size_t(c)]);
            diag += tb;
            excess += tb;
            b += tb * problem.bc_value(fi);
            break;
          }
          case BcType::Neumann: b += f.area * problem.bc_value(fi); break;
          case BcType::NoFlow: break;
        }
        continue;
      }
      const bool owner = f.owner == c;
      if (f.kind == FaceKind::Gamma && gamma) {
        const int col = gamma(cell.row);
        if (col >= 0) {
          const double th = f.area * cell_k[std::size_t(c)] / (owner ? f.d_owner : f.d_neighbor);
          diag += th;
          triplets.emplace_back(c, col, -th);
          continue;
        }
      }
      const double tf = face_transmissibility(f, cell_k[std::size_t(f.owner)], cell_k[std::size_t(f.neighbor)]);
      diag += tf;
      triplets.emplace_back(c, owner ? f.neighbor : f.owner, -tf);
    }
    triplets.emplace_back(c, c, diag);
    rhs[c] = b;
    if (row_sum) (*row_sum)[c] = excess;
  }
}

Eigen::VectorXd flux_residual(const std::vector<Eigen::Triplet<double>>& triplets, const Eigen::VectorXd& rhs,
                              const Eigen::VectorXd& row_sum, const std::vector<double>& psi) {
  Eigen::VectorXd r = rhs;
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] -= row_sum[i] * psi[std::size_t(i)];
  for (const auto& e : triplets) {
    if (e.row() == e.col()) continue;
    r[e.row()] -= e.value() * (psi[std::size_t(e.col())] - psi[std::size_t(e.row())]);
  }
  return r;
}

void boundary_balance(const FlowProblem& problem, const StateField& next, const std::vector<double>& cell_k,
                      double& outflow, double& scale) {
  const auto& faces = problem.grid().faces();
  for (int fi = 0; fi < int(faces.size()); ++fi) {
    const Face& f = faces[std::size_t(fi)];
    if (!f.is_boundary()) continue;
    double q = 0.0;
    switch (problem.bc_type(fi)) {
      case BcType::Dirichlet:
        q = boundary_transmissibility(f, cell_k[std::size_t(f.owner)]) *
            (next.psi[std::size_t(f.owner)] - problem.bc_value(fi));
        break;
      case BcType::Neumann: q = -f.area * problem.bc_value(fi); break;
      case BcType::NoFlow: break;
    }
    outflow += q;
    scale += std::abs(q);
  }
}

}  // namespace detail

LinearSystem assemble_system(const FlowProblem& problem, const StateField& prev, const StateField& iterate,
                             double t) {
  const auto n = Eigen::Index(problem.grid().num_cells());
  LinearSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(std::size_t(n) * 5);
  const auto k = detail::scaled_conductivity(problem, iterate.psi);
  detail::assemble_cell_rows(problem, prev, iterate, t, k, triplets, sys.rhs, {});
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

// ---------------------------------------------------------------------------
// Linear solver

struct LinearSolver::Impl {
  LinearSolverKind kind;
  double tol;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  Eigen::Index rows = -1;
  Eigen::Index nnz = -1;
};

LinearSolver::LinearSolver(LinearSolverKind kind, double tol) : impl_(std::make_unique<Impl>()) {
  impl_->kind = kind;
  impl_->tol = tol;
}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Eigen::VectorXd LinearSolver::solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& guess) {
  Impl& s = *impl_;
  Eigen::VectorXd x;
  if (s.kind == LinearSolverKind::Direct) {
    if (a.rows() != s.rows || a.nonZeros() != s.nnz) {
      s.ldlt.analyzePattern(a);
      s.rows = a.rows();
      s.nnz = a.nonZeros();
    }
    s.ldlt.factorize(a);
    if (s.ldlt.info() != Eigen::Success) throw std::runtime_error("sparse factorisation failed (singular matrix)");
    x = s.ldlt.solve(b);
  } else {
    s.cg.setTolerance(s.tol);
    s.cg.setMaxIterations(10 * a.rows());
    s.cg.compute(a);
    if (s.cg.info() != Eigen::Success) throw std::runtime_error("incomplete Cholesky preconditioner failed");
    x = s.cg.solveWithGuess(b, guess);
    if (s.cg.info() != Eigen::Success) throw std::runtime_error("conjugate gradients did not converge");
  }
  if (!x.allFinite()) throw std::runtime_error("linear solve produced non-finite values");
  return x;
}

// ---------------------------------------------------------------------------
// Time stepping

namespace {

std::string step_context(int step, int iter) {
  std::ostringstream os;
  os << " (step " << step << ", Picard iteration " << iter << ")";
  return os.str();
}

}  // namespace

StepResult picard_solve(const FlowProblem& problem, const StateField& prev, int step, LinearSolver* solver) {
  const auto& cfg = problem.config();
  LinearSolver local(cfg.linear_solver, cfg.linear_tol);
  if (!solver) solver = &local;

  const double t = step * cfg.dt;
  StateField it = prev;
  it.time = t;
  const auto n = Eigen::Index(problem.grid().num_cells());
  std::vector<double> history;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(std::size_t(n) * 5);
  Eigen::SparseMatrix<double> a(n, n);

  // Each iteration solves for the increment against the flux-form residual;
  // solving for the head itself leaves rounding residuals of order
  // eps_mach * T * |psi| per row, which the very large fracture
  // transmissibilities at small epsilon turn into visible mass defects.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd row_sum(n);
  for (int iter = 1; iter <= cfg.picard_max_iters; ++iter) {
    auto k = detail::scaled_conductivity(problem, it.psi);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    triplets.clear();
    detail::assemble_cell_rows(problem, prev, it, t, k, triplets, rhs, {}, &row_sum);
    a.setFromTriplets(triplets.begin(), triplets.end());
    const Eigen::VectorXd res = detail::flux_residual(triplets, rhs, row_sum, it.psi);

    Eigen::VectorXd dx;
    try {
      dx = solver->solve(a, res, zero);
    } catch (const std::exception& e) {
      throw SolverError(e.what() + step_context(step, iter), step, iter, history);
    }
    const double update = dx.lpNorm<Eigen::Infinity>();
    history.push_back(update);
    for (Eigen::Index i = 0; i < n; ++i) it.psi[std::size_t(i)] += dx[i];

    if (update <= cfg.picard_tol) {
      StepResult r;
      r.info.step = step;
      r.info.time = t;
      r.info.iterations = iter;
      r.info.residual = update;
      r.info.update_history = std::move(history);
      r.info.mass_balance = mass_balance(problem, prev, it, k).relative();
      r.state = std::move(it);
      r.cell_conductivity = std::move(k);
      return r;
    }
  }
  throw SolverError("Picard iteration did not converge" + step_context(step, cfg.picard_max_iters), step,
                    cfg.picard_max_iters, history);
}

const StateField& TimeSeries::at(double t) const {
  auto best = states.begin();
  for (auto it = states.begin(); it != states.end(); ++it)
    if (std::abs(it->time - t) < std::abs(best->time - t)) best = it;
  return *best;
}

TimeSeries run_simulation(const FlowProblem& problem) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = problem.config();
  TimeSeries ts;
  ts.states.push_back(problem.initial_state());
  LinearSolver solver(cfg.linear_solver, cfg.linear_tol);
  const int steps = cfg.num_steps();
  for (int k = 1; k <= steps; ++k) {
    StepResult r = picard_solve(problem, ts.states.back(), k, &solver);
    ts.steps.push_back(std::move(r.info));
    ts.states.push_back(std::move(r.state));
  }
  ts.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return ts;
}

TimeSeries run_simulation(const SimulationConfig& config) { return run_simulation(make_problem(config)); }

// ---------------------------------------------------------------------------
// Fluxes and audits

std::vector<double> face_fluxes(const FlowProblem& problem, const StateField& state,
                                const std::vector<double>& cell_k) {
  const auto& faces = problem.grid().faces();
  std::vector<double> q(faces.size(), 0.0);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    const double po = state.psi[std::size_t(f.owner)];
    if (f.is_boundary()) {
      switch (problem.bc_type(int(i))) {
        case BcType::Dirichlet:
          q[i] = boundary_transmissibility(f, cell_k[std::size_t(f.owner)]) * (po - problem.bc_value(int(i)));
          break;
        case BcType::Neumann: q[i] = -f.area * problem.bc_value(int(i)); break;
        case BcType::NoFlow: break;
      }
      continue;
    }
    q[i] = face_transmissibility(f, cell_k[std::size_t(f.owner)], cell_k[std::size_t(f.neighbor)]) *
           (po - state.psi[std::size_t(f.neighbor)]);
  }
  return q;
}

std::vector<double> face_fluxes(const FlowProblem& problem, const StateField& state) {
  return face_fluxes(problem, state, detail::scaled_conductivity(problem, state.psi));
}

MassBalance mass_balance(const FlowProblem& problem, const StateField& prev, const StateField& next,
                         const std::vector<double>& cell_k) {
  MassBalance mb;
  const auto& cells = problem.grid().cells();
  const double dt = problem.config().dt;
  for (int c = 0; c < int(cells.size()); ++c) {
    const auto& m = problem.model(c);
    const double area = cells[std::size_t(c)].area();
    const double st = problem.storage_scale(c) *
                      (m.saturation(next.psi[std::size_t(c)]) - m.saturation(prev.psi[std::size_t(c)])) * area / dt;
    const double src = problem.source(c, next.time) * area;
    mb.storage += st;
    mb.sources += src;
    mb.scale += std::abs(st) + std::abs(src);
  }
  detail::boundary_balance(problem, next, cell_k, mb.outflow, mb.scale);
  return mb;
}

double discrete_energy(const FlowProblem& problem, const StateField& state) {
  const auto& cells = problem.grid().cells();
  double e = 0.0;
  for (int c = 0; c < int(cells.size()); ++c)
    e += problem.storage_scale(c) * problem.model(c).energy_w(state.psi[std::size_t(c)]) * cells[std::size_t(c)].area();
  return e;
}

}  // namespace fracflow
