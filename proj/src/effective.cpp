#include "fracflow/effective.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace fracflow {

std::string to_string(EffectiveVariant v) {
  switch (v) {
    case EffectiveVariant::I: return "I";
    case EffectiveVariant::II: return "II";
    case EffectiveVariant::III: return "III";
    case EffectiveVariant::IV: return "IV";
    case EffectiveVariant::V: return "V";
  }
  return "?";
}

EffectiveVariant select_variant(const ScalingRegime& regime) {
  const double k = regime.kappa, l = regime.lambda;
  std::ostringstream os;
  os << "(kappa, lambda) = (" << k << ", " << l << "): ";
  if (l >= 1.0)
    throw UnsupportedRegime(os.str() + "lambda >= 1 describes an impermeable fracture with a pressure jump");
  if (k < -1.0) throw UnsupportedRegime(os.str() + "kappa < -1 lies outside the covered range");
  if (k == -1.0) {
    if (l == -1.0) return EffectiveVariant::I;
    if (l < -1.0) return EffectiveVariant::III;
    throw UnsupportedRegime(os.str() + "kappa = -1 with lambda in (-1, 1) is left unresolved");
  }
  if (l == -1.0) return EffectiveVariant::II;
  if (l < -1.0) return EffectiveVariant::IV;
  return EffectiveVariant::V;
}

// ---------------------------------------------------------------------------

namespace {

SimulationConfig reduced_config(SimulationConfig c) {
  c.regime.epsilon = 0.0;
  return c;
}

Grid reduced_grid(const SimulationConfig& c) {
  return build_grid(build_geometry({0.0, c.regime.kappa, c.regime.lambda}, c.matrix_width), c.resolution);
}

bool has_storage(EffectiveVariant v) { return v == EffectiveVariant::I || v == EffectiveVariant::III; }
bool per_row(EffectiveVariant v) { return v == EffectiveVariant::I || v == EffectiveVariant::II; }

}  // namespace

EffectiveProblem::EffectiveProblem(const SimulationConfig& config, EffectiveVariant variant)
    : matrix_(reduced_grid(config), reduced_config(config)), variant_(variant) {
  if (variant_ != EffectiveVariant::V && !config.fracture.valid())
    throw ConfigError("materials.fracture is missing");
  gamma_faces_ = matrix_.grid().interface_faces(FaceKind::Gamma);
  if (gamma_faces_.empty()) throw ConfigError("effective model needs two matrix blocks meeting at Gamma");
  switch (variant_) {
    case EffectiveVariant::I:
    case EffectiveVariant::II: n_frac_ = matrix_.grid().ny(); break;
    case EffectiveVariant::III:
    case EffectiveVariant::IV: n_frac_ = 1; break;
    case EffectiveVariant::V: n_frac_ = 0; break;
  }
  for (const auto& s : config.boundary) {
    if (s.domain != Subdomain::Fracture) continue;
    if (s.edge != Edge::Bottom && s.edge != Edge::Top) continue;
    if (s.type == BcType::Neumann && s.value != 0.0)
      throw ConfigError("effective model: Neumann data on the fracture ends is not supported");
    const std::size_t k = s.edge == Edge::Bottom ? 0 : 1;
    end_type_[k] = s.type == BcType::Neumann ? BcType::NoFlow : s.type;
    end_value_[k] = s.value;
  }
}

int EffectiveProblem::fracture_dof(int row) const {
  switch (variant_) {
    case EffectiveVariant::I:
    case EffectiveVariant::II: return num_cells() + row;
    case EffectiveVariant::III:
    case EffectiveVariant::IV: return num_cells();
    case EffectiveVariant::V: return -1;
  }
  return -1;
}

std::pair<int, int> EffectiveProblem::gamma_cells(int row) const {
  const Face& f = grid().faces()[std::size_t(gamma_faces_[std::size_t(row)])];
  return {f.owner, f.neighbor};
}

StateField EffectiveProblem::initial_state() const {
  StateField s = matrix_.initial_state();
  const auto& cfg = config();
  for (int j = 0; j < n_frac_; ++j) {
    const Cell& c = grid().cells()[std::size_t(gamma_cells(j).first)];
    const double y = per_row(variant_) ? c.yc : 0.5;
    s.psi.push_back(cfg.initial_field ? cfg.initial_field(Subdomain::Fracture, 0.0, y)
                                      : cfg.initial_head[std::size_t(Subdomain::Fracture)]);
  }
  return s;
}

StateField EffectiveProblem::matrix_part(const StateField& full) const {
  StateField s;
  s.time = full.time;
  s.psi.assign(full.psi.begin(), full.psi.begin() + num_cells());
  return s;
}

InterfaceField EffectiveProblem::interface_part(const StateField& full) const {
  InterfaceField f;
  f.time = full.time;
  f.psi_f.assign(full.psi.begin() + num_cells(), full.psi.end());
  return f;
}

// ---------------------------------------------------------------------------

double gamma_half_transmissibility(const EffectiveProblem& problem, int row, bool m1_side,
                                   const std::vector<double>& cell_k) {
  const Face& f = problem.grid().faces()[std::size_t(problem.gamma_faces()[std::size_t(row)])];
  const int c = m1_side ? f.owner : f.neighbor;
  return f.area * cell_k[std::size_t(c)] / (m1_side ? f.d_owner : f.d_neighbor);
}

namespace {

double row_height(const EffectiveProblem& p, int row) {
  return p.grid().cells()[std::size_t(p.gamma_cells(row).first)].dy;
}

double fracture_k(const EffectiveProblem& p, double psi) {
  return p.conductivity_constant() * p.config().fracture.conductivity(psi);
}

// 1-D Gamma "face" between rows j and j+1 (unit area).
Face gamma_segment(const EffectiveProblem& p, int j) {
  Face f;
  f.area = 1.0;
  f.d_owner = 0.5 * row_height(p, j);
  f.d_neighbor = j + 1 < p.grid().ny() ? 0.5 * row_height(p, j + 1) : 0.0;
  return f;
}

// Outward flux through the fracture ends (variants I and II).
double fracture_end_outflow(const EffectiveProblem& p, const StateField& s, double& scale) {
  if (!per_row(p.variant())) return 0.0;
  const int nc = p.num_cells();
  const int ny = p.grid().ny();
  double out = 0.0;
  for (Edge e : {Edge::Bottom, Edge::Top}) {
    if (p.end_type(e) != BcType::Dirichlet) continue;
    const int j = e == Edge::Bottom ? 0 : ny - 1;
    const double psi = s.psi[std::size_t(nc + j)];
    const double q = boundary_transmissibility(gamma_segment(p, j), fracture_k(p, psi)) * (psi - p.end_value(e));
    out += q;
    scale += std::abs(q);
  }
  return out;
}

void add_fracture_rows(const EffectiveProblem& p, const StateField& prev, const StateField& it,
                       const std::vector<double>& cell_k, std::vector<Eigen::Triplet<double>>& triplets,
                       Eigen::VectorXd& rhs, Eigen::VectorXd& row_sum) {
  const auto v = p.variant();
  if (v == EffectiveVariant::V) return;
  const int nc = p.num_cells();
  const int ny = p.grid().ny();
  const double dt = p.config().dt;
  const ConstitutiveModel& mf = p.config().fracture;
  const double cs = p.storage_constant();

  if (per_row(v)) {
    std::vector<double> kf(static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j) kf[std::size_t(j)] = fracture_k(p, it.psi[std::size_t(nc + j)]);
    for (int j = 0; j < ny; ++j) {
      const int r = nc + j;
      const double psi = it.psi[std::size_t(r)];
      double diag = 0.0, b = 0.0, excess = 0.0;
      if (has_storage(v)) {
        const double w = cs * row_height(p, j) / dt;
        const double ds = mf.d_saturation(psi);
        diag += w * ds;
        excess += w * ds;
        b += w * (ds * psi - mf.saturation(psi) + mf.saturation(prev.psi[std::size_t(r)]));
      }
      // South
      if (j > 0) {
        const double t = face_transmissibility(gamma_segment(p, j - 1), kf[std::size_t(j - 1)], kf[std::size_t(j)]);
        diag += t;
        triplets.emplace_back(r, r - 1, -t);
      } else if (p.end_type(Edge::Bottom) == BcType::Dirichlet) {
        const double t = boundary_transmissibility(gamma_segment(p, j), kf[std::size_t(j)]);
        diag += t;
        excess += t;
        b += t * p.end_value(Edge::Bottom);
      }
      // North
      if (j + 1 < ny) {
        const double t = face_transmissibility(gamma_segment(p, j), kf[std::size_t(j)], kf[std::size_t(j + 1)]);
        diag += t;
        triplets.emplace_back(r, r + 1, -t);
      } else if (p.end_type(Edge::Top) == BcType::Dirichlet) {
        const double t = boundary_transmissibility(gamma_segment(p, j), kf[std::size_t(j)]);
        diag += t;
        excess += t;
        b += t * p.end_value(Edge::Top);
      }
      const auto [c1, c2] = p.gamma_cells(j);
      const double t1 = gamma_half_transmissibility(p, j, true, cell_k);
      const double t2 = gamma_half_transmissibility(p, j, false, cell_k);
      diag += t1 + t2;
      triplets.emplace_back(r, c1, -t1);
      triplets.emplace_back(r, c2, -t2);
      triplets.emplace_back(r, r, diag);
      rhs[r] = b;
      row_sum[r] = excess;
    }
    return;
  }

  // III, IV: one unknown for the whole interface.
  const int r = nc;
  const double psi = it.psi[std::size_t(r)];
  double diag = 0.0, b = 0.0, excess = 0.0;
  if (has_storage(v)) {
    double length = 0.0;
    for (int j = 0; j < ny; ++j) length += row_height(p, j);
    const double w = cs * length / dt;
    const double ds = mf.d_saturation(psi);
    diag += w * ds;
    excess = w * ds;
    b += w * (ds * psi - mf.saturation(psi) + mf.saturation(prev.psi[std::size_t(r)]));
  }
  for (int j = 0; j < ny; ++j) {
    const auto [c1, c2] = p.gamma_cells(j);
    const double t1 = gamma_half_transmissibility(p, j, true, cell_k);
    const double t2 = gamma_half_transmissibility(p, j, false, cell_k);
    diag += t1 + t2;
    triplets.emplace_back(r, c1, -t1);
    triplets.emplace_back(r, c2, -t2);
  }
  triplets.emplace_back(r, r, diag);
  rhs[r] = b;
  row_sum[r] = excess;
}

detail::GammaRoute route_for(const EffectiveProblem& p) {
  if (p.variant() == EffectiveVariant::V) return {};
  return [&p](int row) { return p.fracture_dof(row); };
}

void build_system(const EffectiveProblem& p, const StateField& prev, const StateField& it, double t,
                  const std::vector<double>& cell_k, std::vector<Eigen::Triplet<double>>& triplets,
                  Eigen::VectorXd& rhs, Eigen::VectorXd& row_sum) {
  triplets.clear();
  rhs.setZero(p.num_unknowns());
  row_sum.setZero(p.num_unknowns());
  detail::assemble_cell_rows(p.matrix(), prev, it, t, cell_k, triplets, rhs, route_for(p), &row_sum);
  add_fracture_rows(p, prev, it, cell_k, triplets, rhs, row_sum);
}

}  // namespace

LinearSystem assemble_effective(const EffectiveProblem& problem, const StateField& prev, const StateField& iterate,
                                double t) {
  const auto n = Eigen::Index(problem.num_unknowns());
  LinearSystem sys;
  std::vector<Eigen::Triplet<double>> triplets;
  const auto k = detail::scaled_conductivity(problem.matrix(), iterate.psi);
  Eigen::VectorXd row_sum;
  build_system(problem, prev, iterate, t, k, triplets, sys.rhs, row_sum);
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

std::vector<double> interface_trace(const EffectiveProblem& problem, const StateField& full,
                                    const std::vector<double>& cell_k) {
  const int ny = problem.grid().ny();
  std::vector<double> out(static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    const int dof = problem.fracture_dof(j);
    if (dof >= 0) {
      out[std::size_t(j)] = full.psi[std::size_t(dof)];
      continue;
    }
    const auto [c1, c2] = problem.gamma_cells(j);
    const double t1 = gamma_half_transmissibility(problem, j, true, cell_k);
    const double t2 = gamma_half_transmissibility(problem, j, false, cell_k);
    out[std::size_t(j)] = (t1 * full.psi[std::size_t(c1)] + t2 * full.psi[std::size_t(c2)]) / (t1 + t2);
  }
  return out;
}

std::vector<double> jump_flux(const EffectiveProblem& problem, const StateField& full,
                              const std::vector<double>& cell_k) {
  const auto trace = interface_trace(problem, full, cell_k);
  const int ny = problem.grid().ny();
  std::vector<double> q(static_cast<std::size_t>(ny));
  for (int j = 0; j < ny; ++j) {
    const auto [c1, c2] = problem.gamma_cells(j);
    const double t1 = gamma_half_transmissibility(problem, j, true, cell_k);
    const double t2 = gamma_half_transmissibility(problem, j, false, cell_k);
    const double g = trace[std::size_t(j)];
    q[std::size_t(j)] = (t1 * (full.psi[std::size_t(c1)] - g) + t2 * (full.psi[std::size_t(c2)] - g)) / row_height(problem, j);
  }
  return q;
}

std::vector<double> jump_flux(const EffectiveProblem& problem, const StateField& full) {
  return jump_flux(problem, full, detail::scaled_conductivity(problem.matrix(), full.psi));
}

double integrate_jump(const EffectiveProblem& problem, const std::vector<double>& jump) {
  double s = 0.0;
  for (int j = 0; j < int(jump.size()); ++j) s += jump[std::size_t(j)] * row_height(problem, j);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

InterfaceReport make_report(const EffectiveProblem& p, const StateField& prev, const StateField& next,
                            const std::vector<double>& cell_k, int step, double& frac_storage_rate,
                            double& end_outflow, double& scale) {
  InterfaceReport rep;
  rep.step = step;
  rep.time = next.time;
  const auto jump = jump_flux(p, next, cell_k);
  rep.jump_integral = integrate_jump(p, jump);

  const int nc = p.num_cells();
  const double dt = p.config().dt;
  const auto& mf = p.config().fracture;
  double storage = 0.0;  // c_phi * int (S^k - S^{k-1}) dy
  if (has_storage(p.variant())) {
    const int nf = p.num_fracture_dofs();
    for (int j = 0; j < nf; ++j) {
      const double len = per_row(p.variant()) ? row_height(p, j) : [&] {
        double l = 0.0;
        for (int r = 0; r < p.grid().ny(); ++r) l += row_height(p, r);
        return l;
      }();
      const auto r = std::size_t(nc + j);
      const double st = p.storage_constant() * (mf.saturation(next.psi[r]) - mf.saturation(prev.psi[r])) * len;
      storage += st;
      scale += std::abs(st) / dt;
    }
  }
  end_outflow = fracture_end_outflow(p, next, scale);
  frac_storage_rate = storage / dt;
  rep.budget_residual = storage - dt * (rep.jump_integral - end_outflow);
  if (p.variant() == EffectiveVariant::IV) rep.budget_residual = rep.jump_integral;

  const auto trace = interface_trace(p, next, cell_k);
  rep.psi_f_min = *std::min_element(trace.begin(), trace.end());
  rep.psi_f_max = *std::max_element(trace.begin(), trace.end());
  return rep;
}

}  // namespace

EffectiveStepResult effective_step(const EffectiveProblem& problem, const StateField& prev, int step,
                                   LinearSolver* solver) {
  const auto& cfg = problem.config();
  LinearSolver local(cfg.linear_solver, cfg.linear_tol);
  if (!solver) solver = &local;

  const double t = step * cfg.dt;
  StateField it = prev;
  it.time = t;
  const auto n = Eigen::Index(problem.num_unknowns());
  std::vector<double> history;
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs;
  Eigen::SparseMatrix<double> a(n, n);

  // Increment form, as in picard_solve.
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd row_sum;
  for (int iter = 1; iter <= cfg.picard_max_iters; ++iter) {
    auto k = detail::scaled_conductivity(problem.matrix(), it.psi);
    build_system(problem, prev, it, t, k, triplets, rhs, row_sum);
    a.setFromTriplets(triplets.begin(), triplets.end());
    const Eigen::VectorXd res = detail::flux_residual(triplets, rhs, row_sum, it.psi);

    Eigen::VectorXd dx;
    try {
      dx = solver->solve(a, res, zero);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << e.what() << " (effective model " << to_string(problem.variant()) << ", step " << step
         << ", Picard iteration " << iter << ")";
      throw SolverError(os.str(), step, iter, history);
    }
    const double update = dx.lpNorm<Eigen::Infinity>();
    history.push_back(update);
    for (Eigen::Index i = 0; i < n; ++i) it.psi[std::size_t(i)] += dx[i];

    if (update <= cfg.picard_tol) {
      EffectiveStepResult r;
      r.info.step = step;
      r.info.time = t;
      r.info.iterations = iter;
      r.info.residual = update;
      r.info.update_history = std::move(history);

      MassBalance mb = mass_balance(problem.matrix(), prev, it, k);
      double frac_rate = 0.0, end_out = 0.0;
      r.report = make_report(problem, prev, it, k, step, frac_rate, end_out, mb.scale);
      mb.storage += frac_rate;
      mb.outflow += end_out;
      r.info.mass_balance = mb.relative();

      r.state = std::move(it);
      r.cell_conductivity = std::move(k);
      return r;
    }
  }
  std::ostringstream os;
  os << "Picard iteration did not converge (effective model " << to_string(problem.variant()) << ", step "
     << step << ")";
  throw SolverError(os.str(), step, cfg.picard_max_iters, history);
}

EffectiveSeries run_effective(const EffectiveProblem& problem) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = problem.config();
  EffectiveSeries out;
  StateField current = problem.initial_state();
  auto k0 = detail::scaled_conductivity(problem.matrix(), current.psi);
  out.matrix.states.push_back(problem.matrix_part(current));
  out.interface.push_back(problem.interface_part(current));
  out.traces.push_back(interface_trace(problem, current, k0));

  LinearSolver solver(cfg.linear_solver, cfg.linear_tol);
  const int steps = cfg.num_steps();
  for (int s = 1; s <= steps; ++s) {
    EffectiveStepResult r = effective_step(problem, current, s, &solver);
    out.traces.push_back(interface_trace(problem, r.state, r.cell_conductivity));
    out.matrix.states.push_back(problem.matrix_part(r.state));
    out.interface.push_back(problem.interface_part(r.state));
    out.matrix.steps.push_back(std::move(r.info));
    out.reports.push_back(r.report);
    current = std::move(r.state);
  }
  out.matrix.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

EffectiveSeries run_effective(const SimulationConfig& config, EffectiveVariant variant) {
  return run_effective(EffectiveProblem(config, variant));
}

}  // namespace fracflow
