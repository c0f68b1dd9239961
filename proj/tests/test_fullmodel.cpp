#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace fracflow;
using fracflow::testing::injection;
using fracflow::testing::linear_model;

namespace {

SimulationConfig block_config(int n, ConstitutiveModel m) {
  SimulationConfig c;
  c.regime = {0.0, -1, -1};
  c.resolution = {n, n, 0};
  c.matrix = m;
  c.end_time = 1.0;
  c.dt = 1.0;
  return c;
}

FlowProblem block_problem(int n, ConstitutiveModel m, SimulationConfig* out = nullptr) {
  auto c = block_config(n, std::move(m));
  if (out) *out = c;
  return FlowProblem(build_block_grid({0.0, 1.0, 0.0, 1.0}, n, n), c);
}

double entry(const Eigen::SparseMatrix<double>& a, int i, int j) { return a.coeff(i, j); }

}  // namespace

TEST_CASE("hand-assembled 2x2 block") {
  // S = psi, K = 1, dt = 1, cells of size 1/2: storage 1/4, interior T = 1.
  const FlowProblem p = block_problem(2, linear_model());
  StateField s{{0.0, 0.0, 0.0, 0.0}, 0.0};
  const auto sys = assemble_system(p, s, s, 1.0);
  for (int i = 0; i < 4; ++i) CHECK(entry(sys.matrix, i, i) == doctest::Approx(0.25 + 2.0));
  CHECK(entry(sys.matrix, 0, 1) == -1.0);
  CHECK(entry(sys.matrix, 0, 2) == -1.0);
  CHECK(entry(sys.matrix, 0, 3) == 0.0);
  CHECK(entry(sys.matrix, 1, 3) == -1.0);
  CHECK(sys.rhs.isZero());
  CHECK(Eigen::MatrixXd(sys.matrix).isApprox(Eigen::MatrixXd(sys.matrix).transpose()));

  // A Dirichlet left edge adds A k / d = 0.5 / 0.25 = 2 to the left column.
  SimulationConfig c;
  auto m = linear_model();
  auto cfg = block_config(2, m);
  cfg.boundary = {{Subdomain::M1, Edge::Left, 0.0, 1.0, BcType::Dirichlet, 3.0},
                  {Subdomain::M1, Edge::Top, 0.5, 1.0, BcType::Neumann, 0.5}};
  const FlowProblem q(build_block_grid({0.0, 1.0, 0.0, 1.0}, 2, 2), cfg);
  const auto sq = assemble_system(q, s, s, 1.0);
  CHECK(entry(sq.matrix, 0, 0) == doctest::Approx(4.25));
  CHECK(sq.rhs[0] == doctest::Approx(6.0));
  CHECK(sq.rhs[1] == 0.0);
  CHECK(sq.rhs[3] == doctest::Approx(0.25));  // only the right half of the top edge
  CHECK(sq.rhs[2] == doctest::Approx(6.0));
}

TEST_CASE("isolated cell keeps its state") {
  const FlowProblem p = block_problem(1, ConstitutiveModel::van_genuchten(silt_loam()));
  const StateField s{{-2.5}, 0.0};
  const auto r = picard_solve(p, s, 1);
  CHECK(r.state.psi[0] == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("spatially constant data follow the scalar update") {
  auto c = injection(0.1, 6, 2);
  c.boundary.clear();
  c.source = {0.4, 0.4, 0.4};
  c.porosity_constant = 1.0;
  c.regime.kappa = 0.0;  // unit storage everywhere
  c.fracture = c.matrix;
  c.dt = 0.05;
  c.end_time = 0.1;
  c.picard_tol = 1e-12;
  const FlowProblem p = make_problem(c);
  const auto ts = run_simulation(p);
  const auto& m = c.matrix;
  double psi = -3.0;
  for (int k = 1; k <= 2; ++k) {
    // Bisection on S(psi) = S(psi_prev) + dt f.
    const double target = m.saturation(psi) + c.dt * 0.4;
    double lo = -10.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (m.saturation(mid) < target ? lo : hi) = mid;
    }
    psi = 0.5 * (lo + hi);
    for (double v : ts.states[std::size_t(k)].psi) CHECK(v == doctest::Approx(psi).epsilon(1e-9));
  }
}

TEST_CASE("equilibrium without forcing") {
  auto c = injection(0.1, 6, 2);
  c.boundary.clear();
  const auto ts = run_simulation(c);
  CHECK(ts.states.size() == 31u);
  for (const auto& s : ts.states)
    for (double v : s.psi) CHECK(v == doctest::Approx(-3.0).epsilon(1e-14));
}

TEST_CASE("linear steady state is exact") {
  SimulationConfig c;
  auto p0 = block_problem(4, linear_model(1.0, 2.0), &c);
  c.boundary = {{Subdomain::M1, Edge::Left, 0.0, 1.0, BcType::Dirichlet, 1.0},
                {Subdomain::M1, Edge::Right, 0.0, 1.0, BcType::Dirichlet, 0.0}};
  c.dt = 1e6;
  c.end_time = 2e6;
  const FlowProblem p(build_block_grid({0.0, 1.0, 0.0, 1.0}, 4, 4), c);
  const auto ts = run_simulation(p);
  const auto& cells = p.grid().cells();
  for (std::size_t i = 0; i < cells.size(); ++i)
    CHECK(ts.final_state().psi[i] == doctest::Approx(1.0 - cells[i].xc).epsilon(1e-9));
  // Fluxes: uniform, left to right, 2 * 1 per unit length.
  const auto q = face_fluxes(p, ts.final_state());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Face& f = p.grid().faces()[i];
    if (f.normal_x) CHECK(q[i] * (f.is_boundary() && f.edge == Edge::Left ? -1.0 : 1.0) ==
                          doctest::Approx(2.0 * f.area).epsilon(1e-6));
  }
}

TEST_CASE("fluxes") {
  const FlowProblem p = block_problem(2, linear_model());
  StateField s{{1.0, 1.0, 1.0, 1.0}, 0.0};
  for (double q : face_fluxes(p, s)) CHECK(q == 0.0);
  s.psi = {1.0, 0.0, 1.0, 0.0};
  const auto q = face_fluxes(p, s);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Face& f = p.grid().faces()[i];
    if (!f.is_boundary() && f.normal_x) CHECK(q[i] == 1.0);  // T = 1, high to low
  }
}

TEST_CASE("injection: first step balance, Picard fixed point") {
  const FlowProblem p = make_problem(injection(0.1, 16, 4));
  const auto s0 = p.initial_state();
  const auto r = picard_solve(p, s0, 1);
  CHECK(r.info.iterations <= 100);
  CHECK(r.info.mass_balance <= 1e-8);
  const auto mb = mass_balance(p, s0, r.state, r.cell_conductivity);
  CHECK(mb.relative() == doctest::Approx(r.info.mass_balance));
  CHECK(mb.outflow < 0.0);  // net inflow at the bottom

  // Re-entering the converged iterate changes it by less than the tolerance.
  const auto sys = assemble_system(p, s0, r.state, r.info.time);
  LinearSolver solver;
  const Eigen::Map<const Eigen::VectorXd> x(r.state.psi.data(), Eigen::Index(r.state.psi.size()));
  const Eigen::VectorXd y = solver.solve(sys.matrix, sys.rhs, x);
  CHECK((y - x).lpNorm<Eigen::Infinity>() <= p.config().picard_tol);

  // Conjugate gradients agree with the direct solve.
  auto cg = injection(0.1, 16, 4);
  cg.linear_solver = LinearSolverKind::ConjugateGradient;
  const auto rc = picard_solve(make_problem(cg), s0, 1);
  double diff = 0.0;
  for (std::size_t i = 0; i < s0.psi.size(); ++i) diff = std::max(diff, std::abs(rc.state.psi[i] - r.state.psi[i]));
  CHECK(diff < 1e-6);
}

TEST_CASE("injection run at coarse resolution") {
  const auto ts = run_simulation(injection(1.0, 16, 8));
  CHECK(ts.steps.size() == 30u);
  CHECK(ts.final_state().time == doctest::Approx(0.45));
  for (const auto& s : ts.steps) {
    CHECK(s.iterations <= 100);
    CHECK(s.mass_balance <= 1e-8);
  }
  CHECK(ts.at(0.18).time == doctest::Approx(0.18));
}

TEST_CASE("solver failure carries the history") {
  auto c = injection(0.1, 8, 2);
  c.picard_max_iters = 1;
  c.picard_tol = 1e-15;
  try {
    run_simulation(c);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.step == 1);
    CHECK(e.history.size() == 1u);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("configuration checks") {
  auto c = injection(0.1);
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = injection(0.1);
  c.boundary.push_back({Subdomain::M1, Edge::Top, 0.6, 0.2, BcType::NoFlow, 0.0});
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = injection(0.01);
  CHECK(c.fracture_storage_scale() == doctest::Approx(0.469 / 0.396 * 100));
  CHECK(c.num_steps() == 30);
}

TEST_CASE("nondimensionalisation") {
  DimensionalInputs in;
  in.reference = {1.0, 0.396, 5.74e-7};
  in.initial_head = {-3.0, -3.0, -3.0};
  in.end_time = in.reference.time();
  in.dt = 0.1 * in.reference.time();
  in.fracture_width = 0.01;
  in.source = {1e-8, 0.0, 0.0};
  in.boundary = {{Subdomain::M1, Edge::Bottom, 0.0, 1.0, BcType::Neumann, 2.87e-7}};
  const auto c = nondimensionalize(in);
  CHECK(c.initial_head[0] == -3.0);
  CHECK(c.end_time == doctest::Approx(1.0));
  CHECK(c.dt == doctest::Approx(0.1));
  CHECK(c.regime.epsilon == doctest::Approx(0.01));
  CHECK(c.boundary[0].value == doctest::Approx(0.5));
  CHECK(c.source[0] == doctest::Approx(1e-8 * in.reference.time() / 0.396));
  CHECK(c.fracture_storage_scale() == doctest::Approx(0.469 / 0.396 * 100));
  CHECK(c.fracture_conductivity_scale() == doctest::Approx(3.507e-5 / 5.74e-7 * 100));

  in.reference.length = 2.0;
  const auto c2 = nondimensionalize(in);
  CHECK(c2.initial_head[0] == -1.5);
  // alpha scales with L, so S at the same physical head is unchanged.
  CHECK(c2.matrix.saturation(-1.5) == doctest::Approx(c.matrix.saturation(-3.0) ).epsilon(1e-14) );
  in.reference.length = 0.0;
  CHECK_THROWS_AS(nondimensionalize(in), ConfigError);
}

TEST_CASE("discrete energy") {
  auto c = injection(0.1, 4, 2);
  const FlowProblem p = make_problem(c);
  const auto s = p.initial_state();
  double e = 0.0;
  for (int i = 0; i < int(p.grid().num_cells()); ++i)
    e += p.storage_scale(i) * p.model(i).energy_w(-3.0) * p.grid().cells()[std::size_t(i)].area();
  CHECK(discrete_energy(p, s) == doctest::Approx(e));
}
