#include "fracflow/upscale.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fracflow {

namespace {

void require_fracture(const Grid& g) {
  if (!g.has(Subdomain::Fracture)) throw std::invalid_argument("grid has no fracture block");
}

// Shift that moves a block of the eps-geometry onto its eps = 0 position.
double block_shift(const Grid& g, Subdomain s) {
  const double h = 0.5 * g.layout().epsilon;
  return s == Subdomain::M1 ? h : s == Subdomain::M2 ? -h : 0.0;
}

}  // namespace

std::vector<double> x_average(const Grid& grid, const std::vector<double>& field) {
  require_fracture(grid);
  const int nx = grid.nx(Subdomain::Fracture);
  const double width = grid.layout().box(Subdomain::Fracture).width();
  std::vector<double> out(static_cast<std::size_t>(grid.ny()), 0.0);
  for (int j = 0; j < grid.ny(); ++j) {
    double s = 0.0;
    for (int i = 0; i < nx; ++i) {
      const int c = grid.cell_index(Subdomain::Fracture, i, j);
      s += field[std::size_t(c)] * grid.cells()[std::size_t(c)].dx;
    }
    out[std::size_t(j)] = s / width;
  }
  return out;
}

double y_average(const std::vector<double>& ubar, const std::vector<double>& dy) {
  if (ubar.empty()) return 0.0;
  if (dy.empty()) {
    double s = 0.0;
    for (double v : ubar) s += v;
    return s / double(ubar.size());
  }
  if (dy.size() != ubar.size()) throw std::invalid_argument("y_average: size mismatch");
  double s = 0.0, l = 0.0;
  for (std::size_t j = 0; j < ubar.size(); ++j) {
    s += ubar[j] * dy[j];
    l += dy[j];
  }
  return s / l;
}

double l2_error(const Grid& ga, const std::vector<double>& a, const Grid& gb, const std::vector<double>& b,
                Subdomain sub) {
  if (!ga.has(sub) || !gb.has(sub)) throw std::invalid_argument("l2_error: block " + to_string(sub) + " missing");
  if (ga.nx(sub) != gb.nx(sub) || ga.ny() != gb.ny())
    throw std::invalid_argument("l2_error: block " + to_string(sub) + " resolutions differ");
  if (a.size() < ga.num_cells() || b.size() < gb.num_cells())
    throw std::invalid_argument("l2_error: field shorter than grid");
  const double sa = block_shift(ga, sub), sb = block_shift(gb, sub);
  const int oa = ga.offset(sub), ob = gb.offset(sub);
  const int n = ga.nx(sub) * ga.ny();
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const Cell& ca = ga.cells()[std::size_t(oa + k)];
    const Cell& cb = gb.cells()[std::size_t(ob + k)];
    if (std::abs((ca.xc + sa) - (cb.xc + sb)) > 1e-9 || std::abs(ca.yc - cb.yc) > 1e-9)
      throw std::invalid_argument("l2_error: cell centres do not align");
    const double d = a[std::size_t(oa + k)] - b[std::size_t(ob + k)];
    s += d * d * ca.area();
  }
  return std::sqrt(s);
}

double l2_error_gamma(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& dy) {
  if (a.size() != b.size() || a.size() != dy.size()) throw std::invalid_argument("l2_error_gamma: size mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]) * dy[j];
  return std::sqrt(s);
}

int flatness_column(const Grid& grid, double z0) {
  require_fracture(grid);
  const int nx = grid.nx(Subdomain::Fracture);
  const int i = int(std::lround((z0 + 0.5) * nx - 0.5));
  return std::clamp(i, 0, nx - 1);
}

namespace {

// Generic flatness: diff(col, i) returns u(col) - u(i) in double.
template <class Diff>
double flatness_impl(const Grid& grid, double z0, Diff diff) {
  const int nx = grid.nx(Subdomain::Fracture);
  const int col = flatness_column(grid, z0);
  const double width = grid.layout().box(Subdomain::Fracture).width();
  double s = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    const int cc = grid.cell_index(Subdomain::Fracture, col, j);
    double d = 0.0;
    for (int i = 0; i < nx; ++i) {
      const int c = grid.cell_index(Subdomain::Fracture, i, j);
      d += diff(cc, c) * grid.cells()[std::size_t(c)].dx;
    }
    d /= width;
    s += d * d * grid.cells()[std::size_t(cc)].dy;
  }
  return std::sqrt(s);
}

}  // namespace

double transversal_flatness(const Grid& grid, const std::vector<double>& field, double z0) {
  require_fracture(grid);
  return flatness_impl(grid, z0, [&](int a, int b) { return field[std::size_t(a)] - field[std::size_t(b)]; });
}

double transversal_flatness(const Grid& grid, const std::vector<Potential>& u, double z0) {
  require_fracture(grid);
  const int off = grid.offset(Subdomain::Fracture);
  return flatness_impl(grid, z0,
                       [&](int a, int b) { return (u[std::size_t(a - off)] - u[std::size_t(b - off)]).value(); });
}

std::vector<Potential> fracture_potential(const FlowProblem& problem, const StateField& state) {
  const Grid& g = problem.grid();
  require_fracture(g);
  const int off = g.offset(Subdomain::Fracture);
  const int n = g.nx(Subdomain::Fracture) * g.ny();
  std::vector<Potential> u(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) u[std::size_t(k)] = problem.config().fracture.kirchhoff(state.psi[std::size_t(off + k)]);
  return u;
}

std::vector<double> row_heights(const Grid& grid) {
  std::vector<double> dy(static_cast<std::size_t>(grid.ny()));
  for (int j = 0; j < grid.ny(); ++j) dy[std::size_t(j)] = grid.cells()[std::size_t(grid.cell_index(Subdomain::M1, 0, j))].dy;
  return dy;
}

// ---------------------------------------------------------------------------

bool ConvergenceTable::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.ok; });
}

double ConvergenceTable::flatness_slope(std::size_t k) const {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (!r.ok || !(r.flatness[k] > 0.0)) continue;
    const double x = std::log(r.epsilon), y = std::log(r.flatness[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::nan("");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string ConvergenceTable::to_csv() const {
  std::ostringstream os;
  os << "epsilon,err_fracture,err_m1,err_m2,flatness_mid,iterations_total\n";
  for (const auto& r : rows) {
    os << num(r.epsilon) << ',';
    if (r.ok)
      os << num(r.err_fracture) << ',' << num(r.err_m1) << ',' << num(r.err_m2) << ',' << num(r.flatness_mid());
    else
      os << "nan,nan,nan,nan";
    os << ',' << r.iterations_total << '\n';
  }
  return os.str();
}

std::string ConvergenceTable::plot_data() const {
  std::ostringstream os;
  os << "# variant " << to_string(variant) << " kappa " << num(regime.kappa) << " lambda " << num(regime.lambda)
     << " t " << num(time) << "\n";
  os << "# columns: epsilon value (plot on log-log axes)\n";
  struct Series {
    const char* name;
    std::function<double(const ConvergenceRow&)> get;
  };
  const Series series[] = {
      {"err_fracture", [](const ConvergenceRow& r) { return r.err_fracture; }},
      {"err_m1", [](const ConvergenceRow& r) { return r.err_m1; }},
      {"err_m2", [](const ConvergenceRow& r) { return r.err_m2; }},
      {"flatness_left", [](const ConvergenceRow& r) { return r.flatness[0]; }},
      {"flatness_mid", [](const ConvergenceRow& r) { return r.flatness[1]; }},
      {"flatness_right", [](const ConvergenceRow& r) { return r.flatness[2]; }},
  };
  bool first = true;
  for (const auto& s : series) {
    if (!first) os << "\n\n";
    first = false;
    os << "# " << s.name << "\n";
    for (const auto& r : rows)
      if (r.ok) os << num(r.epsilon) << ' ' << num(s.get(r)) << '\n';
  }
  return os.str();
}

int default_fracture_nx(int matrix_nx, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("default_fracture_nx: epsilon must be positive");
  return std::max(1, int(std::lround(matrix_nx * std::pow(2.0, std::log10(epsilon)))));
}

ConvergenceRow compare_to_effective(const EffectiveProblem& eff, const StateField& eff_state, const FlowProblem& full,
                                    const StateField& full_state) {
  ConvergenceRow r;
  const Grid& g = full.grid();
  r.epsilon = g.layout().epsilon;
  r.fracture_nx = g.nx(Subdomain::Fracture);
  r.fracture_average = x_average(g, full_state.psi);
  const auto k = detail::scaled_conductivity(eff.matrix(), eff_state.psi);
  const auto trace = interface_trace(eff, eff_state, k);
  r.err_fracture = l2_error_gamma(r.fracture_average, trace, row_heights(g));
  r.err_m1 = l2_error(g, full_state.psi, eff.grid(), eff_state.psi, Subdomain::M1);
  r.err_m2 = l2_error(g, full_state.psi, eff.grid(), eff_state.psi, Subdomain::M2);
  const auto u = fracture_potential(full, full_state);
  for (std::size_t i = 0; i < kFlatnessPoints.size(); ++i) r.flatness[i] = transversal_flatness(g, u, kFlatnessPoints[i]);
  return r;
}

ConvergenceTable epsilon_sweep(const SimulationConfig& base, EffectiveVariant variant, const SweepOptions& opts) {
  if (opts.epsilons.empty()) throw ConfigError("sweep: epsilon list is empty");
  for (std::size_t i = 0; i < opts.epsilons.size(); ++i) {
    if (!(opts.epsilons[i] > 0.0)) throw ConfigError("sweep: epsilon values must be positive");
    if (i > 0 && !(opts.epsilons[i] < opts.epsilons[i - 1]))
      throw ConfigError("sweep: epsilon values must be strictly decreasing");
  }
  if (!opts.fracture_nx.empty() && opts.fracture_nx.size() != opts.epsilons.size())
    throw ConfigError("sweep: fracture_nx list must match the epsilon list");
  if (select_variant(base.regime) != variant)
    throw ConfigError("sweep: variant " + to_string(variant) + " does not match (kappa, lambda)");
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };

  ConvergenceTable table;
  table.regime = base.regime;
  table.variant = variant;

  log("effective model " + to_string(variant));
  const EffectiveProblem eff(base, variant);
  const EffectiveSeries es = run_effective(eff);
  table.time = es.matrix.final_state().time;
  for (const auto& s : es.matrix.steps) {
    table.effective_iterations += s.iterations;
    table.effective_mass_balance = std::max(table.effective_mass_balance, s.mass_balance);
  }
  table.effective_wall_seconds = es.matrix.wall_seconds;
  table.effective_trace = es.traces.back();
  StateField eff_final = es.matrix.final_state();
  const auto& iface = es.interface.back().psi_f;
  eff_final.psi.insert(eff_final.psi.end(), iface.begin(), iface.end());

  const std::size_t n = opts.epsilons.size();
  table.rows.resize(n);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      ConvergenceRow& row = table.rows[i];
      SimulationConfig c = base;
      c.regime.epsilon = opts.epsilons[i];
      c.resolution.fracture_nx =
          opts.fracture_nx.empty() ? default_fracture_nx(base.resolution.matrix_nx, c.regime.epsilon) : opts.fracture_nx[i];
      row.epsilon = c.regime.epsilon;
      row.fracture_nx = c.resolution.fracture_nx;
      try {
        const FlowProblem full = make_problem(c);
        const TimeSeries ts = run_simulation(full);
        ConvergenceRow r = compare_to_effective(eff, eff_final, full, ts.final_state());
        r.steps = int(ts.steps.size());
        for (const auto& s : ts.steps) {
          r.iterations_total += s.iterations;
          r.max_mass_balance = std::max(r.max_mass_balance, s.mass_balance);
        }
        r.wall_seconds = ts.wall_seconds;
        row = std::move(r);
      } catch (const std::exception& e) {
        row.ok = false;
        row.failure = e.what();
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      std::ostringstream os;
      os << "epsilon " << row.epsilon << (row.ok ? " done" : " FAILED: " + row.failure);
      log(os.str());
    }
  };
  const int jobs = std::clamp(opts.jobs, 1, int(n));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return table;
}

}  // namespace fracflow
