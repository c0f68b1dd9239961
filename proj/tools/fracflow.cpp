// fracflow: run, sweep and check Richards'-equation simulations of a block
// with one fracture.
//
//   fracflow run   CONFIG [--model epsilon|effective] [--epsilon E] [--snapshot-times T,...] [--output-dir D]
//   fracflow sweep CONFIG [--jobs N] [--output-dir D]
//   fracflow check CONFIG
//
// Exit status: 0 success, 1 invariant violation (check), 2 configuration
// error, 3 solver failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "fracflow/config.hpp"
#include "fracflow/output.hpp"
#include "fracflow/upscale.hpp"

using namespace fracflow;

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

void note(const std::string& s) { std::cerr << "fracflow: " << s << std::endl; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outputs {
  std::string dir;
  std::vector<std::string> files;

  void write(const std::string& name, const std::string& content) {
    write_text(dir + "/" + name, content);
    files.push_back(name);
  }
};

// Index of the stored state nearest to t.
std::size_t nearest_state(const std::vector<StateField>& states, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < states.size(); ++i)
    if (std::abs(states[i].time - t) < std::abs(states[best].time - t)) best = i;
  return best;
}

void write_failure(Outputs& out, const std::string& what, const SolverError* se) {
  std::ostringstream os;
  os << "error: " << what << "\n";
  if (se) {
    os << "step: " << se->step << "\niteration: " << se->iteration << "\nupdate_history:";
    for (double h : se->history) os << ' ' << format_number(h);
    os << "\n";
  }
  out.write("failure.txt", os.str());
}

int cmd_run(RunConfig rc, const std::string& model, std::optional<double> eps, const std::vector<double>& snaps,
            const std::string& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  if (eps) rc.set_epsilon(*eps);
  if (!snaps.empty()) rc.snapshot_times = snaps;
  for (double t : rc.snapshot_times)
    if (!(t >= 0.0 && t <= rc.sim.end_time * (1.0 + 1e-12)))
      throw ConfigError("--snapshot-times must lie in [0, end_time]");

  Outputs out{dir, {}};
  nlohmann::ordered_json summary;
  summary["model"] = model;
  try {
    if (model == "epsilon") {
      if (!(rc.sim.regime.epsilon > 0.0)) throw ConfigError("--model epsilon needs epsilon > 0");
      const FlowProblem problem = make_problem(rc.sim);
      note("epsilon-model, epsilon " + format_number(rc.sim.regime.epsilon) + ", " +
           std::to_string(problem.grid().num_cells()) + " cells");
      const TimeSeries ts = run_simulation(problem);
      out.write("steps.csv", steps_csv(ts.steps));
      for (double t : rc.snapshot_times) {
        const StateField& s = ts.states[nearest_state(ts.states, t)];
        const std::string tag = time_tag(s.time);
        out.write("snapshot_" + tag + ".csv", snapshot_csv(problem, s));
        if (rc.write_vtk) out.write("snapshot_" + tag + ".vtk", snapshot_vtk(problem, s, "fracflow " + tag));
      }
      summary["epsilon"] = rc.sim.regime.epsilon;
      summary["cells"] = problem.grid().num_cells();
      summary["steps"] = ts.steps.size();
      int its = 0;
      double mb = 0.0;
      for (const auto& s : ts.steps) its += s.iterations, mb = std::max(mb, s.mass_balance);
      summary["iterations_total"] = its;
      summary["max_mass_balance"] = mb;
    } else {
      const auto variant = rc.effective_variant();
      const EffectiveProblem problem(rc.sim, variant);
      note("effective model " + to_string(variant) + ", " + std::to_string(problem.num_unknowns()) + " unknowns");
      const EffectiveSeries es = run_effective(problem);
      out.write("steps.csv", steps_csv(es.matrix.steps));
      out.write("interface.csv", interface_report_csv(es.reports));
      for (double t : rc.snapshot_times) {
        const std::size_t k = nearest_state(es.matrix.states, t);
        const StateField& s = es.matrix.states[k];
        const std::string tag = time_tag(s.time);
        out.write("snapshot_" + tag + ".csv", snapshot_csv(problem.matrix(), s));
        if (rc.write_vtk)
          out.write("snapshot_" + tag + ".vtk", snapshot_vtk(problem.matrix(), s, "fracflow effective " + tag));
        out.write("interface_" + tag + ".csv", interface_profile_csv(problem.grid(), es.traces[k]));
      }
      summary["variant"] = to_string(variant);
      summary["unknowns"] = problem.num_unknowns();
      summary["steps"] = es.matrix.steps.size();
      int its = 0;
      double mb = 0.0, budget = 0.0;
      for (const auto& s : es.matrix.steps) its += s.iterations, mb = std::max(mb, s.mass_balance);
      for (const auto& r : es.reports) budget = std::max(budget, std::abs(r.budget_residual));
      summary["iterations_total"] = its;
      summary["max_mass_balance"] = mb;
      summary["max_interface_budget_residual"] = budget;
    }
  } catch (const SolverError& e) {
    note(std::string("solver failure: ") + e.what());
    write_failure(out, e.what(), &e);
    return kSolverFailure;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    note(std::string("solver failure: ") + e.what());
    write_failure(out, e.what(), nullptr);
    return kSolverFailure;
  }

  ManifestInfo m{"run", rc.source_name, rc.source_text, rc.echo(), summary, out.files, seconds_since(t0)};
  m.outputs.push_back("manifest.json");
  write_text(dir + "/manifest.json", make_manifest(m).dump(2) + "\n");
  note("wrote " + std::to_string(m.outputs.size()) + " files to " + dir);
  return 0;
}

int cmd_sweep(const RunConfig& rc, int jobs, const std::string& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  if (rc.sweep_epsilons.empty()) throw ConfigError("sweep needs sweep.epsilons or a positive geometry.epsilon");
  SweepOptions opts;
  opts.epsilons = rc.sweep_epsilons;
  opts.fracture_nx = rc.sweep_fracture_cells;
  opts.jobs = jobs;
  opts.log = note;

  Outputs out{dir, {}};
  ConvergenceTable table;
  try {
    table = epsilon_sweep(rc.sim, rc.effective_variant(), opts);
  } catch (const SolverError& e) {
    note(std::string("effective model failed: ") + e.what());
    write_failure(out, e.what(), &e);
    return kSolverFailure;
  }
  out.write("convergence.csv", table.to_csv());
  out.write("convergence.dat", table.plot_data());

  std::string rows = "epsilon,fracture_cells,err_fracture,err_m1,err_m2,flatness_left,flatness_mid,flatness_right,"
                     "iterations_total,steps,max_mass_balance,ok,failure\n";
  for (const auto& r : table.rows) {
    rows += format_number(r.epsilon) + ',' + std::to_string(r.fracture_nx) + ',' + format_number(r.err_fracture) +
            ',' + format_number(r.err_m1) + ',' + format_number(r.err_m2) + ',' + format_number(r.flatness[0]) + ',' +
            format_number(r.flatness[1]) + ',' + format_number(r.flatness[2]) + ',' +
            std::to_string(r.iterations_total) + ',' + std::to_string(r.steps) + ',' +
            format_number(r.max_mass_balance) + ',' + (r.ok ? "1" : "0") + ",\"" + r.failure + "\"\n";
  }
  out.write("sweep_rows.csv", rows);

  nlohmann::ordered_json summary;
  summary["variant"] = to_string(table.variant);
  summary["time"] = table.time;
  summary["effective_iterations"] = table.effective_iterations;
  summary["effective_max_mass_balance"] = table.effective_mass_balance;
  summary["rows"] = table.rows.size();
  summary["failed_rows"] = std::count_if(table.rows.begin(), table.rows.end(), [](auto& r) { return !r.ok; });
  summary["flatness_slope"] = {table.flatness_slope(0), table.flatness_slope(1), table.flatness_slope(2)};
  ManifestInfo m{"sweep", rc.source_name, rc.source_text, rc.echo(), summary, out.files, seconds_since(t0)};
  m.outputs.push_back("manifest.json");
  write_text(dir + "/manifest.json", make_manifest(m).dump(2) + "\n");
  std::cout << table.to_csv();
  return table.all_ok() ? 0 : kSolverFailure;
}

// Invariant suite on the configured materials and the first time step.
int cmd_check(const RunConfig& rc) {
  int failures = 0;
  auto report = [&](bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    failures += ok ? 0 : 1;
  };
  auto sci = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3e", v);
    return std::string(b);
  };

  std::cout << "config " << rc.source_name << "  variant " << to_string(rc.effective_variant()) << "\n";
  for (auto [label, model] : {std::pair{"matrix", &rc.sim.matrix}, std::pair{"fracture", &rc.sim.fracture}}) {
    double worst = 0.0, s_prev = -1.0;
    bool monotone = true, k_range = true;
    for (int i = 0; i <= 1000; ++i) {
      const double psi = -40.0 + 45.0 * i / 1000.0;
      worst = std::max(worst, std::abs(model->kirchhoff_inv(model->kirchhoff(psi)) - psi));
      const double s = model->saturation(psi), k = model->conductivity(psi);
      monotone = monotone && s >= s_prev;
      k_range = k_range && k > 0.0 && k <= 1.0;
      s_prev = s;
    }
    report(worst <= 1e-8, std::string(label) + " kirchhoff round trip", "max error " + sci(worst));
    report(monotone, std::string(label) + " saturation monotone", "");
    report(k_range, std::string(label) + " conductivity in (0, 1]", "");
  }

  try {
    if (rc.sim.regime.epsilon > 0.0) {
      const FlowProblem problem = make_problem(rc.sim);
      const auto s0 = problem.initial_state();
      const auto r = picard_solve(problem, s0, 1);
      report(r.info.mass_balance <= 1e-8, "epsilon-model first step mass balance",
             sci(r.info.mass_balance) + " after " + std::to_string(r.info.iterations) + " iterations");
    }
    const EffectiveProblem eff(rc.sim, rc.effective_variant());
    const auto r = effective_step(eff, eff.initial_state(), 1);
    report(r.info.mass_balance <= 1e-8, "effective first step mass balance", sci(r.info.mass_balance));
    report(std::abs(r.report.budget_residual) <= 1e-4, "effective interface budget", sci(r.report.budget_residual));
  } catch (const SolverError& e) {
    note(std::string("solver failure: ") + e.what());
    return kSolverFailure;
  }
  std::cout << (failures ? "FAILED " : "OK ") << failures << " violation(s)\n";
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracflow: unsaturated flow in a porous block with one fracture"};
  app.set_version_flag("--version", std::string(FRACFLOW_VERSION));
  app.require_subcommand(1);

  std::string config, model = "epsilon", dir = "out";
  std::optional<double> eps;
  std::vector<double> snaps;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "single simulation");
  run->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("--model", model, "epsilon or effective")->check(CLI::IsMember({"epsilon", "effective"}));
  run->add_option("--epsilon", eps, "fracture width ratio (overrides geometry.epsilon)");
  run->add_option("--snapshot-times", snaps, "times of field snapshots")->delimiter(',');
  run->add_option("--output-dir", dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "epsilon sweep against the effective model");
  sweep->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--jobs", jobs, "concurrent member runs")->check(CLI::PositiveNumber);
  sweep->add_option("--output-dir", dir, "output directory");

  auto* check = app.add_subcommand("check", "invariant suite on a configuration");
  check->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    const RunConfig rc = parse_config(config);
    if (*run) return cmd_run(rc, model, eps, snaps, dir);
    if (*sweep) return cmd_sweep(rc, jobs, dir);
    return cmd_check(rc);
  } catch (const ConfigError& e) {
    note(std::string("configuration error: ") + e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    note(std::string("error: ") + e.what());
    return kSolverFailure;
  }
}
