#include "fracflow/output.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace fracflow {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string snapshot_csv(const FlowProblem& problem, const StateField& state) {
  std::string out = "x,y,subdomain,psi,saturation\n";
  const auto& cells = problem.grid().cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const double psi = state.psi[i];
    out += format_number(c.xc) + ',' + format_number(c.yc) + ',' + to_string(c.sub) + ',' + format_number(psi) +
           ',' + format_number(problem.model(int(i)).saturation(psi)) + '\n';
  }
  return out;
}

std::string snapshot_vtk(const FlowProblem& problem, const StateField& state, const std::string& title) {
  const Grid& g = problem.grid();
  const auto& layout = g.layout();
  std::vector<Subdomain> order{Subdomain::M1};
  if (g.has(Subdomain::Fracture)) order.push_back(Subdomain::Fracture);
  if (g.has(Subdomain::M2)) order.push_back(Subdomain::M2);

  std::vector<double> xs{layout.box(order.front()).x0};
  for (Subdomain s : order) {
    const Box& b = layout.box(s);
    const int nx = g.nx(s);
    for (int i = 1; i <= nx; ++i) xs.push_back(i == nx ? b.x1 : b.x0 + i * b.width() / nx);
  }
  std::vector<double> ys;
  for (int j = 0; j < g.ny(); ++j) ys.push_back(g.cells()[std::size_t(g.cell_index(Subdomain::M1, 0, j))].yc -
                                                0.5 * g.cells()[std::size_t(g.cell_index(Subdomain::M1, 0, j))].dy);
  ys.push_back(layout.m1.y1);

  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET RECTILINEAR_GRID\n";
  os << "DIMENSIONS " << xs.size() << ' ' << ys.size() << " 1\n";
  auto coords = [&](const char* name, const std::vector<double>& v) {
    os << name << ' ' << v.size() << " double\n";
    for (std::size_t i = 0; i < v.size(); ++i) os << format_number(v[i]) << (i + 1 == v.size() ? '\n' : ' ');
  };
  coords("X_COORDINATES", xs);
  coords("Y_COORDINATES", ys);
  coords("Z_COORDINATES", {0.0});

  std::vector<int> cell_order;
  for (int j = 0; j < g.ny(); ++j)
    for (Subdomain s : order)
      for (int i = 0; i < g.nx(s); ++i) cell_order.push_back(g.cell_index(s, i, j));

  os << "CELL_DATA " << cell_order.size() << '\n';
  auto scalars = [&](const char* name, const char* type, auto value) {
    os << "SCALARS " << name << ' ' << type << " 1\nLOOKUP_TABLE default\n";
    for (int c : cell_order) os << value(c) << '\n';
  };
  scalars("psi", "double", [&](int c) { return format_number(state.psi[std::size_t(c)]); });
  scalars("saturation", "double",
          [&](int c) { return format_number(problem.model(c).saturation(state.psi[std::size_t(c)])); });
  scalars("subdomain", "int", [&](int c) { return int(g.cells()[std::size_t(c)].sub); });
  return os.str();
}

std::string steps_csv(const std::vector<StepInfo>& steps) {
  std::string out = "step,time,iterations,residual,mass_balance\n";
  for (const auto& s : steps)
    out += std::to_string(s.step) + ',' + format_number(s.time) + ',' + std::to_string(s.iterations) + ',' +
           format_number(s.residual) + ',' + format_number(s.mass_balance) + '\n';
  return out;
}

std::string interface_report_csv(const std::vector<InterfaceReport>& reports) {
  std::string out = "step,time,jump_integral,budget_residual,psi_f_min,psi_f_max\n";
  for (const auto& r : reports)
    out += std::to_string(r.step) + ',' + format_number(r.time) + ',' + format_number(r.jump_integral) + ',' +
           format_number(r.budget_residual) + ',' + format_number(r.psi_f_min) + ',' + format_number(r.psi_f_max) +
           '\n';
  return out;
}

std::string interface_profile_csv(const Grid& grid, const std::vector<double>& trace) {
  std::string out = "y,psi_f\n";
  for (int j = 0; j < grid.ny(); ++j)
    out += format_number(grid.cells()[std::size_t(grid.cell_index(Subdomain::M1, 0, j))].yc) + ',' +
           format_number(trace[std::size_t(j)]) + '\n';
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

void write_text(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::string time_tag(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "t%.6g", t);
  return buf;
}

nlohmann::ordered_json make_manifest(const ManifestInfo& info) {
  nlohmann::ordered_json j;
  j["artifact"] = "fracflow";
  j["version"] = FRACFLOW_VERSION;
  j["command"] = info.command;
  j["input"] = {{"path", info.config_path}, {"sha256", sha256_hex(info.config_text)}};
  j["config"] = info.config_echo;
  j["run"] = info.run;
  j["outputs"] = info.outputs;
  j["timing"] = {{"wall_seconds", info.wall_seconds}};
  return j;
}

}  // namespace fracflow
