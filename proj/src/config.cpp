#include "fracflow/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fracflow/upscale.hpp"

namespace fracflow {

namespace {

// Collects every problem found in one pass so the user sees them all.
class Reader {
 public:
  std::vector<std::string> missing, problems;

  void keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
    if (!n || n.IsNull()) return;
    if (!n.IsMap()) {
      problems.push_back(path + ": expected a mapping");
      return;
    }
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (!allowed.count(k)) problems.push_back("unknown key " + join(path, k));
    }
  }

  YAML::Node section(const YAML::Node& root, const std::string& name, bool required) {
    const YAML::Node n = root.IsMap() ? root[name] : YAML::Node();
    if ((!n || n.IsNull()) && required) missing.push_back(name);
    return n;
  }

  template <class T>
  std::optional<T> get(const YAML::Node& parent, const std::string& path, const std::string& key, bool required) {
    const YAML::Node n = parent && parent.IsMap() ? parent[key] : YAML::Node();
    if (!n || n.IsNull()) {
      if (required) missing.push_back(join(path, key));
      return std::nullopt;
    }
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      problems.push_back(join(path, key) + ": cannot read value '" + dump(n) + "'");
      return std::nullopt;
    }
  }

  template <class T>
  T get_or(const YAML::Node& parent, const std::string& path, const std::string& key, T def) {
    return get<T>(parent, path, key, false).value_or(def);
  }

  void check(bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string dump(const YAML::Node& n) {
    YAML::Emitter e;
    e << YAML::Flow << n;
    return e.c_str();
  }
};

std::optional<Subdomain> subdomain_of(const std::string& s) {
  if (s == "m1") return Subdomain::M1;
  if (s == "m2") return Subdomain::M2;
  if (s == "f" || s == "fracture") return Subdomain::Fracture;
  return std::nullopt;
}

std::optional<Edge> edge_of(const std::string& s) {
  if (s == "left") return Edge::Left;
  if (s == "right") return Edge::Right;
  if (s == "bottom") return Edge::Bottom;
  if (s == "top") return Edge::Top;
  return std::nullopt;
}

std::optional<BcType> bc_of(const std::string& s) {
  if (s == "no_flow") return BcType::NoFlow;
  if (s == "dirichlet") return BcType::Dirichlet;
  if (s == "neumann") return BcType::Neumann;
  return std::nullopt;
}

std::optional<EffectiveVariant> variant_of(const std::string& s) {
  for (auto v : {EffectiveVariant::I, EffectiveVariant::II, EffectiveVariant::III, EffectiveVariant::IV,
                 EffectiveVariant::V})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

// Scalar applied to all subdomains, or a per-subdomain map {m1, m2, f}.
std::optional<std::array<double, 3>> per_subdomain(Reader& r, const YAML::Node& n, const std::string& path,
                                                   bool required, double def) {
  if (!n || n.IsNull()) {
    if (required) r.missing.push_back(path);
    if (required) return std::nullopt;
    return std::array<double, 3>{def, def, def};
  }
  if (n.IsScalar()) {
    try {
      const double v = n.as<double>();
      return std::array<double, 3>{v, v, v};
    } catch (const YAML::Exception&) {
      r.problems.push_back(path + ": cannot read value");
      return std::nullopt;
    }
  }
  r.keys(n, path, {"m1", "m2", "f"});
  std::array<double, 3> out{};
  out[0] = r.get_or<double>(n, path, "m1", def);
  out[1] = r.get_or<double>(n, path, "m2", def);
  out[2] = r.get_or<double>(n, path, "f", def);
  return out;
}

VanGenuchtenParams read_material(Reader& r, const YAML::Node& n, const std::string& path) {
  VanGenuchtenParams p;
  if (!n || n.IsNull()) {
    r.missing.push_back(path);
    return p;
  }
  r.keys(n, path, {"model", "alpha", "n", "theta_s", "theta_r", "k_s"});
  const auto model = r.get_or<std::string>(n, path, "model", "van_genuchten");
  r.check(model == "van_genuchten", path + ".model: only van_genuchten is supported");
  p.alpha = r.get<double>(n, path, "alpha", true).value_or(0.0);
  p.n = r.get<double>(n, path, "n", true).value_or(0.0);
  p.theta_S = r.get<double>(n, path, "theta_s", true).value_or(0.0);
  p.theta_R = r.get<double>(n, path, "theta_r", true).value_or(0.0);
  p.K_S = r.get<double>(n, path, "k_s", true).value_or(0.0);
  return p;
}

bool is_interface_edge(Subdomain s, Edge e) {
  return (s == Subdomain::M1 && e == Edge::Right) || (s == Subdomain::M2 && e == Edge::Left) ||
         (s == Subdomain::Fracture && (e == Edge::Left || e == Edge::Right));
}

}  // namespace

RunConfig parse_config_string(const std::string& text, const std::string& name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
  if (root && !root.IsNull() && !root.IsMap()) throw ConfigError(name + ": top level must be a mapping");

  Reader r;
  r.keys(root, "", {"geometry", "scaling", "materials", "solver", "initial", "sources", "boundary", "sweep",
                    "output", "reference"});
  RunConfig rc;
  rc.source_name = name;
  rc.source_text = text;
  SimulationConfig& c = rc.sim;

  // geometry
  const auto geo = r.section(root, "geometry", true);
  r.keys(geo, "geometry", {"epsilon", "matrix_width", "matrix_cells", "fracture_cells"});
  const auto eps = r.get<double>(geo, "geometry", "epsilon", true);
  c.matrix_width = r.get_or<double>(geo, "geometry", "matrix_width", 1.0);
  if (const auto cells = geo && geo.IsMap() ? geo["matrix_cells"] : YAML::Node(); !cells || cells.IsNull()) {
    r.missing.push_back("geometry.matrix_cells");
  } else {
    try {
      if (cells.IsScalar()) {
        c.resolution.matrix_nx = c.resolution.matrix_ny = cells.as<int>();
      } else {
        const auto v = cells.as<std::vector<int>>();
        if (v.size() != 2) throw YAML::Exception(YAML::Mark(), "size");
        c.resolution.matrix_nx = v[0];
        c.resolution.matrix_ny = v[1];
      }
    } catch (const YAML::Exception&) {
      r.problems.push_back("geometry.matrix_cells: expected an integer or [nx, ny]");
    }
  }
  const auto frac_cells = r.get<int>(geo, "geometry", "fracture_cells", false);
  rc.fracture_cells_given = frac_cells.has_value();

  // scaling
  const auto sc = r.section(root, "scaling", true);
  r.keys(sc, "scaling", {"kappa", "lambda", "porosity_constant", "conductivity_constant"});
  const auto kappa = r.get<double>(sc, "scaling", "kappa", true);
  const auto lambda = r.get<double>(sc, "scaling", "lambda", true);
  const auto cphi = r.get<double>(sc, "scaling", "porosity_constant", false);
  const auto ck = r.get<double>(sc, "scaling", "conductivity_constant", false);

  // materials
  const auto mat = r.section(root, "materials", true);
  r.keys(mat, "materials", {"matrix", "fracture", "kirchhoff"});
  VanGenuchtenParams pm, pf;
  if (mat && !mat.IsNull()) {
    pm = read_material(r, mat["matrix"], "materials.matrix");
    pf = read_material(r, mat["fracture"], "materials.fracture");
  } else {
    r.missing.push_back("materials.matrix");
    r.missing.push_back("materials.fracture");
  }
  const YAML::Node kt = mat && mat.IsMap() ? mat["kirchhoff"] : YAML::Node();
  r.keys(kt, "materials.kirchhoff", {"psi_min", "psi_max", "nodes"});
  rc.table.psi_min = r.get_or<double>(kt, "materials.kirchhoff", "psi_min", rc.table.psi_min);
  rc.table.psi_max = r.get_or<double>(kt, "materials.kirchhoff", "psi_max", rc.table.psi_max);
  rc.table.nodes = r.get_or<int>(kt, "materials.kirchhoff", "nodes", rc.table.nodes);

  // solver
  const auto so = r.section(root, "solver", true);
  r.keys(so, "solver", {"end_time", "dt", "picard_tol", "picard_max_iters", "linear_solver", "linear_tol"});
  const auto end_time = r.get<double>(so, "solver", "end_time", true);
  const auto dt = r.get<double>(so, "solver", "dt", true);
  c.picard_tol = r.get_or<double>(so, "solver", "picard_tol", 1e-5);
  c.picard_max_iters = r.get_or<int>(so, "solver", "picard_max_iters", 100);
  const auto ls = r.get_or<std::string>(so, "solver", "linear_solver", "direct");
  r.check(ls == "direct" || ls == "cg", "solver.linear_solver: expected direct or cg");
  c.linear_solver = ls == "cg" ? LinearSolverKind::ConjugateGradient : LinearSolverKind::Direct;
  c.linear_tol = r.get_or<double>(so, "solver", "linear_tol", 1e-13);

  // initial, sources
  const auto ini = r.section(root, "initial", true);
  r.keys(ini, "initial", {"head"});
  const auto head = per_subdomain(r, ini && ini.IsMap() ? ini["head"] : YAML::Node(), "initial.head", true, 0.0);
  const auto src = per_subdomain(r, root.IsMap() ? root["sources"] : YAML::Node(), "sources", false, 0.0);

  // boundary
  std::vector<BoundarySegment> segments;
  if (const auto bnd = root.IsMap() ? root["boundary"] : YAML::Node(); bnd && !bnd.IsNull()) {
    if (!bnd.IsSequence()) {
      r.problems.push_back("boundary: expected a list of segments");
    } else {
      for (std::size_t i = 0; i < bnd.size(); ++i) {
        const std::string path = "boundary[" + std::to_string(i) + "]";
        const YAML::Node b = bnd[i];
        r.keys(b, path, {"domain", "edge", "type", "value", "from", "to"});
        BoundarySegment s;
        const auto d = r.get<std::string>(b, path, "domain", true);
        const auto e = r.get<std::string>(b, path, "edge", true);
        const auto t = r.get<std::string>(b, path, "type", true);
        if (d && !subdomain_of(*d)) r.problems.push_back(path + ".domain: expected m1, m2 or f");
        if (e && !edge_of(*e)) r.problems.push_back(path + ".edge: expected left, right, bottom or top");
        if (t && !bc_of(*t)) r.problems.push_back(path + ".type: expected no_flow, dirichlet or neumann");
        if (d && subdomain_of(*d)) s.domain = *subdomain_of(*d);
        if (e && edge_of(*e)) s.edge = *edge_of(*e);
        if (t && bc_of(*t)) s.type = *bc_of(*t);
        if (d && e && subdomain_of(*d) && edge_of(*e) && is_interface_edge(s.domain, s.edge))
          r.problems.push_back(path + ": " + *d + " " + *e + " is an interior interface, not a boundary");
        const auto v = r.get<double>(b, path, "value", s.type != BcType::NoFlow);
        s.value = v.value_or(0.0);
        s.from = r.get_or<double>(b, path, "from", 0.0);
        s.to = r.get_or<double>(b, path, "to", 1.0);
        r.check(s.from >= 0.0 && s.to <= 1.0 && s.from < s.to, path + ": need 0 <= from < to <= 1");
        segments.push_back(s);
      }
    }
  }

  // sweep
  const auto sw = root.IsMap() ? root["sweep"] : YAML::Node();
  r.keys(sw, "sweep", {"epsilons", "fracture_cells", "variant"});
  const auto sweep_eps = r.get<std::vector<double>>(sw, "sweep", "epsilons", false);
  const auto sweep_cells = r.get<std::vector<int>>(sw, "sweep", "fracture_cells", false);
  if (const auto v = r.get<std::string>(sw, "sweep", "variant", false); v && *v != "auto") {
    rc.variant = variant_of(*v);
    if (!rc.variant) r.problems.push_back("sweep.variant: expected auto, I, II, III, IV or V");
  }

  // output
  const auto out = root.IsMap() ? root["output"] : YAML::Node();
  r.keys(out, "output", {"snapshot_times", "vtk"});
  const auto snaps = r.get<std::vector<double>>(out, "output", "snapshot_times", false);
  rc.write_vtk = r.get_or<bool>(out, "output", "vtk", true);

  // reference
  const auto ref = root.IsMap() ? root["reference"] : YAML::Node();
  r.keys(ref, "reference", {"length", "porosity", "conductivity"});
  std::optional<ReferenceScales> scales;
  if (ref && !ref.IsNull()) {
    ReferenceScales s;
    s.length = r.get<double>(ref, "reference", "length", true).value_or(1.0);
    s.porosity = r.get<double>(ref, "reference", "porosity", true).value_or(1.0);
    s.conductivity = r.get<double>(ref, "reference", "conductivity", true).value_or(1.0);
    scales = s;
  }

  auto fail = [&] {
    std::ostringstream os;
    os << name << ": invalid configuration";
    if (!r.missing.empty()) {
      os << "\n  missing keys:";
      for (const auto& m : r.missing) os << " " << m;
    }
    for (const auto& p : r.problems) os << "\n  " << p;
    throw ConfigError(os.str());
  };
  if (!r.missing.empty() || !r.problems.empty()) fail();

  // Value checks.
  for (auto [p, label] : {std::pair{&pm, "materials.matrix"}, std::pair{&pf, "materials.fracture"}}) {
    try {
      p->validate();
    } catch (const std::exception& e) {
      r.problems.push_back(std::string(label) + ": " + e.what());
    }
  }
  r.check(*eps >= 0.0, "geometry.epsilon must be non-negative");
  r.check(c.matrix_width > 0.0, "geometry.matrix_width must be positive");
  r.check(c.resolution.matrix_nx >= 1 && c.resolution.matrix_ny >= 1, "geometry.matrix_cells must be positive");
  r.check(!frac_cells || *frac_cells >= 1, "geometry.fracture_cells must be positive");
  r.check(*dt > 0.0, "solver.dt must be positive");
  r.check(*end_time > 0.0, "solver.end_time must be positive");
  r.check(c.picard_tol > 0.0, "solver.picard_tol must be positive");
  r.check(c.picard_max_iters >= 1, "solver.picard_max_iters must be at least 1");
  r.check(c.linear_tol > 0.0, "solver.linear_tol must be positive");
  r.check(!cphi || *cphi > 0.0, "scaling.porosity_constant must be positive");
  r.check(!ck || *ck > 0.0, "scaling.conductivity_constant must be positive");
  r.check(rc.table.psi_min < 0.0 && rc.table.psi_max > 0.0 && rc.table.nodes >= 16,
          "materials.kirchhoff: need psi_min < 0 < psi_max and at least 16 nodes");
  if (scales)
    r.check(scales->length > 0.0 && scales->porosity > 0.0 && scales->conductivity > 0.0,
            "reference scales must be positive");
  if (sweep_cells && sweep_eps) r.check(sweep_cells->size() == sweep_eps->size(), "sweep.fracture_cells must match sweep.epsilons");
  if (sweep_cells && !sweep_eps) r.problems.push_back("sweep.fracture_cells given without sweep.epsilons");
  if (sweep_cells)
    for (int n : *sweep_cells) r.check(n >= 1, "sweep.fracture_cells must be positive");
  if (sweep_eps) {
    r.check(!sweep_eps->empty(), "sweep.epsilons must not be empty");
    for (std::size_t i = 0; i < sweep_eps->size(); ++i) {
      r.check((*sweep_eps)[i] > 0.0, "sweep.epsilons must be positive");
      if (i > 0) r.check((*sweep_eps)[i] < (*sweep_eps)[i - 1], "sweep.epsilons must be strictly decreasing");
    }
  }
  if (!r.problems.empty()) fail();

  // Unsupported regimes are rejected before anything runs.
  const ScalingRegime regime{*eps, *kappa, *lambda};
  EffectiveVariant natural;
  try {
    natural = select_variant(regime);
  } catch (const UnsupportedRegime& e) {
    throw UnsupportedRegime(name + ": unsupported scaling regime " + e.what());
  }
  if (rc.variant && *rc.variant != natural)
    throw ConfigError(name + ": sweep.variant " + to_string(*rc.variant) + " does not match (kappa, lambda), which select " +
                      to_string(natural));

  // Assemble the dimensionless configuration.
  double t_scale = 1.0, l_scale = 1.0;
  if (scales) {
    DimensionalInputs in;
    in.reference = *scales;
    in.fracture_width = *eps;
    in.kappa = *kappa;
    in.lambda = *lambda;
    in.matrix = pm;
    in.fracture = pf;
    in.end_time = *end_time;
    in.dt = *dt;
    in.initial_head = *head;
    in.source = *src;
    in.boundary = segments;
    in.resolution = c.resolution;
    in.table = rc.table;
    SimulationConfig d = nondimensionalize(in);
    d.matrix_width = c.matrix_width / scales->length;
    d.picard_tol = c.picard_tol;
    d.picard_max_iters = c.picard_max_iters;
    d.linear_solver = c.linear_solver;
    d.linear_tol = c.linear_tol;
    c = std::move(d);
    pm.alpha *= scales->length;
    pf.alpha *= scales->length;
    t_scale = scales->time();
    l_scale = scales->length;
  } else {
    c.regime = regime;
    c.matrix = ConstitutiveModel::van_genuchten(pm, rc.table);
    c.fracture = ConstitutiveModel::van_genuchten(pf, rc.table);
    c.porosity_constant = pf.theta_S / pm.theta_S;
    c.conductivity_constant = pf.K_S / pm.K_S;
    c.end_time = *end_time;
    c.dt = *dt;
    c.initial_head = *head;
    c.source = *src;
    c.boundary = segments;
  }
  if (cphi) c.porosity_constant = *cphi;
  if (ck) c.conductivity_constant = *ck;
  rc.matrix_params = pm;
  rc.fracture_params = pf;

  if (frac_cells) c.resolution.fracture_nx = *frac_cells;
  rc.set_epsilon(c.regime.epsilon);

  if (sweep_eps) {
    for (double e : *sweep_eps) rc.sweep_epsilons.push_back(e / l_scale);
  } else if (c.regime.epsilon > 0.0) {
    rc.sweep_epsilons = {c.regime.epsilon};
  }
  for (std::size_t i = 0; i < rc.sweep_epsilons.size(); ++i)
    rc.sweep_fracture_cells.push_back(sweep_cells ? (*sweep_cells)[i]
                                                  : default_fracture_nx(c.resolution.matrix_nx, rc.sweep_epsilons[i]));

  if (snaps) {
    for (double t : *snaps) rc.snapshot_times.push_back(t / t_scale);
  } else {
    rc.snapshot_times = {c.end_time};
  }
  for (double t : rc.snapshot_times)
    if (!(t >= 0.0 && t <= c.end_time * (1.0 + 1e-12)))
      throw ConfigError(name + ": output.snapshot_times must lie in [0, end_time]");

  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  }
  return rc;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read configuration file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path);
}

EffectiveVariant RunConfig::effective_variant() const {
  return variant ? *variant : select_variant(sim.regime);
}

void RunConfig::set_epsilon(double eps) {
  if (!(eps >= 0.0)) throw ConfigError("epsilon must be non-negative");
  sim.regime.epsilon = eps;
  if (!fracture_cells_given)
    sim.resolution.fracture_nx = eps > 0.0 ? default_fracture_nx(sim.resolution.matrix_nx, eps) : 0;
}

nlohmann::ordered_json RunConfig::echo() const {
  using J = nlohmann::ordered_json;
  const auto& c = sim;
  auto material = [](const VanGenuchtenParams& p) {
    return J{{"model", "van_genuchten"}, {"alpha", p.alpha}, {"n", p.n}, {"theta_s", p.theta_S},
             {"theta_r", p.theta_R}, {"k_s", p.K_S}};
  };
  auto per = [](const std::array<double, 3>& v) { return J{{"m1", v[0]}, {"m2", v[1]}, {"f", v[2]}}; };

  J j;
  j["geometry"] = {{"epsilon", c.regime.epsilon},
                   {"matrix_width", c.matrix_width},
                   {"matrix_cells", {c.resolution.matrix_nx, c.resolution.matrix_ny}}};
  if (c.resolution.fracture_nx > 0) j["geometry"]["fracture_cells"] = c.resolution.fracture_nx;
  j["scaling"] = {{"kappa", c.regime.kappa},
                  {"lambda", c.regime.lambda},
                  {"porosity_constant", c.porosity_constant},
                  {"conductivity_constant", c.conductivity_constant}};
  j["materials"] = {{"matrix", material(matrix_params)},
                    {"fracture", material(fracture_params)},
                    {"kirchhoff", {{"psi_min", table.psi_min}, {"psi_max", table.psi_max}, {"nodes", table.nodes}}}};
  j["solver"] = {{"end_time", c.end_time},
                 {"dt", c.dt},
                 {"picard_tol", c.picard_tol},
                 {"picard_max_iters", c.picard_max_iters},
                 {"linear_solver", c.linear_solver == LinearSolverKind::Direct ? "direct" : "cg"},
                 {"linear_tol", c.linear_tol}};
  j["initial"] = {{"head", per(c.initial_head)}};
  j["sources"] = per(c.source);
  J b = J::array();
  for (const auto& s : c.boundary)
    b.push_back({{"domain", to_string(s.domain)},
                 {"edge", to_string(s.edge)},
                 {"type", to_string(s.type)},
                 {"value", s.value},
                 {"from", s.from},
                 {"to", s.to}});
  j["boundary"] = b;
  if (!sweep_epsilons.empty())
    j["sweep"] = {{"epsilons", sweep_epsilons},
                  {"fracture_cells", sweep_fracture_cells},
                  {"variant", variant ? to_string(*variant) : std::string("auto")}};
  j["output"] = {{"snapshot_times", snapshot_times}, {"vtk", write_vtk}};
  return j;
}

}  // namespace fracflow
