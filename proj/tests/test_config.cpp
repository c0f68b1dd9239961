#include <string>

#include "doctest.h"
#include "fracflow/config.hpp"
#include "fracflow/upscale.hpp"

using namespace fracflow;

namespace {

const std::string kFigure5 = std::string(FRACFLOW_SOURCE_DIR) + "/configs/figure5.cfg";

const char* kMinimal = R"(
geometry: {epsilon: 0.1, matrix_cells: 8}
scaling: {kappa: -1, lambda: -1}
materials:
  matrix: {model: van_genuchten, alpha: 0.423, n: 2.06, theta_s: 0.396, theta_r: 0.131, k_s: 5.74e-7}
  fracture: {model: van_genuchten, alpha: 0.5, n: 7.09, theta_s: 0.469, theta_r: 0.190, k_s: 3.507e-5}
solver: {end_time: 0.045, dt: 0.015}
initial: {head: -3}
)";

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("bundled injection configuration") {
  const RunConfig rc = parse_config(kFigure5);
  const auto& c = rc.sim;
  CHECK(c.regime.epsilon == 0.01);
  CHECK(c.regime.kappa == -1);
  CHECK(c.resolution.matrix_nx == 160);
  CHECK(c.resolution.matrix_ny == 160);
  CHECK(c.resolution.fracture_nx == 40);
  CHECK(c.porosity_constant == doctest::Approx(0.469 / 0.396));
  CHECK(c.conductivity_constant == doctest::Approx(3.507e-5 / 5.74e-7));
  CHECK(c.dt == 0.015);
  CHECK(c.num_steps() == 30);
  CHECK(c.picard_tol == 1e-5);
  CHECK(c.initial_head[2] == -3.0);
  CHECK(rc.effective_variant() == EffectiveVariant::I);
  CHECK(rc.sweep_epsilons == std::vector<double>{1, 0.1, 0.01, 0.001, 0.0001});
  CHECK(rc.sweep_fracture_cells == std::vector<int>{160, 80, 40, 20, 10});
  CHECK(rc.snapshot_times == std::vector<double>{0.18, 0.45});
  REQUIRE(c.boundary.size() == 4u);
  CHECK(c.boundary[0].type == BcType::Neumann);
  CHECK(c.boundary[0].value == 0.5);
  CHECK(c.boundary[1].type == BcType::Dirichlet);
  CHECK(c.matrix.saturation(-3.0) == doctest::Approx(0.73739742061202367722).epsilon(1e-13));
  CHECK(!rc.source_text.empty());
}

TEST_CASE("minimal configuration and defaults") {
  RunConfig rc = parse_config_string(kMinimal);
  CHECK(rc.sim.resolution.matrix_ny == 8);
  CHECK(rc.sim.resolution.fracture_nx == default_fracture_nx(8, 0.1));
  CHECK(rc.sim.picard_max_iters == 100);
  CHECK(rc.sim.boundary.empty());
  CHECK(rc.snapshot_times == std::vector<double>{0.045});
  rc.set_epsilon(0.001);
  CHECK(rc.sim.resolution.fracture_nx == 1);
  CHECK_THROWS_AS(rc.set_epsilon(-1.0), ConfigError);
}

TEST_CASE("every missing key is reported") {
  const auto msg = error_of("{}");
  for (const char* k : {"geometry", "scaling", "materials", "solver", "initial"})
    CHECK_MESSAGE(msg.find(k) != std::string::npos, k);
  const auto msg2 = error_of("geometry: {matrix_cells: 4}\nscaling: {kappa: -1}\n");
  CHECK(msg2.find("geometry.epsilon") != std::string::npos);
  CHECK(msg2.find("scaling.lambda") != std::string::npos);
  CHECK(msg2.find("solver") != std::string::npos);
}

TEST_CASE("bad values") {
  CHECK(error_of(std::string(kMinimal) + "extra: 1\n").find("unknown key extra") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "boundary:\n  - {domain: m1, edge: right, type: dirichlet, value: 0}\n")
            .find("interface") != std::string::npos);
  CHECK(!error_of(std::string(kMinimal) + "sweep: {epsilons: [0.01, 0.1]}\n").empty());
  CHECK(!error_of(std::string(kMinimal) + "output: {snapshot_times: [1.0]}\n").empty());
  CHECK(!error_of("geometry: [1, 2\n").empty());  // YAML syntax
  CHECK_THROWS_AS(parse_config("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("unsupported regimes") {
  std::string text = kMinimal;
  text.replace(text.find("lambda: -1"), 10, "lambda: 0");
  try {
    parse_config_string(text);
    FAIL("expected UnsupportedRegime");
  } catch (const UnsupportedRegime& e) {
    CHECK(std::string(e.what()).find("unresolved") != std::string::npos);
  }
  std::string imp = kMinimal;
  imp.replace(imp.find("kappa: -1, lambda: -1"), 21, "kappa: 0, lambda: 1");
  CHECK_THROWS_AS(parse_config_string(imp), UnsupportedRegime);
  std::string mismatch = std::string(kMinimal) + "sweep: {epsilons: [0.1], variant: II}\n";
  CHECK(error_of(mismatch).find("does not match") != std::string::npos);
}

TEST_CASE("echo round trip") {
  for (const RunConfig& rc : {parse_config(kFigure5), parse_config_string(kMinimal)}) {
    const auto echo = rc.echo();
    const RunConfig again = parse_config_string(echo.dump(2), "echo");
    CHECK(again.echo() == echo);
  }
}

TEST_CASE("dimensional input") {
  const std::string text = std::string(kMinimal) + "reference: {length: 2, porosity: 0.396, conductivity: 5.74e-7}\n";
  const RunConfig rc = parse_config_string(text);
  const double t_ref = 0.396 * 2 / 5.74e-7;
  CHECK(rc.sim.end_time == doctest::Approx(0.045 / t_ref));
  CHECK(rc.sim.initial_head[0] == -1.5);
  CHECK(rc.sim.regime.epsilon == doctest::Approx(0.05));
}
