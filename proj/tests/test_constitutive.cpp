#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"

using namespace fracflow;

namespace {

// 50-digit evaluations of the closed forms (tests/oracles/van_genuchten_mp.py).
struct Golden {
  double S, dS, K, U, W, U40;
};
constexpr Golden kMatrix{0.73739742061202367722, 0.089110913599743413293, 0.037002287155653218524,
                         -0.95712572787233056383, 0.45090919198486832998, -0.9981911577456521992};
constexpr Golden kFracture{0.45315221801601764647, 0.092302289611452267443, 0.00060281394294687845958,
                           -1.651534474075389627, 1.1084138827822655935, -1.651650258508758973};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Composite Simpson on [a, b] with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(silt_loam().validate());
  CHECK_NOTHROW(touchet_silt_loam().validate());
  auto p = silt_loam();
  p.n = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = silt_loam();
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = silt_loam();
  p.theta_R = p.theta_S;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = silt_loam();
  p.K_S = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("closed forms against the high-precision oracle") {
  for (auto [params, g] : {std::pair{silt_loam(), kMatrix}, std::pair{touchet_silt_loam(), kFracture}}) {
    const auto m = ConstitutiveModel::van_genuchten(params);
    CHECK(rel(m.saturation(-3.0), g.S) < 1e-13);
    CHECK(rel(m.d_saturation(-3.0), g.dS) < 1e-12);
    CHECK(rel(m.conductivity(-3.0), g.K) < 1e-12);
    CHECK(std::abs(m.kirchhoff(-3.0).value() - g.U) < 1e-10);
    CHECK(std::abs(m.kirchhoff(-40.0).value() - g.U40) < 1e-10);
    CHECK(std::abs(m.energy_w(-3.0) - g.W) < 1e-10);
  }
}

TEST_CASE("saturation branches") {
  const auto m = ConstitutiveModel::van_genuchten(silt_loam());
  CHECK(m.saturation(0.0) == 1.0);
  CHECK(m.saturation(1.0) == 1.0);
  CHECK(m.d_saturation(1.0) == 0.0);
  CHECK(m.d_saturation(-1e6) < 1e-9);
  const double h = 1e-6;
  const double fd = (m.saturation(-3.0 + h) - m.saturation(-3.0 - h)) / (2 * h);
  CHECK(rel(m.d_saturation(-3.0), fd) < 1e-6);
  double prev = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double psi = -50.0 + 0.25 * i;
    CHECK(m.d_saturation(psi) >= 0.0);
    CHECK(m.saturation(psi) >= prev);
    prev = m.saturation(psi);
  }
}

TEST_CASE("relative conductivity") {
  const VanGenuchten law(silt_loam());
  CHECK(law.conductivity_of_saturation(1.0) == 1.0);
  CHECK(law.conductivity(2.0) == 1.0);
  CHECK(law.conductivity_of_saturation(law.residual_saturation()) == 0.0);
  CHECK_THROWS_AS(law.conductivity_of_saturation(1.01), std::domain_error);
  CHECK_THROWS_AS(law.conductivity_of_saturation(0.5 * law.residual_saturation()), std::domain_error);
  // Both evaluation paths agree.
  const double s = law.saturation(-3.0);
  CHECK(rel(law.conductivity_of_saturation(s), law.conductivity(-3.0)) < 1e-10);
}

TEST_CASE("kirchhoff transform") {
  for (auto params : {silt_loam(), touchet_silt_loam()}) {
    const auto m = ConstitutiveModel::van_genuchten(params);
    CHECK(m.kirchhoff(0.0).value() == 0.0);
    CHECK(m.kirchhoff(1.0).value() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.kirchhoff_inv(0.0) == 0.0);
    CHECK_THROWS_AS(m.kirchhoff(-60.0), std::out_of_range);
    CHECK_THROWS_AS(m.kirchhoff(11.0), std::out_of_range);
    CHECK_THROWS_AS(m.kirchhoff_inv(100.0), std::out_of_range);

    // Simpson at ten times the table resolution.
    const auto& t = m.table();
    const double spacing = t.node_psi(1) - t.node_psi(0);
    const int panels = 2 * int(std::ceil(3.0 / spacing * 10.0 / 2.0));
    const double ref = -simpson([&](double p) { return m.conductivity(p); }, -3.0, 0.0, panels);
    CHECK(std::abs(m.kirchhoff(-3.0).value() - ref) < 1e-8);

    // Strictly increasing table.
    for (std::size_t i = 1; i < t.size(); ++i) CHECK_MESSAGE(t.node_u(i - 1) < t.node_u(i), "node ", i);

    // Round trips.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-40.0, 5.0);
    double worst_psi = 0.0, worst_u = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double psi = dist(rng);
      const Potential u = m.kirchhoff(psi);
      const double back = m.kirchhoff_inv(u);
      worst_psi = std::max(worst_psi, std::abs(back - psi));
      worst_u = std::max(worst_u, std::abs((m.kirchhoff(back) - u).value()));
    }
    CHECK(worst_psi <= 1e-8);
    CHECK(worst_u <= 1e-9);
    CHECK(std::abs(m.kirchhoff_inv(m.kirchhoff(-3.0)) + 3.0) <= 1e-8);
  }
}

TEST_CASE("b(u) composition") {
  const auto m = ConstitutiveModel::van_genuchten(silt_loam());
  CHECK(m.b_of_u(Potential{}) == 1.0);
  CHECK(m.b_of_u(m.kirchhoff(-3.0)) == doctest::Approx(m.saturation(-3.0)).epsilon(1e-12));

  // Lipschitz bound M_S / m_K on a nondegenerate law.
  const auto a = testing::arctan_model(0.2, 1.5, 0.1, 2.0);
  const auto rep = bounds_report(a, {-5.0, 5.0});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double p1 = dist(rng), p2 = dist(rng);
    const Potential u1 = a.kirchhoff(p1), u2 = a.kirchhoff(p2);
    const double lhs = std::abs(a.b_of_u(u1) - a.b_of_u(u2));
    CHECK(lhs <= rep.M_S / rep.m_K * std::abs((u1 - u2).value()) * (1 + 1e-9) + 1e-14);
  }
}

TEST_CASE("energy functional") {
  const auto m = ConstitutiveModel::van_genuchten(silt_loam());
  CHECK(m.energy_w(0.0) == 0.0);
  CHECK(m.energy_w(2.0) == 0.0);  // S' vanishes when saturated
  for (double psi : {-40.0, -3.0, -0.5}) CHECK(m.energy_w(psi) > 0.0);
  CHECK_THROWS_AS(m.energy_w(-100.0), std::out_of_range);

  const auto a = testing::arctan_model(0.2, 1.5, 0.1, 2.0);
  const auto rep = bounds_report(a, {-5.0, 5.0});
  for (double psi : {-4.0, -1.0, -0.1, 0.3, 2.0, 5.0}) {
    const double w = a.energy_w(psi);
    CHECK(w >= rep.m_S * psi * psi / 2 * (1 - 1e-10));
    CHECK(w <= rep.M_S * psi * psi / 2 * (1 + 1e-10));
  }
}

TEST_CASE("bounds report") {
  const auto a = testing::arctan_model(0.2, 1.5, 0.1, 2.0);
  const auto rep = bounds_report(a, {-5.0, 5.0}, 0.7, 2.0);
  CHECK(!rep.degenerate);
  CHECK(rep.m_S == doctest::Approx(0.2 + 1.3 / 26.0).epsilon(1e-6));  // S' at |psi| = 5
  CHECK(rep.M_S == doctest::Approx(1.5));
  CHECK(rep.M_psi == std::max(rep.M_rho, rep.M_f / rep.m_S));
  CHECK(rep.m_K > 0.1);
  CHECK(rep.M_K < 2.0);

  const auto vg = bounds_report(ConstitutiveModel::van_genuchten(silt_loam()), {-40.0, 5.0}, 1.0, 3.0);
  CHECK(vg.degenerate);
  CHECK(std::isinf(vg.M_psi));
}

TEST_CASE("linear law") {
  const auto m = testing::linear_model(2.0, 3.0);
  CHECK(m.saturation(-1.0) == -2.0);
  CHECK(m.d_saturation(5.0) == 2.0);
  CHECK(m.conductivity(-7.0) == 3.0);
  CHECK(m.kirchhoff(-2.0).value() == doctest::Approx(-6.0).epsilon(1e-13));
}

TEST_CASE("double-double potential") {
  const Potential a = Potential::sum(1.0, 1e-20);
  CHECK(a.hi == 1.0);
  CHECK(a.lo == 1e-20);
  const Potential d = a - Potential{1.0, 0.0};
  CHECK(d.value() == 1e-20);
  CHECK(Potential{1.0, 0.0} < a);
}
