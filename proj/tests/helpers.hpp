#pragma once

// Small problem builders shared by the unit tests.

#include <memory>

#include "fracflow/upscale.hpp"

namespace fracflow::testing {

inline ConstitutiveModel linear_model(double slope = 1.0, double k = 1.0) {
  return ConstitutiveModel(std::make_shared<const LinearRetention>(0.0, slope, k));
}

inline ConstitutiveModel arctan_model(double m_S, double M_S, double m_K, double M_K) {
  return ConstitutiveModel(std::make_shared<const ArctanRetention>(m_S, M_S, m_K, M_K));
}

/// Injection setup on a coarse grid.
inline SimulationConfig injection(double eps, int n = 16, int fnx = 4) {
  SimulationConfig c;
  c.regime = {eps, -1.0, -1.0};
  c.resolution = {n, n, fnx};
  c.matrix = ConstitutiveModel::van_genuchten(silt_loam());
  c.fracture = ConstitutiveModel::van_genuchten(touchet_silt_loam());
  c.porosity_constant = 0.469 / 0.396;
  c.conductivity_constant = 3.507e-5 / 5.74e-7;
  c.end_time = 0.45;
  c.dt = 0.015;
  c.initial_head = {-3.0, -3.0, -3.0};
  c.boundary = {{Subdomain::M1, Edge::Bottom, 0.0, 1.0, BcType::Neumann, 0.5},
                {Subdomain::M2, Edge::Top, 0.0, 1.0, BcType::Dirichlet, -3.0}};
  return c;
}

}  // namespace fracflow::testing
