#include "fracflow/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace fracflow {

namespace {

// Quadrature tolerances sit three orders below the nonlinear solver tolerance.
constexpr double kQuadRelTol = 1e-13;
constexpr unsigned kQuadMaxDepth = 18;

template <class F>
double integrate(F&& f, double a, double b) {
  if (a == b) return 0.0;
  // Mapped onto [-1, 1]: Boost compares its unscaled error estimate with the
  // scaled tolerance, so short intervals would otherwise recurse to full depth.
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  const auto g = [&](double x) { return f(m + h * x); };
  return h * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, -1.0, 1.0, kQuadMaxDepth,
                                                                            kQuadRelTol);
}

// Knuth two-sum: a + b == s + e exactly.
inline Potential two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters

void VanGenuchtenParams::validate() const {
  if (!(n > 1.0)) throw std::invalid_argument("van Genuchten: n must exceed 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("van Genuchten: alpha must be positive");
  if (!(theta_R >= 0.0 && theta_R < theta_S && theta_S <= 1.0))
    throw std::invalid_argument("van Genuchten: need 0 <= theta_R < theta_S <= 1");
  if (!(K_S > 0.0)) throw std::invalid_argument("van Genuchten: K_S must be positive");
}

VanGenuchtenParams silt_loam() { return {0.423, 2.06, 0.396, 0.131, 5.74e-7}; }

VanGenuchtenParams touchet_silt_loam() { return {0.500, 7.09, 0.469, 0.190, 3.507e-5}; }

// ---------------------------------------------------------------------------
// Van Genuchten-Mualem

VanGenuchten::VanGenuchten(VanGenuchtenParams p) : p_(p) {
  p_.validate();
  m_ = (p_.n - 1.0) / p_.n;
  r_ = p_.theta_R / p_.theta_S;
}

double VanGenuchten::effective_saturation(double psi) const {
  if (psi >= 0.0) return 1.0;
  const double x = std::pow(-p_.alpha * psi, p_.n);
  return std::exp(-m_ * std::log1p(x));
}

double VanGenuchten::saturation(double psi) const {
  if (psi >= 0.0) return 1.0;
  return r_ + (1.0 - r_) * effective_saturation(psi);
}

double VanGenuchten::d_saturation(double psi) const {
  if (psi >= 0.0) return 0.0;
  const double a = -p_.alpha * psi;
  const double x = std::pow(a, p_.n);
  return (1.0 - r_) * m_ * p_.n * p_.alpha * std::pow(a, p_.n - 1.0) *
         std::exp(-(m_ + 1.0) * std::log1p(x));
}

// theta_eff^(1/2) * (1 - (1 - w)^m)^2 with w = theta_eff^(1/m).
double VanGenuchten::mualem(double theta_eff, double w) const {
  if (theta_eff <= 0.0) return 0.0;
  double log_one_minus_w;
  if (w < 0.5) {
    log_one_minus_w = std::log1p(-w);
  } else {
    if (w >= 1.0) return 1.0;
    log_one_minus_w = std::log(1.0 - w);
  }
  const double bracket = -std::expm1(m_ * log_one_minus_w);
  return std::sqrt(theta_eff) * bracket * bracket;
}

double VanGenuchten::conductivity(double psi) const {
  if (psi >= 0.0) return 1.0;
  const double x = std::pow(-p_.alpha * psi, p_.n);
  const double theta_eff = std::exp(-m_ * std::log1p(x));
  if (x < 1.0) {
    // w close to 1: use 1 - w = x / (1 + x) directly.
    if (x == 0.0) return 1.0;
    const double log_one_minus_w = std::log(x) - std::log1p(x);
    const double bracket = -std::expm1(m_ * log_one_minus_w);
    return std::sqrt(theta_eff) * bracket * bracket;
  }
  return mualem(theta_eff, 1.0 / (1.0 + x));
}

double VanGenuchten::conductivity_of_saturation(double s) const {
  if (!(s >= r_ && s <= 1.0))
    throw std::domain_error("van Genuchten: saturation outside [theta_R/theta_S, 1]");
  const double theta_eff = (s - r_) / (1.0 - r_);
  if (theta_eff >= 1.0) return 1.0;
  return mualem(theta_eff, std::pow(theta_eff, 1.0 / m_));
}

// ---------------------------------------------------------------------------
// Test families

LinearRetention::LinearRetention(double s0, double slope, double k) : s0_(s0), slope_(slope), k_(k) {
  if (!(slope >= 0.0)) throw std::invalid_argument("linear law: slope must be non-negative");
  if (!(k > 0.0)) throw std::invalid_argument("linear law: conductivity must be positive");
}

ArctanRetention::ArctanRetention(double m_S, double M_S, double m_K, double M_K)
    : m_S_(m_S), M_S_(M_S), m_K_(m_K), M_K_(M_K) {
  if (!(m_S > 0.0 && m_S <= M_S)) throw std::invalid_argument("arctan law: need 0 < m_S <= M_S");
  if (!(m_K > 0.0 && m_K <= M_K)) throw std::invalid_argument("arctan law: need 0 < m_K <= M_K");
}

double ArctanRetention::saturation(double psi) const {
  return m_S_ * psi + (M_S_ - m_S_) * std::atan(psi);
}

double ArctanRetention::d_saturation(double psi) const {
  return m_S_ + (M_S_ - m_S_) / (1.0 + psi * psi);
}

double ArctanRetention::conductivity_of_saturation(double s) const {
  return m_K_ + (M_K_ - m_K_) / (1.0 + std::exp(-s));
}

double ArctanRetention::conductivity(double psi) const {
  return conductivity_of_saturation(saturation(psi));
}

// ---------------------------------------------------------------------------
// Double-double potential

Potential Potential::sum(double a, double b) { return two_sum(a, b); }

Potential operator+(Potential a, Potential b) {
  Potential s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return two_sum(s.hi, s.lo);
}

Potential operator-(Potential a, Potential b) { return a + Potential{-b.hi, -b.lo}; }

Potential operator+(Potential a, double b) { return a + Potential{b, 0.0}; }

// ---------------------------------------------------------------------------
// Kirchhoff table

KirchhoffTable::KirchhoffTable(std::shared_ptr<const RetentionLaw> law, KirchhoffTableOptions opts)
    : law_(std::move(law)) {
  if (!(opts.psi_min < 0.0 && opts.psi_max > 0.0))
    throw std::invalid_argument("Kirchhoff table: range must contain 0 in its interior");
  if (opts.nodes < 3) throw std::invalid_argument("Kirchhoff table: need at least 3 nodes");

  const int intervals = opts.nodes - 1;
  int n_neg = static_cast<int>(
      std::lround(intervals * (-opts.psi_min) / (opts.psi_max - opts.psi_min)));
  n_neg = std::clamp(n_neg, 1, intervals - 1);
  const int n_pos = intervals - n_neg;

  psi_.reserve(static_cast<std::size_t>(opts.nodes));
  for (int i = 0; i < n_neg; ++i) psi_.push_back(opts.psi_min * (1.0 - double(i) / n_neg));
  psi_.push_back(0.0);
  for (int i = 1; i <= n_pos; ++i) psi_.push_back(opts.psi_max * double(i) / n_pos);

  const auto k = [this](double p) { return law_->conductivity(p); };
  u_.assign(psi_.size(), Potential{});
  const auto zero = static_cast<std::size_t>(n_neg);
  for (std::size_t i = zero; i-- > 0;) u_[i] = u_[i + 1] + (-integrate(k, psi_[i], psi_[i + 1]));
  for (std::size_t i = zero + 1; i < psi_.size(); ++i)
    u_[i] = u_[i - 1] + integrate(k, psi_[i - 1], psi_[i]);

  for (std::size_t i = 1; i < u_.size(); ++i)
    if (!(u_[i - 1] < u_[i]))
      throw std::runtime_error("Kirchhoff table: transform not strictly increasing");
}

std::size_t KirchhoffTable::interval_of(double psi) const {
  auto it = std::upper_bound(psi_.begin(), psi_.end(), psi);
  auto i = static_cast<std::size_t>(std::distance(psi_.begin(), it));
  return std::min(i == 0 ? 0 : i - 1, psi_.size() - 2);
}

// Within one table interval K is analytic except at psi = 0, where the
// Mualem form has a weak singularity; a fixed Gauss rule is exact to
// rounding elsewhere and, unlike the adaptive rule, stays cheap on very short
// sub-intervals.
double KirchhoffTable::partial(std::size_t i, double psi) const {
  const auto k = [this](double p) { return law_->conductivity(p); };
  if (psi == psi_[i]) return 0.0;
  if (psi_[i + 1] == 0.0 && psi - psi_[i] > 1e-6 * (psi_[i + 1] - psi_[i])) return integrate(k, psi_[i], psi);
  return boost::math::quadrature::gauss<double, 30>::integrate(k, psi_[i], psi);
}

Potential KirchhoffTable::forward(double psi) const {
  if (!(psi >= psi_min() && psi <= psi_max()))
    throw std::out_of_range("Kirchhoff transform: head " + std::to_string(psi) +
                            " outside tabulated range");
  const std::size_t i = interval_of(psi);
  return u_[i] + partial(i, psi);
}

double KirchhoffTable::inverse(Potential u) const {
  if (u < u_.front() || u > u_.back())
    throw std::out_of_range("Kirchhoff inverse: potential outside tabulated range");

  auto it = std::upper_bound(u_.begin(), u_.end(), u, [](Potential a, Potential b) { return a < b; });
  std::size_t i = static_cast<std::size_t>(std::distance(u_.begin(), it));
  i = std::min(i == 0 ? 0 : i - 1, u_.size() - 2);

  double lo = psi_[i], hi = psi_[i + 1];
  const double target = (u - u_[i]).value();
  if (target <= 0.0) return lo;
  const double width = (u_[i + 1] - u_[i]).value();
  if (target >= width) return hi;

  auto residual = [&](double p) { return (u_[i] - u).value() + partial(i, p); };
  double p = lo + (hi - lo) * (target / width);
  for (int iter = 0; iter < 200; ++iter) {
    const double g = residual(p);
    if (g == 0.0) return p;
    if (g < 0.0)
      lo = p;
    else
      hi = p;
    const double slope = law_->conductivity(p);
    double next = slope > 0.0 ? p - g / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - p) <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(p)) ||
        hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(p)))
      return next;
    p = next;
  }
  return p;
}

// ---------------------------------------------------------------------------
// ConstitutiveModel

ConstitutiveModel::ConstitutiveModel(std::shared_ptr<const RetentionLaw> law, KirchhoffTableOptions opts)
    : law_(std::move(law)), opts_(opts) {
  if (!law_) throw std::invalid_argument("ConstitutiveModel: null retention law");
  table_ = std::make_shared<const KirchhoffTable>(law_, opts_);
}

ConstitutiveModel ConstitutiveModel::van_genuchten(const VanGenuchtenParams& p, KirchhoffTableOptions opts) {
  return ConstitutiveModel(std::make_shared<const VanGenuchten>(p), opts);
}

Potential ConstitutiveModel::kirchhoff(double psi) const { return table_->forward(psi); }

double ConstitutiveModel::kirchhoff_inv(Potential u) const { return table_->inverse(u); }

double ConstitutiveModel::b_of_u(Potential u) const { return saturation(kirchhoff_inv(u)); }

double ConstitutiveModel::energy_w(double psi) const {
  if (!(psi >= table_->psi_min() && psi <= table_->psi_max()))
    throw std::out_of_range("energy functional: head outside tabulated range");
  const auto integrand = [this](double p) { return law_->d_saturation(p) * p; };
  // Split at -1 where the van Genuchten integrand peaks.
  if (psi < -1.0) return -(integrate(integrand, psi, -1.0) + integrate(integrand, -1.0, 0.0));
  if (psi < 0.0) return -integrate(integrand, psi, 0.0);
  return integrate(integrand, 0.0, psi);
}

// ---------------------------------------------------------------------------

BoundsReport bounds_report(const ConstitutiveModel& model, std::pair<double, double> psi_interval,
                           double M_f, double M_rho, int samples) {
  const auto [a, b] = psi_interval;
  if (!(a < b)) throw std::invalid_argument("bounds_report: degenerate interval");
  samples = std::max(samples, 10001);

  BoundsReport rep;
  rep.psi_interval = psi_interval;
  rep.M_f = M_f;
  rep.M_rho = M_rho;
  rep.m_S = rep.m_K = std::numeric_limits<double>::infinity();
  rep.M_S = rep.M_K = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double psi = a + (b - a) * double(i) / double(samples - 1);
    const double ds = model.d_saturation(psi);
    const double k = model.conductivity(psi);
    rep.m_S = std::min(rep.m_S, ds);
    rep.M_S = std::max(rep.M_S, ds);
    rep.m_K = std::min(rep.m_K, k);
    rep.M_K = std::max(rep.M_K, k);
  }
  rep.degenerate = !(rep.m_S > 0.0);
  if (rep.degenerate) rep.m_S = 0.0;
  rep.M_psi = rep.degenerate ? std::numeric_limits<double>::infinity() : std::max(M_rho, M_f / rep.m_S);
  return rep;
}

}  // namespace fracflow
