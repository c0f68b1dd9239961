#pragma once

// Material laws for unsaturated flow: saturation, relative conductivity,
// Kirchhoff potential and the storage energy used by the stability checks.
//
// All heads are dimensionless (scaled by the reference length). Saturation
// is S = theta / theta_S, so the fully saturated value is 1.

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace fracflow {

/// Van Genuchten-Mualem parameter set.
struct VanGenuchtenParams {
  double alpha = 0.0;    ///< curve parameter
  double n = 0.0;        ///< curve exponent, n > 1
  double theta_S = 0.0;  ///< saturated water content
  double theta_R = 0.0;  ///< residual water content
  double K_S = 0.0;      ///< saturated conductivity [m/s], only enters ratios

  /// Throws std::invalid_argument unless n > 1, alpha > 0,
  /// 0 <= theta_R < theta_S <= 1 and K_S > 0.
  void validate() const;
};

/// Silt loam (matrix) from the injection example.
VanGenuchtenParams silt_loam();
/// Touchet silt loam (fracture) from the injection example.
VanGenuchtenParams touchet_silt_loam();

/// Closed-form saturation / conductivity pair S(psi), K(S(psi)).
class RetentionLaw {
 public:
  virtual ~RetentionLaw() = default;

  virtual double saturation(double psi) const = 0;
  virtual double d_saturation(double psi) const = 0;
  /// K(S(psi)); evaluated from psi directly to avoid cancellation.
  virtual double conductivity(double psi) const = 0;
  /// K as a function of a saturation value. Throws std::domain_error when s
  /// lies outside the admissible saturation range of the law.
  virtual double conductivity_of_saturation(double s) const = 0;
  virtual std::string name() const = 0;
};

class VanGenuchten final : public RetentionLaw {
 public:
  explicit VanGenuchten(VanGenuchtenParams p);

  double saturation(double psi) const override;
  double d_saturation(double psi) const override;
  double conductivity(double psi) const override;
  double conductivity_of_saturation(double s) const override;
  std::string name() const override { return "van_genuchten"; }

  const VanGenuchtenParams& params() const { return p_; }
  /// theta_R / theta_S, the saturation limit as psi -> -inf.
  double residual_saturation() const { return r_; }
  /// Effective saturation Theta_eff(psi) in [0, 1].
  double effective_saturation(double psi) const;

 private:
  double mualem(double theta_eff, double w) const;

  VanGenuchtenParams p_;
  double m_;  // (n - 1) / n
  double r_;  // theta_R / theta_S
};

/// S(psi) = s0 + slope * psi, K = const. Used for manufactured solutions.
class LinearRetention final : public RetentionLaw {
 public:
  LinearRetention(double s0, double slope, double k);

  double saturation(double psi) const override { return s0_ + slope_ * psi; }
  double d_saturation(double) const override { return slope_; }
  double conductivity(double) const override { return k_; }
  double conductivity_of_saturation(double) const override { return k_; }
  std::string name() const override { return "linear"; }

 private:
  double s0_, slope_, k_;
};

/// Nondegenerate law with m_S <= S' <= M_S and m_K <= K <= M_K everywhere:
///   S(psi) = m_S psi + (M_S - m_S) atan(psi),   S(0) = 0,
///   K(S)   = m_K + (M_K - m_K) / (1 + exp(-S)).
class ArctanRetention final : public RetentionLaw {
 public:
  ArctanRetention(double m_S, double M_S, double m_K, double M_K);

  double saturation(double psi) const override;
  double d_saturation(double psi) const override;
  double conductivity(double psi) const override;
  double conductivity_of_saturation(double s) const override;
  std::string name() const override { return "arctan"; }

 private:
  double m_S_, M_S_, m_K_, M_K_;
};

/// Unevaluated sum hi + lo with |lo| <= ulp(hi) / 2.
///
/// The fracture conductivity falls to ~1e-23 well inside the tabulated range,
/// so the potential needs more than 53 bits for the inverse to resolve psi.
struct Potential {
  double hi = 0.0;
  double lo = 0.0;

  double value() const { return hi + lo; }

  static Potential sum(double a, double b);
  friend Potential operator+(Potential a, Potential b);
  friend Potential operator-(Potential a, Potential b);
  friend Potential operator+(Potential a, double b);
  friend bool operator<(Potential a, Potential b) { return (a - b).value() < 0.0; }
  friend bool operator>(Potential a, Potential b) { return b < a; }
  friend bool operator<=(Potential a, Potential b) { return !(b < a); }
  friend bool operator>=(Potential a, Potential b) { return !(a < b); }
};

struct KirchhoffTableOptions {
  double psi_min = -50.0;
  double psi_max = 10.0;
  int nodes = 4096;
};

/// Cumulative table of u = int_0^psi K(S(phi)) dphi on a node set containing 0.
class KirchhoffTable {
 public:
  KirchhoffTable(std::shared_ptr<const RetentionLaw> law, KirchhoffTableOptions opts);

  double psi_min() const { return psi_.front(); }
  double psi_max() const { return psi_.back(); }
  std::size_t size() const { return psi_.size(); }
  double node_psi(std::size_t i) const { return psi_[i]; }
  Potential node_u(std::size_t i) const { return u_[i]; }

  Potential forward(double psi) const;
  double inverse(Potential u) const;

 private:
  std::size_t interval_of(double psi) const;
  double partial(std::size_t i, double psi) const;

  std::shared_ptr<const RetentionLaw> law_;
  std::vector<double> psi_;
  std::vector<Potential> u_;
};

/// A retention law together with its Kirchhoff table. Immutable; cheap to copy.
class ConstitutiveModel {
 public:
  ConstitutiveModel() = default;
  ConstitutiveModel(std::shared_ptr<const RetentionLaw> law, KirchhoffTableOptions opts = {});

  static ConstitutiveModel van_genuchten(const VanGenuchtenParams& p, KirchhoffTableOptions opts = {});

  const RetentionLaw& law() const { return *law_; }
  std::shared_ptr<const RetentionLaw> law_ptr() const { return law_; }
  const KirchhoffTable& table() const { return *table_; }
  const KirchhoffTableOptions& table_options() const { return opts_; }
  bool valid() const { return law_ != nullptr; }

  double saturation(double psi) const { return law_->saturation(psi); }
  double d_saturation(double psi) const { return law_->d_saturation(psi); }
  double conductivity(double psi) const { return law_->conductivity(psi); }
  double rel_conductivity(double s) const { return law_->conductivity_of_saturation(s); }

  /// u = int_0^psi K(S(phi)) dphi. Throws std::out_of_range outside the table.
  Potential kirchhoff(double psi) const;
  double kirchhoff_inv(Potential u) const;
  double kirchhoff_inv(double u) const { return kirchhoff_inv(Potential{u, 0.0}); }
  /// b(u) = S(kirchhoff_inv(u)).
  double b_of_u(Potential u) const;
  /// W(psi) = int_0^psi S'(phi) phi dphi. Throws std::out_of_range outside the table.
  double energy_w(double psi) const;

 private:
  std::shared_ptr<const RetentionLaw> law_;
  std::shared_ptr<const KirchhoffTable> table_;
  KirchhoffTableOptions opts_;
};

struct BoundsReport {
  double m_S = 0.0, M_S = 0.0;
  double m_K = 0.0, M_K = 0.0;
  std::pair<double, double> psi_interval;
  double M_f = 0.0;
  double M_rho = 0.0;
  /// max{M_rho, M_f / m_S}; +inf when degenerate.
  double M_psi = 0.0;
  /// m_S == 0 somewhere on the interval.
  bool degenerate = false;
};

/// Dense scan (samples >= 1e4) of S' and K over [lo, hi].
BoundsReport bounds_report(const ConstitutiveModel& model, std::pair<double, double> psi_interval,
                           double M_f = 0.0, double M_rho = 0.0, int samples = 10001);

}  // namespace fracflow
