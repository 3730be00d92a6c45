#pragma once

// Closed-form constants and error-bound formulas for trimmed-mean uniform
// mean estimation and trimmed-mean regression.
//
// Quantities that depend on the unknown distribution (moment parameters,
// empirical process expectations, critical radii) are inputs. Infima over
// moment exponents are taken over the finite grid the caller supplies.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace trimreg {

/// Grid of (p, value) pairs for a moment parameter such as nu_p or kappa_p.
class MomentProfile {
public:
  MomentProfile() = default;
  explicit MomentProfile(std::vector<std::pair<double, double>> entries);

  const std::vector<std::pair<double, double>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// inf over q in [1, 2] of value_q * base^{1 - 1/q}. Throws if no grid
  /// point lies in [1, 2].
  double fluctuation_term(double base) const;
  /// inf over all grid p of value_p * base^{1 - 1/p}.
  double contamination_term(double base) const;

private:
  std::vector<std::pair<double, double>> entries_;
};

struct UniformBoundInputs {
  double emp = 0.0;  // expected sup of the centered empirical process
  MomentProfile nu;
  std::size_t n = 1;
  double eps = 0.0;
  double alpha = 0.05;
};

struct RegressionBoundInputs {
  double theta0 = 1.0;  // L2/L1 ratio, >= 1
  /// Critical radii, evaluated by the caller at delta_q = 1/(32 theta0) and
  /// delta_m = 1/(448 theta0^2); see regression_deltas().
  double r_q = 0.0;
  double r_m = 0.0;
  MomentProfile kappa;
  std::size_t n = 1;
  double eps = 0.0;
  double alpha = 0.05;
};

/// 384 (1 + eps / min(eps, 1/2 - eps)); 768 at eps = 0 by continuity.
double c_epsilon(double eps);

/// 192 (1 + sum(t) / t[j] + eps / eps_bar), j zero-based.
double c_j_epsilon(std::span<const double> t, std::size_t j, double eps, double eps_bar);

struct CurvePoint {
  double eps;
  double value;
};

/// C_j^eps along an eps grid for `families` function families sharing the
/// same t, using eps_bar = min(eps, 1/2 - eps) / (1 + families).
/// Grid points must lie in (0, 1/2).
std::vector<CurvePoint> c_j_epsilon_curve(std::span<const double> eps_grid, std::size_t families = 1);

struct RegressionLevel {
  double phi;
  bool side_condition_holds;  // phi + ln(3/alpha)/(2n) <= 1/(96 theta0^2)
};

RegressionLevel phi_regression(std::size_t n, double eps, double alpha, double theta0);

/// alpha may be anything in (0, 3) here, where ln(3/alpha) stays positive.
double phi_p_uniform(const UniformBoundInputs& in);
double phi_p_regression(const RegressionBoundInputs& in);

/// (1 + 1/(16 theta0^2)) * phi_p^2.
double excess_risk_bound(double phi_p, double theta0);

struct RegressionDeltas {
  double delta_q;
  double delta_m;
};
RegressionDeltas regression_deltas(double theta0);

struct LinearCriticalRadii {
  bool r_q_zero;  // false means r_q is possibly infinite
  double r_m_bound;
};

/// Closed-form critical radii for linear regression with independent noise.
LinearCriticalRadii critical_radii_linear(double trace_sigma, double sigma_noise, std::size_t n, double delta_q,
                                          double delta_m);

struct ChernoffCoupling {
  double bound;         // lower bound on P{Binomial(n, p) <= eps n}
  bool eps_at_least_2p;
  bool n_large_enough;  // n >= ((2(1-p) + 2 eps)/p) ln(1/alpha)
};

ChernoffCoupling chernoff_coupling_bound(std::size_t n, double p, double eps, double alpha = 0.05);

/// L2/L1 ratio of the missing-data design, sqrt(pi / (2p)).
double setup_b_theta0(double p);

}  // namespace trimreg
