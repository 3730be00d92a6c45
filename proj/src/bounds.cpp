#include "trimreg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "trimreg/estimators.hpp"

namespace trimreg {

namespace {

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in [0, 1/2)");
}

void check_common(std::size_t n, double eps, double alpha) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  check_eps(eps);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

// value * base^{1 - 1/p}, with 0^0 = 1 at p = 1.
double moment_term(double p, double value, double base) {
  const double exponent = 1.0 - 1.0 / p;
  if (exponent == 0.0) return value;
  return value * std::pow(base, exponent);
}

// The Phi_P formulas only need ln(3/alpha) > 0.
void check_formula(std::size_t n, double eps, double alpha) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  check_eps(eps);
  if (!(alpha > 0.0 && alpha < 3.0)) throw std::invalid_argument("alpha must lie in (0, 3)");
}

}  // namespace

MomentProfile::MomentProfile(std::vector<std::pair<double, double>> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto [p, value] = entries_[i];
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("moment exponents must be >= 1");
    if (!(value >= 0.0)) throw std::invalid_argument("moment values must be nonnegative");
    for (std::size_t j = 0; j < i; ++j) {
      if (entries_[j].first == p) throw std::invalid_argument("moment exponents must be distinct");
    }
  }
}

double MomentProfile::fluctuation_term(double base) const {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& [p, value] : entries_) {
    if (p > 2.0) continue;
    any = true;
    best = std::min(best, moment_term(p, value, base));
  }
  if (!any) throw std::invalid_argument("moment profile needs an exponent in [1, 2]");
  return best;
}

double MomentProfile::contamination_term(double base) const {
  if (entries_.empty()) throw std::invalid_argument("moment profile is empty");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [p, value] : entries_) best = std::min(best, moment_term(p, value, base));
  return best;
}

double c_epsilon(double eps) {
  check_eps(eps);
  if (eps == 0.0) return 768.0;
  return 384.0 * (1.0 + eps / std::min(eps, 0.5 - eps));
}

double c_j_epsilon(std::span<const double> t, std::size_t j, double eps, double eps_bar) {
  if (j >= t.size()) throw std::invalid_argument("family index out of range");
  if (!(t[j] > 0.0)) throw std::invalid_argument("t_j must be positive");
  if (!(eps_bar > 0.0)) throw std::invalid_argument("eps_bar must be positive");
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  double total = 0.0;
  for (double tl : t) total += tl;
  return 192.0 * (1.0 + total / t[j] + eps / eps_bar);
}

std::vector<CurvePoint> c_j_epsilon_curve(std::span<const double> eps_grid, std::size_t families) {
  if (families == 0) throw std::invalid_argument("need at least one family");
  const std::vector<double> t(families, 1.0);
  std::vector<CurvePoint> out;
  out.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("curve grid points must lie in (0, 1/2)");
    const double eps_bar = std::min(eps, 0.5 - eps) / (1.0 + static_cast<double>(families));
    out.push_back({eps, c_j_epsilon(t, 0, eps, eps_bar)});
  }
  return out;
}

RegressionLevel phi_regression(std::size_t n, double eps, double alpha, double theta0) {
  check_common(n, eps, alpha);
  if (!(theta0 >= 1.0)) throw std::invalid_argument("theta0 must be >= 1");
  const double nd = static_cast<double>(n);
  const double log_term = std::log(3.0 / alpha);
  const std::size_t count = floor_count(eps * nd) + std::max(ceil_count(log_term), ceil_count(eps * nd / 2.0));
  const double phi = static_cast<double>(count) / nd;
  const bool holds = phi + log_term / (2.0 * nd) <= 1.0 / (96.0 * theta0 * theta0);
  return {phi, holds};
}

double phi_p_uniform(const UniformBoundInputs& in) {
  check_formula(in.n, in.eps, in.alpha);
  if (!(in.emp >= 0.0)) throw std::invalid_argument("Emp must be nonnegative");
  if (in.nu.empty()) throw std::invalid_argument("moment profile is empty");
  const double base = std::log(3.0 / in.alpha) / static_cast<double>(in.n);
  return c_epsilon(in.eps) *
         (8.0 * in.emp + in.nu.fluctuation_term(base) + in.nu.contamination_term(in.eps));
}

double phi_p_regression(const RegressionBoundInputs& in) {
  check_formula(in.n, in.eps, in.alpha);
  if (!(in.theta0 >= 1.0)) throw std::invalid_argument("theta0 must be >= 1");
  if (!(in.r_q >= 0.0) || !(in.r_m >= 0.0)) throw std::invalid_argument("critical radii must be nonnegative");
  if (in.kappa.empty()) throw std::invalid_argument("moment profile is empty");
  const double base = std::log(3.0 / in.alpha) / static_cast<double>(in.n);
  const double radii = std::max(in.r_q, 16.0 * in.r_m);
  const double moments = in.kappa.fluctuation_term(base) + in.kappa.contamination_term(in.eps);
  return 49152.0 * radii + 49152.0 * in.theta0 * in.theta0 * moments;
}

double excess_risk_bound(double phi_p, double theta0) {
  if (!(theta0 >= 1.0)) throw std::invalid_argument("theta0 must be >= 1");
  return (1.0 + 1.0 / (16.0 * theta0 * theta0)) * phi_p * phi_p;
}

RegressionDeltas regression_deltas(double theta0) {
  if (!(theta0 >= 1.0)) throw std::invalid_argument("theta0 must be >= 1");
  return {1.0 / (32.0 * theta0), 1.0 / (448.0 * theta0 * theta0)};
}

LinearCriticalRadii critical_radii_linear(double trace_sigma, double sigma_noise, std::size_t n, double delta_q,
                                          double delta_m) {
  if (!(trace_sigma > 0.0) || !(sigma_noise > 0.0) || n == 0 || !(delta_q > 0.0) || !(delta_m > 0.0)) {
    throw std::invalid_argument("critical radii inputs must be positive");
  }
  const double nd = static_cast<double>(n);
  // Compare n * delta_q^2 >= tr(Sigma) with a relative slack so boundary
  // cases such as 2000 * 0.1^2 = 20 are not lost to rounding.
  const double lhs = nd * delta_q * delta_q;
  const bool zero = lhs >= trace_sigma * (1.0 - 1e-12);
  return {zero, sigma_noise / delta_m * std::sqrt(trace_sigma / nd)};
}

ChernoffCoupling chernoff_coupling_bound(std::size_t n, double p, double eps, double alpha) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must lie in (0, 1)");
  if (!(eps > p)) throw std::invalid_argument("Chernoff coupling bound needs eps > p");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double nd = static_cast<double>(n);
  const double exponent = (eps - p) * (eps - p) * nd / (2.0 * p * (1.0 - p) + 2.0 * eps);
  const double bound = std::clamp(1.0 - std::exp(-exponent), 0.0, 1.0);
  const bool enough = nd >= (2.0 * (1.0 - p) + 2.0 * eps) / p * std::log(1.0 / alpha);
  return {bound, eps >= 2.0 * p, enough};
}

double setup_b_theta0(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  return std::sqrt(std::numbers::pi / (2.0 * p));
}

}  // namespace trimreg
