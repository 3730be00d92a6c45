#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "trimreg/bounds.hpp"

using namespace trimreg;

TEST_CASE("c_epsilon") {
  CHECK(c_epsilon(0.1) == 768.0);
  CHECK(c_epsilon(0.4) == doctest::Approx(1920.0));
  CHECK(c_epsilon(0.0) == 768.0);
  for (int i = 1; i <= 25; ++i) CHECK(c_epsilon(0.01 * i) == 768.0);
  double prev = c_epsilon(0.25);
  for (int i = 1; i < 25; ++i) {
    const double v = c_epsilon(0.25 + 0.01 * i);
    CHECK(v > prev);
    prev = v;
  }
  CHECK_THROWS_AS(c_epsilon(0.5), std::invalid_argument);
  CHECK_THROWS_AS(c_epsilon(-0.1), std::invalid_argument);
}

TEST_CASE("c_j_epsilon") {
  const std::vector<double> one{3.0};
  for (double eps : {0.05, 0.1, 0.25}) CHECK(c_j_epsilon(one, 0, eps, eps) == doctest::Approx(576.0));
  const std::vector<double> two{2.0, 4.0};
  CHECK(c_j_epsilon(two, 0, 0.0, 0.1) == doctest::Approx(768.0));
  CHECK_THROWS_AS(c_j_epsilon(two, 0, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(c_j_epsilon(two, 2, 0.1, 0.1), std::invalid_argument);

  std::vector<double> grid;
  for (int i = 1; i < 50; ++i) grid.push_back(0.01 * i);
  const auto curve = c_j_epsilon_curve(grid);
  REQUIRE(curve.size() == grid.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(std::isfinite(curve[i].value));
    CHECK(curve[i].value == doctest::Approx(c_epsilon(grid[i])));
    if (grid[i] > 0.25 && i > 0) CHECK(curve[i].value > curve[i - 1].value);
  }
  const std::vector<double> edge{0.4999};
  CHECK(c_j_epsilon_curve(edge)[0].value > 1e6);
  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(c_j_epsilon_curve(bad), std::invalid_argument);
}

TEST_CASE("phi_regression") {
  const RegressionLevel lvl = phi_regression(1000, 0.05, 0.05, 1.0);
  CHECK(lvl.phi == doctest::Approx(0.075));
  for (std::size_t n : {10u, 100u, 1000u, 12345u}) {
    for (double alpha : {0.01, 0.05, 0.3}) {
      const double expect = std::ceil(std::log(3.0 / alpha));
      CHECK(phi_regression(n, 0.0, alpha, 1.0).phi * static_cast<double>(n) == doctest::Approx(expect));
    }
  }
  CHECK_FALSE(phi_regression(1000, 0.05, 0.05, 2.0).side_condition_holds);
  CHECK(phi_regression(1000000, 0.0, 0.05, 1.0).side_condition_holds);
}

TEST_CASE("phi_p_uniform") {
  UniformBoundInputs in;
  in.n = 100;
  in.eps = 0.0;
  in.alpha = 3.0 / std::exp(1.0);
  in.nu = MomentProfile({{2.0, 1.0}});
  CHECK(phi_p_uniform(in) == doctest::Approx(76.8));
  CHECK(in.nu.fluctuation_term(0.01) == doctest::Approx(0.1));
  CHECK(in.nu.contamination_term(0.0) == 0.0);

  in.nu = MomentProfile({{2.0, 0.0}, {1.5, 0.0}});
  CHECK(phi_p_uniform(in) == 0.0);

  in.nu = MomentProfile({{1.5, 2.0}, {2.0, 1.0}});
  in.eps = 0.1;
  in.emp = 0.3;
  const double before = phi_p_uniform(in);
  in.nu = MomentProfile({{1.5, 2.0}, {2.0, 1.0}, {4.0, 0.5}});
  CHECK(phi_p_uniform(in) <= before);

  in.nu = MomentProfile();
  CHECK_THROWS_AS(phi_p_uniform(in), std::invalid_argument);
  in.nu = MomentProfile({{2.0, 1.0}});
  in.alpha = 3.0;
  CHECK_THROWS_AS(phi_p_uniform(in), std::invalid_argument);
  CHECK_THROWS_AS(MomentProfile({{0.5, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(MomentProfile({{2.0, 1.0}, {2.0, 3.0}}), std::invalid_argument);
  CHECK_THROWS_AS(MomentProfile({{2.0, -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(MomentProfile({{4.0, 1.0}}).fluctuation_term(0.1), std::invalid_argument);
}

TEST_CASE("phi_p_regression and excess risk") {
  RegressionBoundInputs in;
  in.kappa = MomentProfile({{2.0, 0.0}});
  in.n = 100;
  in.eps = 0.1;
  CHECK(phi_p_regression(in) == 0.0);
  in.r_q = 1.0;
  CHECK(phi_p_regression(in) == doctest::Approx(49152.0));
  in.r_q = 0.0;
  in.r_m = 0.25;
  CHECK(phi_p_regression(in) == doctest::Approx(49152.0 * 4.0));
  CHECK(excess_risk_bound(1.0, 1.0) == doctest::Approx(17.0 / 16.0));
  CHECK(excess_risk_bound(2.0, 2.0) == doctest::Approx((1.0 + 1.0 / 64.0) * 4.0));

  const RegressionDeltas d = regression_deltas(2.0);
  CHECK(d.delta_q == doctest::Approx(1.0 / 64.0));
  CHECK(d.delta_m == doctest::Approx(1.0 / 1792.0));
  in.theta0 = 0.5;
  CHECK_THROWS_AS(phi_p_regression(in), std::invalid_argument);
  in.theta0 = 1.0;
  in.kappa = MomentProfile();
  CHECK_THROWS_AS(phi_p_regression(in), std::invalid_argument);
}

TEST_CASE("Phi_P monotone on an (n, eps) grid") {
  UniformBoundInputs u;
  u.emp = 0.2;
  u.nu = MomentProfile({{1.0, 3.0}, {1.5, 2.0}, {2.0, 1.5}, {3.0, 1.2}});
  RegressionBoundInputs r;
  r.theta0 = 1.5;
  r.r_q = 0.0;
  r.r_m = 0.01;
  r.kappa = MomentProfile({{1.2, 2.5}, {2.0, 1.5}, {4.0, 1.1}});
  for (int i = 0; i < 20; ++i) {
    const double eps = 0.02 * i;
    for (int j = 0; j < 20; ++j) {
      const std::size_t n = 50 + 100 * static_cast<std::size_t>(j);
      u.n = r.n = n;
      u.eps = r.eps = eps;
      const double pu = phi_p_uniform(u), pr = phi_p_regression(r);
      if (i > 0) {
        u.eps = r.eps = eps - 0.02;
        CHECK(phi_p_uniform(u) <= pu);
        CHECK(phi_p_regression(r) <= pr);
        u.eps = r.eps = eps;
      }
      if (j > 0) {
        u.n = r.n = n - 100;
        CHECK(phi_p_uniform(u) >= pu);
        CHECK(phi_p_regression(r) >= pr);
      }
    }
  }
}

TEST_CASE("critical_radii_linear") {
  const LinearCriticalRadii a = critical_radii_linear(20.0, 1.0, 2000, 0.1, 0.1);
  CHECK(a.r_q_zero);
  CHECK(a.r_m_bound == doctest::Approx(1.0));
  CHECK_FALSE(critical_radii_linear(20.0, 1.0, 1999, 0.1, 0.1).r_q_zero);
  CHECK_THROWS_AS(critical_radii_linear(0.0, 1.0, 10, 0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(critical_radii_linear(1.0, 1.0, 0, 0.1, 0.1), std::invalid_argument);
}

TEST_CASE("chernoff_coupling_bound") {
  const ChernoffCoupling c = chernoff_coupling_bound(200, 0.05, 0.15);
  CHECK(c.bound == doctest::Approx(1.0 - std::exp(-0.01 * 200 / 0.395)));
  CHECK(c.bound == doctest::Approx(0.9937).epsilon(1e-4));
  CHECK(c.eps_at_least_2p);
  CHECK(c.n_large_enough == (200.0 >= (2.0 * 0.95 + 0.3) / 0.05 * std::log(20.0)));
  CHECK(chernoff_coupling_bound(0, 0.05, 0.15).bound == 0.0);
  double prev = 0.0;
  for (std::size_t n = 1; n < 500; n += 7) {
    const double b = chernoff_coupling_bound(n, 0.05, 0.15).bound;
    CHECK(b >= prev);
    prev = b;
  }
  CHECK_FALSE(chernoff_coupling_bound(200, 0.1, 0.15).eps_at_least_2p);
  CHECK_THROWS_AS(chernoff_coupling_bound(200, 0.15, 0.15), std::invalid_argument);
  CHECK(setup_b_theta0(1.0) == doctest::Approx(std::sqrt(std::acos(-1.0) / 2.0)));
}
