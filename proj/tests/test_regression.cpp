#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "trimreg/estimators.hpp"
#include "trimreg/regression.hpp"

using namespace trimreg;

namespace {

Dataset clean_instance(std::uint64_t seed, std::size_t n = 120, std::size_t d = 5) {
  const Eigen::VectorXd beta = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(d), -1.0, 2.0);
  return gen_setup_a(n, d, 0.3, ErrorDist::normal(), beta, {seed, 0});
}

Eigen::MatrixXd random_matrix(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(g);
  return m;
}

double objective(const Dataset& data, const ActiveSet& set, const Eigen::VectorXd& beta) {
  double s = 0.0;
  for (std::size_t i : set.indices) {
    const auto r = static_cast<Eigen::Index>(i);
    const double e = data.X.row(r).dot(beta) - data.y(r);
    s += e * e;
  }
  return s;
}

}  // namespace

TEST_CASE("fit_least_squares examples") {
  Eigen::MatrixXd X(2, 1);
  X << 1, 2;
  Eigen::VectorXd y(2);
  y << 2, 4;
  CHECK(fit_least_squares(X, y)(0) == doctest::Approx(2.0));

  std::mt19937_64 g(1);
  const Eigen::MatrixXd R = random_matrix(g, 10, 4);
  CHECK(fit_least_squares(R, Eigen::VectorXd::Zero(10)).isZero(0.0));

  // Rank deficient: duplicated column, minimum-norm splits the weight.
  Eigen::MatrixXd D(3, 2);
  D << 1, 1, 2, 2, 3, 3;
  Eigen::VectorXd yd(3);
  yd << 2, 4, 6;
  const Eigen::VectorXd b = fit_least_squares(D, yd);
  CHECK(b(0) == doctest::Approx(1.0));
  CHECK(b(1) == doctest::Approx(1.0));

  Eigen::MatrixXd bad = R;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(fit_least_squares(bad, Eigen::VectorXd::Zero(10)), std::invalid_argument);
}

TEST_CASE("fit_least_squares residual orthogonality on 100 random systems") {
  std::mt19937_64 g(2);
  std::uniform_int_distribution<int> dd(1, 30);
  for (int rep = 0; rep < 100; ++rep) {
    const int d = dd(g);
    const int n = d + dd(g);
    const Eigen::MatrixXd X = random_matrix(g, n, d);
    const Eigen::VectorXd y = random_matrix(g, n, 1);
    const Eigen::VectorXd beta = fit_least_squares(X, y);
    const double resid = (X.transpose() * (y - X * beta)).cwiseAbs().maxCoeff();
    CHECK(resid <= 1e-8 * (1.0 + (X.transpose() * y).cwiseAbs().maxCoeff()));

    const Eigen::VectorXd normal = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    CHECK((beta - normal).norm() <= 1e-8 * (1.0 + normal.norm()));

    const Eigen::VectorXd v = random_matrix(g, d, 1);
    const Eigen::VectorXd shifted = fit_least_squares(X, y + X * v);
    CHECK((shifted - (beta + v)).norm() <= 1e-8 * (1.0 + (beta + v).norm()));
  }
}

TEST_CASE("active_set examples") {
  Dataset data;
  data.X = Eigen::MatrixXd::Ones(4, 1);
  data.y = Eigen::VectorXd(4);
  data.y << 0, 1, 2, 10;
  const RegressorPair pair{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  const Eigen::VectorXd diffs = loss_differences(pair, data);
  CHECK(diffs(0) == -1.0);
  CHECK(diffs(3) == 19.0);
  CHECK(active_set(pair, data, 1).indices == std::vector<std::size_t>{1, 2});
  CHECK(active_set(pair, data, 0).indices == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(active_set(pair, data, 2), std::invalid_argument);

  const RegressorPair tie = RegressorPair::zeros(1);
  CHECK(active_set(tie, data, 1).indices == std::vector<std::size_t>{1, 2});
}

TEST_CASE("property: active set cardinality and trimmed-mean consistency") {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 200; ++rep) {
    const Dataset data = contaminate_a(clean_instance(100 + rep, 60, 4), 0.1, {static_cast<std::uint64_t>(rep), 7});
    const RegressorPair pair{random_matrix(g, 4, 1), random_matrix(g, 4, 1)};
    std::uniform_int_distribution<std::size_t> kd(0, 29);
    const std::size_t k = kd(g);
    const ActiveSet set = active_set(pair, data, k);
    REQUIRE(set.indices.size() == 60 - 2 * k);
    CHECK(std::is_sorted(set.indices.begin(), set.indices.end()));
    CHECK(std::adjacent_find(set.indices.begin(), set.indices.end()) == set.indices.end());
    const Eigen::VectorXd diffs = loss_differences(pair, data);
    double s = 0.0;
    for (std::size_t i : set.indices) s += diffs(static_cast<Eigen::Index>(i));
    const std::vector<double> v(diffs.data(), diffs.data() + diffs.size());
    const double tm = trimmed_mean(v, TrimSpec(k, 60));
    CHECK(s / static_cast<double>(set.indices.size()) == doctest::Approx(tm).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("aasd and plug_in with k = 0 recover OLS on 20 clean instances") {
  GdConfig cfg;
  cfg.tol_delta = 1e-10;
  cfg.max_iters = 200000;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Dataset data = clean_instance(200 + s);
    const Eigen::VectorXd ols = fit_least_squares(data.X, data.y);
    const RegressorPair a = aasd(data, 0, cfg, RegressorPair::zeros(data.d()));
    const RegressorPair p = plug_in(data, 0, RegressorPair::zeros(data.d()), 1);
    CHECK(loss_l2(a.beta_m, ols, *data.pop_cov) <= 1e-4);
    CHECK((a.beta_m - ols).norm() <= 1e-4);
    CHECK(loss_l2(p.beta_m, ols, *data.pop_cov) <= 1e-4);
    CHECK(loss_l2(p.beta_M, ols, *data.pop_cov) <= 1e-4);
  }
}

TEST_CASE("aasd from the OLS fixed point stops after one iteration") {
  const Dataset data = clean_instance(300);
  const Eigen::VectorXd ols = fit_least_squares(data.X, data.y);
  std::vector<IterationReport> reports;
  GdObserver obs;
  obs.on_iteration = [&](const IterationReport& r) { reports.push_back(r); };
  const RegressorPair out = aasd(data, 0, GdConfig{}, {ols, ols}, &obs);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].delta <= GdConfig{}.tol_delta);
  CHECK((out.beta_m - ols).norm() <= 1e-8);
}

TEST_CASE("aasd Armijo steps are monotone on the frozen active set") {
  const Dataset data = contaminate_a(clean_instance(400), 0.1, {400, 1});
  std::vector<ArmijoStep> steps;
  GdObserver obs;
  obs.on_step = [&](const ArmijoStep& s) { steps.push_back(s); };
  GdConfig cfg;
  cfg.max_iters = 200;
  aasd(data, 17, cfg, RegressorPair::zeros(data.d()), &obs);
  REQUIRE(!steps.empty());
  for (const auto& s : steps) CHECK(s.objective_after <= s.objective_before);
  CHECK(std::any_of(steps.begin(), steps.end(), [](const ArmijoStep& s) { return s.half == Half::Max; }));
}

TEST_CASE("aasd reports objectives consistent with the active set") {
  const Dataset data = clean_instance(401, 40, 3);
  const RegressorPair init = RegressorPair::zeros(3);
  std::vector<ArmijoStep> steps;
  GdObserver obs;
  obs.on_step = [&](const ArmijoStep& s) { steps.push_back(s); };
  GdConfig cfg;
  cfg.max_iters = 1;
  aasd(data, 3, cfg, init, &obs);
  REQUIRE(steps.size() == 2);
  CHECK(steps[0].objective_before == doctest::Approx(objective(data, active_set(init, data, 3), init.beta_m)));
}

TEST_CASE("GdConfig validation") {
  GdConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.theta = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GdConfig{};
  cfg.tol_delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GdConfig{};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("plug_in is robust to the 10000 outliers") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::VectorXd beta = Eigen::VectorXd::Ones(20);
    const Dataset clean = gen_setup_a(120, 20, 0.0, ErrorDist::normal(), beta, {500 + s, 1});
    const Dataset data = contaminate_a(clean, 0.2, {500 + s, 2});
    const RegressorPair p = plug_in(data, 29, RegressorPair::zeros(20), 2);
    CHECK(loss_l2(p.beta_m, beta, *data.pop_cov) < 5.0);
    CHECK(loss_l2(fit_least_squares(data.X, data.y), beta, *data.pop_cov) > 100.0);
  }
}

TEST_CASE("BucketPartition") {
  const BucketPartition part(10, 3, {1, 1});
  std::vector<std::size_t> all;
  for (std::size_t b = 0; b < 3; ++b) {
    const auto& bucket = part.bucket(b);
    CHECK((bucket.size() == 3 || bucket.size() == 4));
    all.insert(all.end(), bucket.begin(), bucket.end());
  }
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);

  const BucketPartition singles(5, 5, {1, 2});
  Eigen::VectorXd diffs(5);
  diffs << 4, 1, 3, 0, 2;
  const ActiveSet med = singles.median_bucket(diffs);
  REQUIRE(med.indices.size() == 1);
  CHECK(diffs(static_cast<Eigen::Index>(med.indices[0])) == 2.0);

  CHECK_THROWS_AS(BucketPartition(5, 0, {}), std::invalid_argument);
  CHECK_THROWS_AS(BucketPartition(5, 6, {}), std::invalid_argument);
}

TEST_CASE("mom_regression with one bucket is OLS on clean data") {
  GdConfig cfg;
  cfg.tol_delta = 1e-10;
  cfg.max_iters = 200000;
  const Dataset data = clean_instance(600);
  const Eigen::VectorXd ols = fit_least_squares(data.X, data.y);
  const RegressorPair m = mom_regression(data, 1, cfg, RegressorPair::zeros(data.d()), {600, 3});
  CHECK((m.beta_m - ols).norm() <= 1e-4);

  std::vector<IterationReport> reports;
  GdObserver obs;
  obs.on_iteration = [&](const IterationReport& r) { reports.push_back(r); };
  GdConfig few;
  few.max_iters = 3;
  mom_regression(data, data.n(), few, RegressorPair::zeros(data.d()), {600, 3}, &obs);
  REQUIRE(!reports.empty());
  for (const auto& r : reports) CHECK(r.active_size == 1);
}

TEST_CASE("mom_regression beats OLS on Cauchy noise") {
  const Eigen::VectorXd beta = Eigen::VectorXd::Ones(20);
  std::vector<double> mom_losses, ols_losses;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Dataset data = gen_setup_a(120, 20, 0.0, ErrorDist::student_t(1), beta, {700 + s, 1});
    mom_losses.push_back(
        loss_l2(mom_regression(data, 5, GdConfig{}, RegressorPair::zeros(20), {700 + s, 3}).beta_m, beta, *data.pop_cov));
    ols_losses.push_back(loss_l2(fit_least_squares(data.X, data.y), beta, *data.pop_cov));
  }
  std::sort(mom_losses.begin(), mom_losses.end());
  std::sort(ols_losses.begin(), ols_losses.end());
  CHECK(mom_losses[15] < ols_losses[15]);
}

TEST_CASE("best_mom is the minimum over its candidates") {
  const Dataset data = contaminate_a(clean_instance(800, 60, 4), 0.05, {800, 2});
  const std::vector<std::size_t> ks = divisors(60);
  GdConfig cfg;
  cfg.max_iters = 100;
  const RngSeed rng{800, 3};
  const BestMomResult best = best_mom(data, ks, cfg, RegressorPair::zeros(4), rng, *data.beta_star, *data.pop_cov);
  for (std::size_t K : ks) {
    const RegressorPair p = mom_regression(data, K, cfg, RegressorPair::zeros(4), rng);
    CHECK(best.loss <= loss_l2(p.beta_m, *data.beta_star, *data.pop_cov));
  }
  CHECK(std::find(ks.begin(), ks.end(), best.num_buckets) != ks.end());
  CHECK(best.loss == loss_l2(best.pair.beta_m, *data.beta_star, *data.pop_cov));

  const std::vector<std::size_t> none;
  CHECK_THROWS_AS(best_mom(data, none, cfg, RegressorPair::zeros(4), rng, *data.beta_star, *data.pop_cov),
                  std::invalid_argument);

  GdConfig tight;
  tight.tol_delta = 1e-10;
  tight.max_iters = 200000;
  const Dataset clean = clean_instance(801);
  const std::vector<std::size_t> one{1};
  const BestMomResult b1 = best_mom(clean, one, tight, RegressorPair::zeros(5), rng, *clean.beta_star, *clean.pop_cov);
  CHECK((b1.pair.beta_m - fit_least_squares(clean.X, clean.y)).norm() <= 1e-4);
}

TEST_CASE("divisors") {
  CHECK(divisors(12) == std::vector<std::size_t>{1, 2, 3, 4, 6, 12});
  CHECK(divisors(1) == std::vector<std::size_t>{1});
  CHECK(divisors(120).size() == 16);
}

TEST_CASE("loss_l2") {
  const Eigen::Vector2d b(1, 2);
  CHECK(loss_l2(b, b, Eigen::Matrix2d::Identity()) == 0.0);
  CHECK(loss_l2(Eigen::Vector2d(3, 4), Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()) == doctest::Approx(5.0));
  Eigen::Matrix2d s;
  s << 1, 0.5, 0.5, 1;
  CHECK(loss_l2(Eigen::Vector2d(1, 1), Eigen::Vector2d::Zero(), s) == doctest::Approx(std::sqrt(3.0)));
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(loss_l2(b, b, asym), std::invalid_argument);
  CHECK_THROWS_AS(loss_l2(Eigen::Vector3d::Zero(), b, s), std::invalid_argument);
}
