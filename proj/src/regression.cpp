#include "trimreg/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "trimreg/estimators.hpp"

namespace trimreg {

namespace {

using Selector = std::function<ActiveSet(const RegressorPair&)>;

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(static_cast<Eigen::Index>(rows[r]));
  return out;
}

void check_pair(const RegressorPair& pair, const Dataset& data) {
  if (static_cast<std::size_t>(pair.beta_m.size()) != data.d() ||
      static_cast<std::size_t>(pair.beta_M.size()) != data.d()) {
    throw std::invalid_argument("regressor pair dimension does not match data");
  }
}

// One descent step on sum_{i in I} (<x_i, beta> - y_i)^2 with I frozen.
// `step` carries the step size across iterations: it is grown by 1/theta on
// entry and shrunk by theta until the objective does not increase.
Eigen::VectorXd armijo_step(const Eigen::MatrixXd& XI, const Eigen::VectorXd& yI, const Eigen::VectorXd& beta,
                            double& step, double initial_step, const GdConfig& cfg, ArmijoStep& info) {
  const Eigen::VectorXd residual = XI * beta - yI;
  const Eigen::VectorXd grad = 2.0 * (XI.transpose() * residual);
  info.objective_before = residual.squaredNorm();
  info.objective_after = info.objective_before;
  info.backtracks = 0;
  info.capped = false;
  if (!grad.allFinite()) throw std::runtime_error("non-finite gradient in Armijo step");
  if (grad.isZero(0.0)) {
    info.step_size = 0.0;
    return beta;
  }

  step /= cfg.theta;
  Eigen::VectorXd candidate = beta - step * grad;
  double objective = (XI * candidate - yI).squaredNorm();
  while (objective > info.objective_before) {
    if (info.backtracks == cfg.max_backtracks) {
      info.capped = true;
      info.step_size = 0.0;
      step = initial_step;
      return beta;
    }
    step *= cfg.theta;
    ++info.backtracks;
    candidate = beta - step * grad;
    objective = (XI * candidate - yI).squaredNorm();
  }
  info.step_size = step;
  info.objective_after = objective;
  return candidate;
}

RegressorPair alternate_armijo(const Dataset& data, const GdConfig& cfg, RegressorPair pair,
                               const Selector& select, const GdObserver* observer) {
  double eta = cfg.eta0;
  double xi = cfg.xi0;
  // The loop runs at least once: delta_0 = tol would otherwise stop it before
  // the first step.
  for (int t = 0; t < cfg.max_iters; ++t) {
    ArmijoStep info;
    info.iteration = t;

    ActiveSet active = select(pair);
    Eigen::VectorXd next_m;
    {
      const Eigen::MatrixXd XI = gather_rows(data.X, active.indices);
      const Eigen::VectorXd yI = gather(data.y, active.indices);
      info.half = Half::Min;
      next_m = armijo_step(XI, yI, pair.beta_m, eta, cfg.eta0, cfg, info);
      if (observer && observer->on_step) observer->on_step(info);
    }
    const double move_m = (next_m - pair.beta_m).norm();
    pair.beta_m = std::move(next_m);

    active = select(pair);
    Eigen::VectorXd next_M;
    {
      const Eigen::MatrixXd XI = gather_rows(data.X, active.indices);
      const Eigen::VectorXd yI = gather(data.y, active.indices);
      info.half = Half::Max;
      next_M = armijo_step(XI, yI, pair.beta_M, xi, cfg.xi0, cfg, info);
      if (observer && observer->on_step) observer->on_step(info);
    }
    const double move_M = (next_M - pair.beta_M).norm();
    pair.beta_M = std::move(next_M);

    const double delta = std::max(move_m, move_M);
    if (observer && observer->on_iteration) observer->on_iteration({t, delta, active.indices.size()});
    if (delta <= cfg.tol_delta) break;
  }
  return pair;
}

}  // namespace

RegressorPair RegressorPair::zeros(std::size_t d) {
  const auto dim = static_cast<Eigen::Index>(d);
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
}

void GdConfig::validate() const {
  if (!(tol_delta > 0.0)) throw std::invalid_argument("tol_delta must be positive");
  if (!(eta0 > 0.0) || !(xi0 > 0.0)) throw std::invalid_argument("initial step sizes must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be positive");
}

Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw std::invalid_argument("X and y row counts differ");
  if (X.rows() == 0) throw std::invalid_argument("least squares needs at least one row");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("least squares input is not finite");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  return cod.solve(y);
}

Eigen::VectorXd fit_least_squares(const Dataset& data, std::span<const std::size_t> rows) {
  const std::vector<std::size_t> idx(rows.begin(), rows.end());
  return fit_least_squares(gather_rows(data.X, idx), gather(data.y, idx));
}

Eigen::VectorXd loss_differences(const RegressorPair& pair, const Dataset& data) {
  check_pair(pair, data);
  const Eigen::ArrayXd rm = (data.X * pair.beta_m - data.y).array();
  const Eigen::ArrayXd rM = (data.X * pair.beta_M - data.y).array();
  return (rm.square() - rM.square()).matrix();
}

ActiveSet active_set(const RegressorPair& pair, const Dataset& data, std::size_t k) {
  const TrimSpec spec(k, data.n());
  const Eigen::VectorXd diffs = loss_differences(pair, data);
  return {trimmed_indices(std::span<const double>(diffs.data(), static_cast<std::size_t>(diffs.size())), spec)};
}

RegressorPair aasd(const Dataset& data, std::size_t k, const GdConfig& cfg, const RegressorPair& init,
                   const GdObserver* observer) {
  cfg.validate();
  check_pair(init, data);
  const TrimSpec spec(k, data.n());
  const Selector select = [&](const RegressorPair& pair) { return active_set(pair, data, spec.k()); };
  return alternate_armijo(data, cfg, init, select, observer);
}

RegressorPair plug_in(const Dataset& data, std::size_t k, const RegressorPair& init, int iters) {
  if (iters < 1) throw std::invalid_argument("plug-in needs at least one iteration");
  check_pair(init, data);
  const TrimSpec spec(k, data.n());
  RegressorPair pair = init;
  for (int t = 0; t < iters; ++t) {
    pair.beta_m = fit_least_squares(data, active_set(pair, data, spec.k()).indices);
    pair.beta_M = fit_least_squares(data, active_set(pair, data, spec.k()).indices);
  }
  return pair;
}

BucketPartition::BucketPartition(std::size_t n, std::size_t num_buckets, RngSeed rng) {
  const auto bounds = balanced_block_bounds(n, num_buckets);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine engine = make_engine(rng);
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(engine)]);
  }
  buckets_.resize(num_buckets);
  for (std::size_t b = 0; b < num_buckets; ++b) {
    buckets_[b].assign(order.begin() + static_cast<std::ptrdiff_t>(bounds[b]),
                       order.begin() + static_cast<std::ptrdiff_t>(bounds[b + 1]));
    std::sort(buckets_[b].begin(), buckets_[b].end());
  }
}

ActiveSet BucketPartition::median_bucket(const Eigen::VectorXd& differences) const {
  std::vector<std::pair<double, std::size_t>> means(buckets_.size());
  for (std::size_t b = 0; b < buckets_.size(); ++b) {
    double sum = 0.0;
    for (std::size_t i : buckets_[b]) sum += differences(static_cast<Eigen::Index>(i));
    if (!std::isfinite(sum)) throw std::runtime_error("non-finite bucket mean");
    means[b] = {sum / static_cast<double>(buckets_[b].size()), b};
  }
  std::sort(means.begin(), means.end());
  return {buckets_[means[(means.size() - 1) / 2].second]};
}

RegressorPair mom_regression(const Dataset& data, std::size_t num_buckets, const GdConfig& cfg,
                             const RegressorPair& init, RngSeed rng, const GdObserver* observer) {
  cfg.validate();
  check_pair(init, data);
  const BucketPartition partition(data.n(), num_buckets, rng);
  const Selector select = [&](const RegressorPair& pair) {
    return partition.median_bucket(loss_differences(pair, data));
  };
  return alternate_armijo(data, cfg, init, select, observer);
}

BestMomResult best_mom(const Dataset& data, std::span<const std::size_t> candidate_buckets, const GdConfig& cfg,
                       const RegressorPair& init, RngSeed rng, const Eigen::VectorXd& beta_star,
                       const Eigen::MatrixXd& sigma) {
  if (candidate_buckets.empty()) throw std::invalid_argument("best_mom needs at least one candidate bucket count");
  BestMomResult best;
  best.loss = std::numeric_limits<double>::infinity();
  for (std::size_t K : candidate_buckets) {
    RegressorPair pair = mom_regression(data, K, cfg, init, rng);
    const double loss = loss_l2(pair.beta_m, beta_star, sigma);
    if (best.num_buckets == 0 || loss < best.loss) best = {K, std::move(pair), loss};
  }
  return best;
}

std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= n; ++k) {
    if (n % k == 0) out.push_back(k);
  }
  return out;
}

double loss_l2(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star, const Eigen::MatrixXd& sigma) {
  if (beta_hat.size() != beta_star.size() || sigma.rows() != beta_hat.size() || sigma.cols() != beta_hat.size()) {
    throw std::invalid_argument("loss_l2 dimension mismatch");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) throw std::invalid_argument("loss_l2 needs a symmetric Sigma");
  const Eigen::VectorXd diff = beta_hat - beta_star;
  return std::sqrt(std::max(0.0, diff.dot(sigma * diff)));
}

}  // namespace trimreg
