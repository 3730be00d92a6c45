#pragma once

// Linear regression under adversarial contamination.
//
// The trimmed-mean estimator solves
//
//   min_{b_m} max_{b_M}  T_{n,k}( l_{b_m} - l_{b_M} ),   l_b(x, y) = (<x, b> - y)^2,
//
// where T_{n,k} is the k-trimmed mean. For a fixed pair the trimmed mean is a
// plain average over the "active set": the n - 2k indices left after dropping
// the k largest and k smallest loss differences. Both heuristics below
// alternate between recomputing the active set and improving one iterate on
// it; aasd takes Armijo gradient steps, plug_in refits by least squares.
//
// mom_regression swaps the active set for the median-achieving bucket of a
// median-of-means partition; best_mom sweeps the bucket count with oracle
// access to the true coefficients.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "trimreg/random.hpp"
#include "trimreg/synthdata.hpp"

namespace trimreg {

struct RegressorPair {
  Eigen::VectorXd beta_m;  // minimization iterate; the regression estimate
  Eigen::VectorXd beta_M;  // maximization iterate

  static RegressorPair zeros(std::size_t d);
};

struct GdConfig {
  double tol_delta = 1e-4;
  double eta0 = 1.0;
  double xi0 = 1.0;
  double theta = 0.5;
  int max_iters = 1000;
  int max_backtracks = 60;

  void validate() const;
};

struct ActiveSet {
  std::vector<std::size_t> indices;  // ascending
};

enum class Half { Min, Max };

/// One Armijo line search on a frozen active set.
struct ArmijoStep {
  int iteration = 0;
  Half half = Half::Min;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double step_size = 0.0;
  int backtracks = 0;
  bool capped = false;  // backtracking limit hit, zero step taken
};

struct IterationReport {
  int iteration = 0;
  double delta = 0.0;
  std::size_t active_size = 0;
};

struct GdObserver {
  std::function<void(const ArmijoStep&)> on_step;
  std::function<void(const IterationReport&)> on_iteration;
};

/// Minimizer of sum_i (<b, x_i> - y_i)^2; minimum-norm when rank deficient.
Eigen::VectorXd fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Least squares restricted to the given rows of data.
Eigen::VectorXd fit_least_squares(const Dataset& data, std::span<const std::size_t> rows);

/// Per-row loss differences (<x_i, b_m> - y_i)^2 - (<x_i, b_M> - y_i)^2.
Eigen::VectorXd loss_differences(const RegressorPair& pair, const Dataset& data);

ActiveSet active_set(const RegressorPair& pair, const Dataset& data, std::size_t k);

/// Alternating sub-gradient descent with Armijo steps.
RegressorPair aasd(const Dataset& data, std::size_t k, const GdConfig& cfg, const RegressorPair& init,
                   const GdObserver* observer = nullptr);

/// Alternating least-squares refits on the active set, `iters` rounds.
RegressorPair plug_in(const Dataset& data, std::size_t k, const RegressorPair& init, int iters = 2);

/// Fixed random assignment of rows to num_buckets balanced buckets.
class BucketPartition {
public:
  BucketPartition(std::size_t n, std::size_t num_buckets, RngSeed rng);

  std::size_t num_buckets() const { return buckets_.size(); }
  const std::vector<std::size_t>& bucket(std::size_t b) const { return buckets_[b]; }

  /// Rows of the bucket whose mean loss difference is the median bucket mean.
  /// For an even bucket count the lower middle bucket is used.
  ActiveSet median_bucket(const Eigen::VectorXd& differences) const;

private:
  std::vector<std::vector<std::size_t>> buckets_;
};

/// Median-of-means regression: Armijo alternation where the active set is
/// the median-achieving bucket.
RegressorPair mom_regression(const Dataset& data, std::size_t num_buckets, const GdConfig& cfg,
                             const RegressorPair& init, RngSeed rng, const GdObserver* observer = nullptr);

struct BestMomResult {
  std::size_t num_buckets = 0;
  RegressorPair pair;
  double loss = 0.0;
};

/// Runs mom_regression for every candidate bucket count and keeps the one
/// with the smallest loss_l2 against the true coefficients. Needs oracle
/// knowledge of beta_star, so it is a benchmark baseline only.
BestMomResult best_mom(const Dataset& data, std::span<const std::size_t> candidate_buckets,
                       const GdConfig& cfg, const RegressorPair& init, RngSeed rng,
                       const Eigen::VectorXd& beta_star, const Eigen::MatrixXd& sigma);

std::vector<std::size_t> divisors(std::size_t n);

/// sqrt((b - b*)' Sigma (b - b*)).
double loss_l2(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star, const Eigen::MatrixXd& sigma);

}  // namespace trimreg
