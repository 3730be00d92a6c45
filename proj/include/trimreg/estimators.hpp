#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace trimreg {

/// Number of points removed from each tail of a sample of size n.
/// Valid when 2k < n, so at least one value survives trimming.
class TrimSpec {
public:
  TrimSpec(std::size_t k, std::size_t n);

  /// k = ceil(phi * n), for a trimming level phi in [0, 1/2).
  static TrimSpec from_level(double phi, std::size_t n);

  std::size_t k() const { return k_; }
  std::size_t n() const { return n_; }
  std::size_t kept() const { return n_ - 2 * k_; }

private:
  std::size_t k_;
  std::size_t n_;
};

class TruncationLevel {
public:
  explicit TruncationLevel(double m);
  double value() const { return m_; }

private:
  double m_;
};

/// Mean of the n - 2k middle order statistics.
///
/// Order statistics are taken by (value, index), so ties resolve
/// deterministically. Throws std::invalid_argument on a length mismatch or
/// non-finite input.
double trimmed_mean(std::span<const double> sample, TrimSpec spec);

/// Indices (ascending) of the values that survive k-trimming under the
/// (value, index) order. The plain mean over these indices equals
/// trimmed_mean(sample, spec) up to summation order.
std::vector<std::size_t> trimmed_indices(std::span<const double> sample, TrimSpec spec);

/// Clamp x to [-M, M].
double truncate(double x, TruncationLevel level);

/// #{i : |x_i| > M}.
std::size_t exceedance_count(std::span<const double> sample, TruncationLevel level);

/// Median of the means of num_blocks contiguous, balanced blocks. Even block
/// counts average the two middle block means.
double median_of_means(std::span<const double> sample, std::size_t num_blocks);

/// Block boundaries used by median_of_means: block b covers
/// [bounds[b], bounds[b + 1]).
std::vector<std::size_t> balanced_block_bounds(std::size_t n, std::size_t num_blocks);

/// Trimming level guaranteeing uniform deviation bounds for a sample of size
/// n with contamination eps at confidence 1 - alpha. Throws std::domain_error
/// when the level reaches 1/2.
double phi_uniform(std::size_t n, double eps, double alpha);

/// Columnwise trimmed mean of an n x d sample matrix.
Eigen::VectorXd uniform_trimmed_estimate(const Eigen::MatrixXd& samples, TrimSpec spec);

/// floor(x) and ceil(x) for nonnegative x, tolerant to rounding noise in
/// products such as eps * n (0.29 * 100 evaluates to 28.999999999999996).
std::size_t floor_count(double x);
std::size_t ceil_count(double x);

}  // namespace trimreg
