#include "trimreg/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace trimreg {

namespace {

constexpr double kCountSlack = 1e-9;

void require_finite(std::span<const double> sample) {
  for (double v : sample) {
    if (!std::isfinite(v)) throw std::invalid_argument("sample contains a non-finite value");
  }
}

std::vector<std::size_t> order_by_value(std::span<const double> sample) {
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sample[a] != sample[b]) return sample[a] < sample[b];
    return a < b;
  });
  return order;
}

void check_spec(std::span<const double> sample, TrimSpec spec) {
  if (sample.size() != spec.n()) {
    throw std::invalid_argument("sample length " + std::to_string(sample.size()) +
                                " does not match trim spec n=" + std::to_string(spec.n()));
  }
  require_finite(sample);
}

}  // namespace

TrimSpec::TrimSpec(std::size_t k, std::size_t n) : k_(k), n_(n) {
  if (n == 0) throw std::invalid_argument("trim spec needs n >= 1");
  if (2 * k >= n) {
    throw std::invalid_argument("trim spec needs 2k < n (k=" + std::to_string(k) +
                                ", n=" + std::to_string(n) + ")");
  }
}

TrimSpec TrimSpec::from_level(double phi, std::size_t n) {
  if (!(phi >= 0.0) || !(phi < 0.5)) throw std::invalid_argument("trimming level must lie in [0, 1/2)");
  return TrimSpec(ceil_count(phi * static_cast<double>(n)), n);
}

TruncationLevel::TruncationLevel(double m) : m_(m) {
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("truncation level must be positive");
}

std::size_t floor_count(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("count argument must be nonnegative");
  return static_cast<std::size_t>(std::floor(x + kCountSlack * std::max(1.0, x)));
}

std::size_t ceil_count(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("count argument must be nonnegative");
  return static_cast<std::size_t>(std::ceil(x - kCountSlack * std::max(1.0, x)));
}

std::vector<std::size_t> trimmed_indices(std::span<const double> sample, TrimSpec spec) {
  check_spec(sample, spec);
  const auto order = order_by_value(sample);
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(spec.k()),
                                order.end() - static_cast<std::ptrdiff_t>(spec.k()));
  std::sort(kept.begin(), kept.end());
  return kept;
}

double trimmed_mean(std::span<const double> sample, TrimSpec spec) {
  check_spec(sample, spec);
  const auto order = order_by_value(sample);
  double sum = 0.0;
  for (std::size_t i = spec.k(); i < spec.n() - spec.k(); ++i) sum += sample[order[i]];
  return sum / static_cast<double>(spec.kept());
}

double truncate(double x, TruncationLevel level) {
  return std::clamp(x, -level.value(), level.value());
}

std::size_t exceedance_count(std::span<const double> sample, TruncationLevel level) {
  return static_cast<std::size_t>(std::count_if(
      sample.begin(), sample.end(), [&](double v) { return std::abs(v) > level.value(); }));
}

std::vector<std::size_t> balanced_block_bounds(std::size_t n, std::size_t num_blocks) {
  if (num_blocks < 1 || num_blocks > n) {
    throw std::invalid_argument("block count must lie in [1, n] (K=" + std::to_string(num_blocks) +
                                ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> bounds(num_blocks + 1);
  for (std::size_t b = 0; b <= num_blocks; ++b) bounds[b] = b * n / num_blocks;
  return bounds;
}

double median_of_means(std::span<const double> sample, std::size_t num_blocks) {
  require_finite(sample);
  const auto bounds = balanced_block_bounds(sample.size(), num_blocks);
  std::vector<double> means(num_blocks);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    double sum = 0.0;
    for (std::size_t i = bounds[b]; i < bounds[b + 1]; ++i) sum += sample[i];
    means[b] = sum / static_cast<double>(bounds[b + 1] - bounds[b]);
  }
  std::sort(means.begin(), means.end());
  const std::size_t mid = num_blocks / 2;
  if (num_blocks % 2 == 1) return means[mid];
  return 0.5 * (means[mid - 1] + means[mid]);
}

double phi_uniform(std::size_t n, double eps, double alpha) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in [0, 1/2)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double nd = static_cast<double>(n);
  const std::size_t contaminated = floor_count(eps * nd);
  const std::size_t confidence = ceil_count(std::log(2.0 / alpha));
  const std::size_t spread = ceil_count(std::min(0.5 - eps, eps) / 2.0 * nd);
  const double phi = static_cast<double>(contaminated + std::max(confidence, spread)) / nd;
  if (phi >= 0.5) {
    throw std::domain_error("phi >= 1/2: sample too small or contamination too high for the uniform guarantee");
  }
  return phi;
}

Eigen::VectorXd uniform_trimmed_estimate(const Eigen::MatrixXd& samples, TrimSpec spec) {
  if (static_cast<std::size_t>(samples.rows()) != spec.n()) {
    throw std::invalid_argument("sample matrix rows do not match trim spec n");
  }
  Eigen::VectorXd out(samples.cols());
  std::vector<double> column(spec.n());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) column[static_cast<std::size_t>(i)] = samples(i, j);
    out(j) = trimmed_mean(column, spec);
  }
  return out;
}

}  // namespace trimreg
