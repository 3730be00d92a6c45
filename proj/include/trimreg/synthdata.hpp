#pragma once

// Seeded generators for the two synthetic regression designs and their
// adversarial contamination models.
//
// Setup A: Gaussian covariates with AR(1) correlation, normal or Student-t
// noise; contamination overwrites floor(eps*n) uniformly chosen rows with
// (beta*, 10000).
//
// Setup B: a missing-data caricature, X = B * X' / sqrt(p) with B ~ Ber(p);
// contamination zeroes as many nonzero rows as the budget floor(eps*n)
// allows, keeping each row's original noise draw.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "trimreg/random.hpp"

namespace trimreg {

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> beta_star;
  std::optional<Eigen::MatrixXd> pop_cov;
  /// Per-row noise draws xi_i, kept so contamination can rebuild responses.
  std::optional<Eigen::VectorXd> noise;

  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(X.cols()); }

  /// Throws std::invalid_argument if shapes disagree or entries are not finite.
  void validate() const;
};

class ErrorDist {
public:
  enum class Kind { Normal, StudentT };

  static ErrorDist normal() { return ErrorDist(Kind::Normal, 0); }
  static ErrorDist student_t(int nu);
  /// Accepts "normal", "t1", "t2", ... as printed by name().
  static ErrorDist parse(const std::string& text);

  Kind kind() const { return kind_; }
  int nu() const { return nu_; }
  std::string name() const;
  double sample(Engine& engine) const;

  friend bool operator==(const ErrorDist&, const ErrorDist&) = default;

private:
  ErrorDist(Kind kind, int nu) : kind_(kind), nu_(nu) {}
  Kind kind_;
  int nu_;
};

inline constexpr double kDefaultOutlierResponse = 10000.0;

/// Sigma(rho)_{ij} = rho^{|i-j|}.
Eigen::MatrixXd make_sigma(double rho, std::size_t d);

Dataset gen_setup_a(std::size_t n, std::size_t d, double rho, const ErrorDist& err,
                    const Eigen::VectorXd& beta_star, RngSeed rng);

/// Replaces floor(eps*n) uniformly chosen rows with (beta*, outlier_response).
Dataset contaminate_a(const Dataset& data, double eps, RngSeed rng,
                      double outlier_response = kDefaultOutlierResponse);

struct SetupBSample {
  Dataset data;
  std::vector<std::uint8_t> mask;
};

SetupBSample gen_setup_b(std::size_t n, std::size_t d, double p, const Eigen::VectorXd& beta_star,
                         RngSeed rng);

/// Zeroes min(floor(eps*n), #{mask = 1}) uniformly chosen rows with mask = 1;
/// their responses become the stored noise draws.
Dataset contaminate_b(const Dataset& data, std::span<const std::uint8_t> mask, double eps, RngSeed rng);

double sample_student_t(int nu, Engine& engine);
double sample_student_t(int nu, RngSeed rng);

/// Uniform size-m subset of {0..n-1}, ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Engine& engine);

/// Header x_1..x_d,y then one row per observation, 17 significant digits.
void write_csv(const Dataset& data, std::ostream& out);

}  // namespace trimreg
