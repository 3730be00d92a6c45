#include "trimreg/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "trimreg/estimators.hpp"

namespace trimreg {

namespace {

class Gaussian {
public:
  explicit Gaussian(Engine& engine) : engine_(engine) {}
  double operator()() { return dist_(engine_); }

private:
  Engine& engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

double draw_student_t(int nu, Gaussian& gauss) {
  const double numerator = gauss();
  double chi2 = 0.0;
  for (int i = 0; i < nu; ++i) {
    const double z = gauss();
    chi2 += z * z;
  }
  return numerator / std::sqrt(chi2 / nu);
}

double draw_error(const ErrorDist& err, Gaussian& gauss) {
  if (err.kind() == ErrorDist::Kind::Normal) return gauss();
  return draw_student_t(err.nu(), gauss);
}

void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in [0, 1/2)");
}

void check_beta(const Eigen::VectorXd& beta_star, std::size_t d) {
  if (static_cast<std::size_t>(beta_star.size()) != d) {
    throw std::invalid_argument("beta_star length does not match d");
  }
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() != y.size()) throw std::invalid_argument("X and y row counts differ");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("dataset contains non-finite entries");
  if (beta_star && beta_star->size() != X.cols()) throw std::invalid_argument("beta_star has wrong length");
  if (pop_cov) {
    if (pop_cov->rows() != X.cols() || pop_cov->cols() != X.cols()) {
      throw std::invalid_argument("pop_cov has wrong shape");
    }
    if (!pop_cov->isApprox(pop_cov->transpose())) throw std::invalid_argument("pop_cov is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(*pop_cov, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
      throw std::invalid_argument("pop_cov is not positive semidefinite");
    }
  }
  if (noise && noise->size() != y.size()) throw std::invalid_argument("noise has wrong length");
}

ErrorDist ErrorDist::student_t(int nu) {
  if (nu < 1) throw std::invalid_argument("Student-t degrees of freedom must be >= 1");
  return ErrorDist(Kind::StudentT, nu);
}

ErrorDist ErrorDist::parse(const std::string& text) {
  if (text == "normal") return normal();
  if (text.size() >= 2 && text[0] == 't') {
    std::size_t used = 0;
    int nu = 0;
    try {
      nu = std::stoi(text.substr(1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == text.size() - 1) return student_t(nu);
  }
  throw std::invalid_argument("unknown error distribution '" + text + "' (expected normal or t<nu>)");
}

std::string ErrorDist::name() const {
  return kind_ == Kind::Normal ? std::string("normal") : "t" + std::to_string(nu_);
}

double ErrorDist::sample(Engine& engine) const {
  Gaussian gauss(engine);
  return draw_error(*this, gauss);
}

Eigen::MatrixXd make_sigma(double rho, std::size_t d) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  if (d == 0) throw std::invalid_argument("d must be positive");
  const auto dim = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd sigma(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return sigma;
}

Dataset gen_setup_a(std::size_t n, std::size_t d, double rho, const ErrorDist& err,
                    const Eigen::VectorXd& beta_star, RngSeed rng) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  Dataset data;
  data.pop_cov = make_sigma(rho, d);
  check_beta(beta_star, d);

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(d);
  data.X.resize(rows, cols);
  data.y.resize(rows);
  Eigen::VectorXd noise(rows);

  Engine engine = make_engine(rng);
  Gaussian gauss(engine);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index i = 0; i < rows; ++i) {
    // AR(1) recursion has covariance exactly rho^{|i-j|}.
    data.X(i, 0) = gauss();
    for (Eigen::Index j = 1; j < cols; ++j) data.X(i, j) = rho * data.X(i, j - 1) + innovation * gauss();
    noise(i) = draw_error(err, gauss);
  }
  data.y = data.X * beta_star + noise;
  data.beta_star = beta_star;
  data.noise = std::move(noise);
  return data;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Engine& engine) {
  if (m > n) throw std::invalid_argument("cannot draw more indices than available");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(engine)]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

Dataset contaminate_a(const Dataset& data, double eps, RngSeed rng, double outlier_response) {
  check_eps(eps);
  if (!data.beta_star) throw std::invalid_argument("Setup A contamination needs beta_star");
  Dataset out = data;
  const std::size_t count = floor_count(eps * static_cast<double>(data.n()));
  Engine engine = make_engine(rng);
  for (std::size_t i : sample_without_replacement(data.n(), count, engine)) {
    const auto row = static_cast<Eigen::Index>(i);
    out.X.row(row) = data.beta_star->transpose();
    out.y(row) = outlier_response;
  }
  return out;
}

SetupBSample gen_setup_b(std::size_t n, std::size_t d, double p, const Eigen::VectorXd& beta_star,
                         RngSeed rng) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
  if (n == 0 || d == 0) throw std::invalid_argument("n and d must be positive");
  check_beta(beta_star, d);

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(d);
  SetupBSample out;
  Dataset& data = out.data;
  data.X.resize(rows, cols);
  Eigen::VectorXd noise(rows);
  out.mask.resize(n);

  Engine engine = make_engine(rng);
  Gaussian gauss(engine);
  std::bernoulli_distribution coin(p);
  const double scale = 1.0 / std::sqrt(p);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const bool on = coin(engine);
    out.mask[static_cast<std::size_t>(i)] = on ? 1 : 0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double z = gauss();
      data.X(i, j) = on ? z * scale : 0.0;
    }
    noise(i) = gauss();
  }
  data.y = data.X * beta_star + noise;
  data.beta_star = beta_star;
  data.pop_cov = Eigen::MatrixXd::Identity(cols, cols);
  data.noise = std::move(noise);
  return out;
}

Dataset contaminate_b(const Dataset& data, std::span<const std::uint8_t> mask, double eps, RngSeed rng) {
  check_eps(eps);
  if (mask.size() != data.n()) throw std::invalid_argument("mask length does not match dataset");
  if (!data.noise) throw std::invalid_argument("Setup B contamination needs the stored noise draws");

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) eligible.push_back(i);
  }
  const std::size_t budget = floor_count(eps * static_cast<double>(data.n()));
  const std::size_t count = std::min(budget, eligible.size());

  Dataset out = data;
  Engine engine = make_engine(rng);
  for (std::size_t pick : sample_without_replacement(eligible.size(), count, engine)) {
    const auto row = static_cast<Eigen::Index>(eligible[pick]);
    out.X.row(row).setZero();
    out.y(row) = (*data.noise)(row);
  }
  return out;
}

double sample_student_t(int nu, Engine& engine) {
  if (nu < 1) throw std::invalid_argument("Student-t degrees of freedom must be >= 1");
  Gaussian gauss(engine);
  return draw_student_t(nu, gauss);
}

double sample_student_t(int nu, RngSeed rng) {
  Engine engine = make_engine(rng);
  return sample_student_t(nu, engine);
}

void write_csv(const Dataset& data, std::ostream& out) {
  char buf[64];
  for (std::size_t j = 0; j < data.d(); ++j) out << "x_" << (j + 1) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,", data.X(i, j));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g\n", data.y(i));
    out << buf;
  }
}

}  // namespace trimreg
