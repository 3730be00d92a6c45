#pragma once

// Monte Carlo experiment runner.
//
// A cell is one (setup, n, d, rho or p, eps, error distribution) choice. Each
// trial draws a clean dataset, contaminates it, and scores every requested
// method on that same contaminated dataset. Per-trial seeds are a hash of the
// cell and the trial index, so output does not depend on scheduling.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "trimreg/random.hpp"
#include "trimreg/regression.hpp"
#include "trimreg/synthdata.hpp"

namespace trimreg {

enum class Setup { A, B };
enum class Method { TmAasd, TmPlugIn, Ols, Mom, BestMom };
enum class InitRule { Zero, Ols };

std::string_view to_string(Setup setup);
std::string_view to_string(Method method);
std::string_view to_string(InitRule rule);
Setup parse_setup(std::string_view text);
Method parse_method(std::string_view text);
InitRule parse_init_rule(std::string_view text);

std::vector<double> default_eps_grid();

struct ExperimentConfig {
  Setup setup = Setup::A;
  std::size_t n = 120;
  std::size_t d = 20;
  double rho_or_p = 0.0;
  ErrorDist error = ErrorDist::normal();
  std::vector<double> eps_grid = default_eps_grid();
  std::vector<Method> methods = {Method::TmAasd, Method::TmPlugIn, Method::Ols, Method::BestMom};
  std::size_t trials = 240;
  std::uint64_t base_seed = 0;
  std::size_t trim_extra = 5;  // k = floor(eps n) + trim_extra
  GdConfig gd;
  int plugin_iters = 2;
  std::size_t mom_buckets = 0;                   // 0: smallest divisor of n >= 2 floor(eps n) + 1
  std::vector<std::size_t> best_mom_candidates;  // empty: all divisors of n
  InitRule init = InitRule::Zero;
  double outlier_response = kDefaultOutlierResponse;
  unsigned workers = 1;

  void validate() const;
};

struct CellKey {
  Setup setup = Setup::A;
  std::size_t n = 0;
  std::size_t d = 0;
  double rho_or_p = 0.0;
  double eps = 0.0;
  ErrorDist error = ErrorDist::normal();

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

bool cell_less(const CellKey& a, const CellKey& b);

struct TrialRecord {
  CellKey cell;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Method method = Method::Ols;
  double loss = 0.0;       // +inf marks a solver failure
  double wall_time = 0.0;  // seconds; not part of the emitted files
};

CellKey make_cell(const ExperimentConfig& config, double eps);

std::uint64_t trial_seed(const ExperimentConfig& config, double eps, std::size_t trial);

/// floor(eps n) + trim_extra.
std::size_t trim_count(const ExperimentConfig& config, double eps);

std::size_t auto_mom_buckets(std::size_t n, double eps);

/// Contaminated dataset for one trial, with beta_star and population
/// covariance attached.
Dataset make_trial_dataset(const ExperimentConfig& config, double eps, std::uint64_t seed);

/// Fit one method and return its estimate of beta*. Throws on solver failure.
Eigen::VectorXd run_method(Method method, const Dataset& data, const ExperimentConfig& config, double eps,
                           std::uint64_t seed);

std::vector<TrialRecord> run_cell(const ExperimentConfig& config, double eps);
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config);

/// Sort by (cell, method, trial).
void sort_records(std::vector<TrialRecord>& records);

}  // namespace trimreg
