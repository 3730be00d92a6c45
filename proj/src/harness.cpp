#include "trimreg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

#include "trimreg/estimators.hpp"

namespace trimreg {

namespace {

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kContaminationStream = 2;
constexpr std::uint64_t kPartitionStream = 3;

struct Task {
  double eps;
  std::size_t trial;
};

std::vector<TrialRecord> run_trial(const ExperimentConfig& config, double eps, std::size_t trial) {
  const std::uint64_t seed = trial_seed(config, eps, trial);
  const CellKey cell = make_cell(config, eps);
  const Dataset data = make_trial_dataset(config, eps, seed);

  std::vector<TrialRecord> out;
  out.reserve(config.methods.size());
  for (Method method : config.methods) {
    TrialRecord rec{cell, trial, seed, method, std::numeric_limits<double>::infinity(), 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      const Eigen::VectorXd beta = run_method(method, data, config, eps, seed);
      const double loss = loss_l2(beta, *data.beta_star, *data.pop_cov);
      if (std::isfinite(loss)) rec.loss = loss;
    } catch (const std::exception&) {
      // Failures stay in the cell as +inf rows.
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(rec);
  }
  return out;
}

std::vector<TrialRecord> run_tasks(const ExperimentConfig& config, const std::vector<Task>& tasks) {
  std::vector<std::vector<TrialRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size() && !failed; i = next++) {
      try {
        results[i] = run_trial(config, tasks[i].eps, tasks[i].trial);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };

  const unsigned count = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(tasks.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<TrialRecord> records;
  for (auto& r : results) records.insert(records.end(), r.begin(), r.end());
  sort_records(records);
  return records;
}

}  // namespace

std::string_view to_string(Setup setup) { return setup == Setup::A ? "A" : "B"; }

std::string_view to_string(Method method) {
  switch (method) {
    case Method::TmAasd: return "TM-AASD";
    case Method::TmPlugIn: return "TM-PlugIn";
    case Method::Ols: return "OLS";
    case Method::Mom: return "MoM";
    case Method::BestMom: return "Best-MoM";
  }
  return "?";
}

std::string_view to_string(InitRule rule) { return rule == InitRule::Zero ? "zero" : "ols"; }

Setup parse_setup(std::string_view text) {
  if (text == "A") return Setup::A;
  if (text == "B") return Setup::B;
  throw std::invalid_argument("unknown setup '" + std::string(text) + "'");
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::TmAasd, Method::TmPlugIn, Method::Ols, Method::Mom, Method::BestMom}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(text) +
                              "' (expected TM-AASD, TM-PlugIn, OLS, MoM or Best-MoM)");
}

InitRule parse_init_rule(std::string_view text) {
  if (text == "zero") return InitRule::Zero;
  if (text == "ols") return InitRule::Ols;
  throw std::invalid_argument("unknown initializer '" + std::string(text) + "' (expected zero or ols)");
}

std::vector<double> default_eps_grid() { return {0.0, 0.025, 0.05, 0.075, 0.1, 0.2, 0.3, 0.4}; }

void ExperimentConfig::validate() const {
  if (n == 0 || d == 0) throw std::invalid_argument("n and d must be positive");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (eps_grid.empty()) throw std::invalid_argument("eps grid is empty");
  for (double eps : eps_grid) {
    if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("eps grid values must lie in [0, 1/2)");
  }
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  if (setup == Setup::A) {
    if (!(rho_or_p >= 0.0 && rho_or_p < 1.0)) throw std::invalid_argument("rho must lie in [0, 1)");
  } else {
    if (!(rho_or_p > 0.0 && rho_or_p <= 1.0)) throw std::invalid_argument("p must lie in (0, 1]");
    if (error.kind() != ErrorDist::Kind::Normal) throw std::invalid_argument("Setup B uses normal errors only");
  }
  if (plugin_iters < 1) throw std::invalid_argument("plugin_iters must be positive");
  if (mom_buckets > n) throw std::invalid_argument("mom_buckets exceeds n");
  for (std::size_t K : best_mom_candidates) {
    if (K < 1 || K > n) throw std::invalid_argument("Best-MoM candidate bucket counts must lie in [1, n]");
  }
  if (!std::isfinite(outlier_response)) throw std::invalid_argument("outlier response must be finite");
  gd.validate();
}

bool cell_less(const CellKey& a, const CellKey& b) {
  auto key = [](const CellKey& c) {
    return std::make_tuple(static_cast<int>(c.setup), c.n, c.d, c.rho_or_p, c.eps,
                           static_cast<int>(c.error.kind()), c.error.nu());
  };
  return key(a) < key(b);
}

CellKey make_cell(const ExperimentConfig& config, double eps) {
  return {config.setup, config.n, config.d, config.rho_or_p, eps, config.error};
}

std::uint64_t trial_seed(const ExperimentConfig& config, double eps, std::size_t trial) {
  std::uint64_t h = splitmix64(config.base_seed);
  h = hash_combine(h, static_cast<std::uint64_t>(config.setup));
  h = hash_combine(h, config.n);
  h = hash_combine(h, config.d);
  h = hash_combine(h, double_bits(config.rho_or_p));
  h = hash_combine(h, double_bits(eps));
  h = hash_combine(h, static_cast<std::uint64_t>(config.error.kind()));
  h = hash_combine(h, static_cast<std::uint64_t>(config.error.nu()));
  return hash_combine(h, trial);
}

std::size_t trim_count(const ExperimentConfig& config, double eps) {
  return floor_count(eps * static_cast<double>(config.n)) + config.trim_extra;
}

std::size_t auto_mom_buckets(std::size_t n, double eps) {
  const std::size_t target = 2 * floor_count(eps * static_cast<double>(n)) + 1;
  for (std::size_t K : divisors(n)) {
    if (K >= target) return K;
  }
  return n;
}

Dataset make_trial_dataset(const ExperimentConfig& config, double eps, std::uint64_t seed) {
  const RngSeed root{seed, 0};
  const Eigen::VectorXd beta_star = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(config.d));
  if (config.setup == Setup::A) {
    const Dataset clean =
        gen_setup_a(config.n, config.d, config.rho_or_p, config.error, beta_star, root.substream(kDataStream));
    return contaminate_a(clean, eps, root.substream(kContaminationStream), config.outlier_response);
  }
  const SetupBSample clean = gen_setup_b(config.n, config.d, config.rho_or_p, beta_star, root.substream(kDataStream));
  return contaminate_b(clean.data, clean.mask, eps, root.substream(kContaminationStream));
}

Eigen::VectorXd run_method(Method method, const Dataset& data, const ExperimentConfig& config, double eps,
                           std::uint64_t seed) {
  if (method == Method::Ols) return fit_least_squares(data.X, data.y);

  RegressorPair init = RegressorPair::zeros(data.d());
  if (config.init == InitRule::Ols) {
    const Eigen::VectorXd ols = fit_least_squares(data.X, data.y);
    init = {ols, ols};
  }
  const RngSeed partition_seed = RngSeed{seed, 0}.substream(kPartitionStream);

  switch (method) {
    case Method::TmAasd: return aasd(data, trim_count(config, eps), config.gd, init).beta_m;
    case Method::TmPlugIn: return plug_in(data, trim_count(config, eps), init, config.plugin_iters).beta_m;
    case Method::Mom: {
      const std::size_t K = config.mom_buckets != 0 ? config.mom_buckets : auto_mom_buckets(data.n(), eps);
      return mom_regression(data, K, config.gd, init, partition_seed).beta_m;
    }
    case Method::BestMom: {
      const std::vector<std::size_t> candidates =
          config.best_mom_candidates.empty() ? divisors(data.n()) : config.best_mom_candidates;
      return best_mom(data, candidates, config.gd, init, partition_seed, *data.beta_star, *data.pop_cov).pair.beta_m;
    }
    case Method::Ols: break;
  }
  return fit_least_squares(data.X, data.y);
}

std::vector<TrialRecord> run_cell(const ExperimentConfig& config, double eps) {
  config.validate();
  if (!(eps >= 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in [0, 1/2)");
  std::vector<Task> tasks;
  for (std::size_t t = 0; t < config.trials; ++t) tasks.push_back({eps, t});
  return run_tasks(config, tasks);
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<Task> tasks;
  for (double eps : config.eps_grid) {
    for (std::size_t t = 0; t < config.trials; ++t) tasks.push_back({eps, t});
  }
  return run_tasks(config, tasks);
}

void sort_records(std::vector<TrialRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    if (cell_less(a.cell, b.cell)) return true;
    if (cell_less(b.cell, a.cell)) return false;
    if (a.method != b.method) return a.method < b.method;
    return a.trial < b.trial;
  });
}

}  // namespace trimreg
