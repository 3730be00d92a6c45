// trimreg: Monte Carlo runner and bound calculator for trimmed-mean regression.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trimreg/bounds.hpp"
#include "trimreg/estimators.hpp"
#include "trimreg/harness.hpp"
#include "trimreg/report.hpp"

namespace fs = std::filesystem;
using namespace trimreg;

namespace {

struct RunOptions {
  std::size_t n = 120;
  std::size_t d = 20;
  double rho_or_p = 0.0;
  std::string error = "normal";
  std::vector<double> eps_grid = default_eps_grid();
  std::vector<std::string> methods = {"TM-AASD", "TM-PlugIn", "OLS", "Best-MoM"};
  std::size_t trials = 240;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string format = "both";
  unsigned threads = 0;
  std::string init = "zero";
  std::size_t trim_extra = 5;
  int max_iters = 1000;
  double tol = 1e-4;
  int plugin_iters = 2;
  std::size_t mom_buckets = 0;
  std::vector<std::size_t> best_mom_ks;
  double outlier_value = kDefaultOutlierResponse;
};

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

void add_common(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--n", o.n, "Sample size")->capture_default_str();
  cmd->add_option("--d", o.d, "Covariate dimension")->capture_default_str();
  cmd->add_option("--eps-grid", o.eps_grid, "Contamination levels in [0, 1/2)")->delimiter(',')->capture_default_str();
  cmd->add_option("--methods", o.methods, "Subset of TM-AASD, TM-PlugIn, OLS, MoM, Best-MoM")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--trials", o.trials, "Trials per cell")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--format", o.format, "csv, json or both")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0: all cores); output does not depend on it");
  cmd->add_option("--init", o.init, "Initial iterate pair: zero or ols")->capture_default_str();
  cmd->add_option("--trim-extra", o.trim_extra, "k = floor(eps n) + trim-extra")->capture_default_str();
  cmd->add_option("--max-iters", o.max_iters, "AASD / MoM iteration cap")->capture_default_str();
  cmd->add_option("--tol", o.tol, "AASD / MoM stopping tolerance on iterate movement")->capture_default_str();
  cmd->add_option("--plugin-iters", o.plugin_iters, "Plug-in refit rounds")->capture_default_str();
  cmd->add_option("--mom-buckets", o.mom_buckets, "MoM bucket count (0: smallest divisor of n >= 2 floor(eps n) + 1)")
      ->capture_default_str();
  cmd->add_option("--best-mom-ks", o.best_mom_ks, "Best-MoM candidate bucket counts (default: divisors of n)")
      ->delimiter(',');
  cmd->add_option("--config", "File of 'key = value' lines, keys named like the flags; explicit flags win");
}

ExperimentConfig to_config(const RunOptions& o, Setup setup) {
  ExperimentConfig c;
  c.setup = setup;
  c.n = o.n;
  c.d = o.d;
  c.rho_or_p = o.rho_or_p;
  c.error = ErrorDist::parse(o.error);
  c.eps_grid = o.eps_grid;
  c.methods.clear();
  for (const auto& m : o.methods) c.methods.push_back(parse_method(m));
  c.trials = o.trials;
  c.base_seed = o.seed;
  c.trim_extra = o.trim_extra;
  c.gd.max_iters = o.max_iters;
  c.gd.tol_delta = o.tol;
  c.plugin_iters = o.plugin_iters;
  c.mom_buckets = o.mom_buckets;
  c.best_mom_candidates = o.best_mom_ks;
  c.init = parse_init_rule(o.init);
  c.outlier_response = o.outlier_value;
  c.workers = o.threads == 0 ? default_threads() : o.threads;
  c.validate();
  return c;
}

void run_and_emit(const ExperimentConfig& config, const fs::path& out, OutputFormat format) {
  const auto records = run_experiment(config);
  const auto stats = summarize(records);
  emit(records, stats, out, format);
  write_metadata(config, out / "metadata.json");
  for (const auto& row : stats) {
    std::printf("%s n=%zu eps=%-6g %-6s %-10s mean=%-10.4g median=%-10.4g std=%.4g\n",
                std::string(to_string(row.cell.setup)).c_str(), row.cell.n, row.cell.eps,
                row.cell.error.name().c_str(), std::string(to_string(row.method)).c_str(), row.stats.mean,
                row.stats.median, row.stats.std);
  }
  std::printf("wrote %s\n", out.string().c_str());
}

struct CompareOptions {
  std::size_t d = 20;
  double rho = 0.0;
  std::size_t trials = 240;
  std::uint64_t seed = 0;
  std::string out = "compare";
  std::string format = "both";
  unsigned threads = 0;
  std::string init = "zero";
  int max_iters = 1000;
  int plugin_iters = 2;
};

void rewrite_compare_grid(const fs::path& path) {
  nlohmann::ordered_json j;
  {
    std::ifstream in(path);
    j = nlohmann::ordered_json::parse(in);
  }
  j["n"] = {120, 360};
  j["error_dist"] = {"normal", "t1", "t2", "t4"};
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void run_compare(const CompareOptions& o) {
  const fs::path out(o.out);
  std::vector<TrialRecord> all;
  ExperimentConfig base;
  base.d = o.d;
  base.rho_or_p = o.rho;
  base.eps_grid = {0.05, 0.2};
  base.methods = {Method::TmAasd, Method::TmPlugIn};
  base.trials = o.trials;
  base.base_seed = o.seed;
  base.init = parse_init_rule(o.init);
  base.gd.max_iters = o.max_iters;
  base.plugin_iters = o.plugin_iters;
  base.workers = o.threads == 0 ? default_threads() : o.threads;
  for (std::size_t n : {120u, 360u}) {
    for (const char* err : {"normal", "t1", "t2", "t4"}) {
      ExperimentConfig c = base;
      c.n = n;
      c.error = ErrorDist::parse(err);
      c.validate();
      const auto recs = run_experiment(c);
      all.insert(all.end(), recs.begin(), recs.end());
    }
  }
  sort_records(all);
  const auto stats = summarize(all);
  emit(all, stats, out, parse_output_format(o.format));
  write_metadata(base, out / "metadata.json");
  rewrite_compare_grid(out / "metadata.json");

  std::ofstream table(out / "table.csv", std::ios::binary);
  if (!table) throw std::runtime_error("cannot open '" + (out / "table.csv").string() + "' for writing");
  table << "n,eps,error_dist,aasd_mean,aasd_std,plugin_mean,plugin_std,delta_mean_pct,delta_std_pct\n";
  std::printf("%5s %6s %-6s %10s %10s %10s %10s %8s %8s\n", "n", "eps", "error", "aasd_mean", "aasd_std",
              "plug_mean", "plug_std", "d_mean%", "d_std%");
  for (std::size_t i = 0; i + 1 < stats.size(); i += 2) {
    const SummaryRow& a = stats[i];
    const SummaryRow& p = stats[i + 1];
    const double dm = delta_percent(a.stats.mean, p.stats.mean);
    const double ds = delta_percent(a.stats.std, p.stats.std);
    table << a.cell.n << ',' << format_double(a.cell.eps) << ',' << a.cell.error.name() << ','
          << format_double(a.stats.mean) << ',' << format_double(a.stats.std) << ',' << format_double(p.stats.mean)
          << ',' << format_double(p.stats.std) << ',' << format_double(dm) << ',' << format_double(ds) << '\n';
    std::printf("%5zu %6g %-6s %10.4g %10.4g %10.4g %10.4g %8.1f %8.1f\n", a.cell.n, a.cell.eps,
                a.cell.error.name().c_str(), a.stats.mean, a.stats.std, p.stats.mean, p.stats.std, dm, ds);
  }
  if (!table.flush()) throw std::runtime_error("write to table.csv failed");
}

struct BoundsOptions {
  std::string out = "bounds";
  std::vector<double> eps_grid;
  std::size_t families = 1;
  std::vector<std::size_t> n_grid = {100, 200, 500, 1000, 2000, 5000, 10000};
  double eps = 0.05;
  double alpha = 0.05;
  double emp = 0.0;
  std::vector<std::string> nu = {"2:1"};
  std::vector<std::string> kappa = {"2:1"};
  double theta0 = 1.0;
  double r_q = 0.0;
  double r_m = 0.0;
  double trace_sigma = 0.0;
  double sigma_noise = 1.0;
};

MomentProfile parse_profile(const std::vector<std::string>& items, const char* what) {
  std::vector<std::pair<double, double>> entries;
  for (const auto& item : items) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument(std::string(what) + " entries must look like p:value, got '" + item + "'");
    }
    entries.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  return MomentProfile(std::move(entries));
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void run_bounds(const BoundsOptions& o) {
  const MomentProfile nu = parse_profile(o.nu, "--nu");
  const MomentProfile kappa = parse_profile(o.kappa, "--kappa");
  const fs::path out(o.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out.string() + "': " + ec.message());

  std::vector<double> grid = o.eps_grid;
  if (grid.empty()) {
    for (int i = 1; i < 100; ++i) grid.push_back(0.005 * i);
  }

  auto ce = open_csv(out / "c_epsilon.csv");
  ce << "eps,c_epsilon\n";
  for (double eps : grid) ce << format_double(eps) << ',' << format_double(c_epsilon(eps)) << '\n';

  auto cj = open_csv(out / "c_j_epsilon.csv");
  cj << "eps,c_j_epsilon\n";
  for (const CurvePoint& p : c_j_epsilon_curve(grid, o.families)) {
    cj << format_double(p.eps) << ',' << format_double(p.value) << '\n';
  }

  UniformBoundInputs u;
  u.emp = o.emp;
  u.nu = nu;
  u.eps = o.eps;
  u.alpha = o.alpha;
  RegressionBoundInputs r;
  r.theta0 = o.theta0;
  r.kappa = kappa;
  r.eps = o.eps;
  r.alpha = o.alpha;
  const RegressionDeltas deltas = regression_deltas(o.theta0);

  auto pp = open_csv(out / "phi_p.csv");
  pp << "n,eps,phi_uniform,phi_regression,side_condition,r_q,r_m,phi_p_uniform,phi_p_regression,excess_risk\n";
  for (std::size_t n : o.n_grid) {
    u.n = r.n = n;
    r.r_q = o.r_q;
    r.r_m = o.r_m;
    if (o.trace_sigma > 0.0) {
      const LinearCriticalRadii radii = critical_radii_linear(o.trace_sigma, o.sigma_noise, n, deltas.delta_q, deltas.delta_m);
      r.r_q = radii.r_q_zero ? 0.0 : std::numeric_limits<double>::infinity();
      r.r_m = radii.r_m_bound;
    }
    double phi_u = std::numeric_limits<double>::quiet_NaN();
    try {
      phi_u = phi_uniform(n, o.eps, o.alpha);
    } catch (const std::domain_error&) {
    }
    const RegressionLevel lvl = phi_regression(n, o.eps, o.alpha, o.theta0);
    const double phi_reg = std::isinf(r.r_q) ? r.r_q : phi_p_regression(r);
    pp << n << ',' << format_double(o.eps) << ',' << format_double(phi_u) << ',' << format_double(lvl.phi) << ','
       << (lvl.side_condition_holds ? 1 : 0) << ',' << format_double(r.r_q) << ',' << format_double(r.r_m) << ','
       << format_double(phi_p_uniform(u)) << ',' << format_double(phi_reg) << ','
       << format_double(std::isinf(phi_reg) ? phi_reg : excess_risk_bound(phi_reg, o.theta0)) << '\n';
  }
  std::printf("wrote %s\n", out.string().c_str());
}

// Splices the entries of a --config file into the argument list as flags.
// Flags already present on the command line are not overridden.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    if (name == "config") {
      if (eq != std::string::npos) {
        path = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    } else {
      given.insert(name);
    }
  }
  if (path.empty()) return args;

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::FileError&) {
    throw std::invalid_argument("cannot read config file '" + path + "'");
  }
  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (item.name.empty() || item.name == "++" || item.name == "--" || !item.parents.empty() || given.count(item.name)) {
      continue;
    }
    extra.push_back("--" + item.name);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trimmed-mean robust regression: Monte Carlo experiments and bound formulas"};
  app.require_subcommand(1);

  RunOptions a_opts;
  auto* setup_a = app.add_subcommand("run-setup-a", "Gaussian AR(1) design, (beta*, 10000) outliers");
  add_common(setup_a, a_opts);
  setup_a->add_option("--rho", a_opts.rho_or_p, "AR(1) correlation in [0, 1)")->capture_default_str();
  setup_a->add_option("--error", a_opts.error, "Noise: normal, t1, t2 or t4")->capture_default_str();
  setup_a->add_option("--outlier-value", a_opts.outlier_value, "Response of contaminated rows")->capture_default_str();

  RunOptions b_opts;
  b_opts.n = 1000;
  b_opts.rho_or_p = 0.3;
  auto* setup_b = app.add_subcommand("run-setup-b", "Missing-data design X = B X' / sqrt(p), normal noise");
  add_common(setup_b, b_opts);
  setup_b->add_option("--p", b_opts.rho_or_p, "Bernoulli rate in (0, 1]")->capture_default_str();

  CompareOptions c_opts;
  auto* compare = app.add_subcommand(
      "compare-algs", "TM-AASD vs TM-PlugIn over n in {120, 360}, eps in {0.05, 0.2}, errors normal/t1/t2/t4");
  compare->add_option("--d", c_opts.d, "Covariate dimension")->capture_default_str();
  compare->add_option("--rho", c_opts.rho, "AR(1) correlation")->capture_default_str();
  compare->add_option("--trials", c_opts.trials, "Trials per cell")->capture_default_str();
  compare->add_option("--seed", c_opts.seed, "Base seed")->capture_default_str();
  compare->add_option("--out", c_opts.out, "Output directory; table.csv holds the comparison")->capture_default_str();
  compare->add_option("--format", c_opts.format, "csv, json or both")->capture_default_str();
  compare->add_option("--threads", c_opts.threads, "Worker threads (0: all cores)");
  compare->add_option("--init", c_opts.init, "zero or ols")->capture_default_str();
  compare->add_option("--max-iters", c_opts.max_iters, "AASD iteration cap")->capture_default_str();
  compare->add_option("--plugin-iters", c_opts.plugin_iters, "Plug-in refit rounds")->capture_default_str();
  compare->add_option("--config", "File of 'key = value' lines, keys named like the flags; explicit flags win");

  BoundsOptions bo;
  auto* bounds = app.add_subcommand("bounds", "Emit bound-formula curves as CSV");
  bounds->footer(
      "Files written to --out:\n"
      "  c_epsilon.csv    eps,c_epsilon\n"
      "  c_j_epsilon.csv  eps,c_j_epsilon   (eps_bar = min(eps, 1/2 - eps)/(1 + families), t_j equal)\n"
      "  phi_p.csv        n,eps,phi_uniform,phi_regression,side_condition,r_q,r_m,\n"
      "                   phi_p_uniform,phi_p_regression,excess_risk\n"
      "phi_uniform is nan where the level reaches 1/2. With --trace-sigma the radii come from the\n"
      "linear closed forms at delta_q = 1/(32 theta0), delta_m = 1/(448 theta0^2); r_q = inf when\n"
      "n < tr(Sigma)/delta_q^2.");
  bounds->add_option("--out", bo.out, "Output directory")->capture_default_str();
  bounds->add_option("--eps-grid", bo.eps_grid, "eps values in (0, 1/2) for the constant curves (default 0.005 step)")
      ->delimiter(',');
  bounds->add_option("--families", bo.families, "Number of function families m")->capture_default_str();
  bounds->add_option("--n-grid", bo.n_grid, "Sample sizes for phi_p.csv")->delimiter(',')->capture_default_str();
  bounds->add_option("--eps", bo.eps, "Contamination level for phi_p.csv")->capture_default_str();
  bounds->add_option("--alpha", bo.alpha, "Confidence parameter")->capture_default_str();
  bounds->add_option("--emp", bo.emp, "Expected sup of the empirical process")->capture_default_str();
  bounds->add_option("--nu", bo.nu, "Moment grid p:value for the uniform bound")->delimiter(',')->capture_default_str();
  bounds->add_option("--kappa", bo.kappa, "Moment grid p:value for the regression bound")
      ->delimiter(',')
      ->capture_default_str();
  bounds->add_option("--theta0", bo.theta0, "L2/L1 ratio, >= 1")->capture_default_str();
  bounds->add_option("--r-q", bo.r_q, "Quadratic critical radius")->capture_default_str();
  bounds->add_option("--r-m", bo.r_m, "Multiplier critical radius")->capture_default_str();
  bounds->add_option("--trace-sigma", bo.trace_sigma, "tr(Sigma) for linear closed-form radii (0: use --r-q/--r-m)");
  bounds->add_option("--sigma-noise", bo.sigma_noise, "Noise standard deviation for the linear r_m bound")
      ->capture_default_str();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*setup_a) {
      run_and_emit(to_config(a_opts, Setup::A), a_opts.out, parse_output_format(a_opts.format));
    } else if (*setup_b) {
      run_and_emit(to_config(b_opts, Setup::B), b_opts.out, parse_output_format(b_opts.format));
    } else if (*compare) {
      run_compare(c_opts);
    } else if (*bounds) {
      run_bounds(bo);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
