#include "trimreg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace trimreg {

namespace {

using nlohmann::ordered_json;

const char* kRecordsHeader = "setup,n,d,rho_or_p,eps,error_dist,method,trial,seed,loss\n";
const char* kSummaryHeader = "setup,n,d,rho_or_p,eps,error_dist,method,mean,std,min,q1,median,q3,max\n";

void write_cell_prefix(std::ostream& out, const CellKey& cell) {
  out << to_string(cell.setup) << ',' << cell.n << ',' << cell.d << ',' << format_double(cell.rho_or_p) << ','
      << format_double(cell.eps) << ',' << cell.error.name();
}

ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const ordered_json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

ordered_json cell_json(const CellKey& cell) {
  ordered_json j;
  j["setup"] = std::string(to_string(cell.setup));
  j["n"] = cell.n;
  j["d"] = cell.d;
  j["rho_or_p"] = cell.rho_or_p;
  j["eps"] = cell.eps;
  j["error_dist"] = cell.error.name();
  return j;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double quantile_type7(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize_losses(std::span<const double> losses) {
  if (losses.empty()) throw std::invalid_argument("cannot summarize an empty group");
  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end());

  SummaryStats s;
  s.count = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (!std::isfinite(s.mean)) {
    s.std = std::numeric_limits<double>::infinity();
  } else if (s.count > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.count - 1));
  }
  s.min = sorted.front();
  s.q1 = quantile_type7(sorted, 0.25);
  s.median = quantile_type7(sorted, 0.5);
  s.q3 = quantile_type7(sorted, 0.75);
  s.max = sorted.back();
  return s;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  std::vector<TrialRecord> sorted = records;
  sort_records(sorted);
  std::vector<SummaryRow> rows;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    std::vector<double> losses;
    while (j < sorted.size() && sorted[j].cell == sorted[i].cell && sorted[j].method == sorted[i].method) {
      losses.push_back(sorted[j].loss);
      ++j;
    }
    rows.push_back({sorted[i].cell, sorted[i].method, summarize_losses(losses)});
    i = j;
  }
  return rows;
}

double delta_percent(double aasd, double plugin) {
  if (aasd == 0.0) throw std::invalid_argument("delta_percent needs a nonzero reference");
  return 100.0 * (plugin - aasd) / aasd;
}

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  if (text == "both") return OutputFormat::Both;
  throw std::invalid_argument("unknown output format '" + std::string(text) + "' (expected csv, json or both)");
}

void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
  std::vector<TrialRecord> sorted = records;
  sort_records(sorted);
  out << kRecordsHeader;
  for (const auto& r : sorted) {
    write_cell_prefix(out, r.cell);
    out << ',' << to_string(r.method) << ',' << r.trial << ',' << r.seed << ',' << format_double(r.loss) << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << kSummaryHeader;
  for (const auto& row : rows) {
    const SummaryStats& s = row.stats;
    write_cell_prefix(out, row.cell);
    out << ',' << to_string(row.method);
    for (double v : {s.mean, s.std, s.min, s.q1, s.median, s.q3, s.max}) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_records_json(const std::vector<TrialRecord>& records, std::ostream& out) {
  std::vector<TrialRecord> sorted = records;
  sort_records(sorted);
  ordered_json arr = ordered_json::array();
  for (const auto& r : sorted) {
    ordered_json j = cell_json(r.cell);
    j["method"] = std::string(to_string(r.method));
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    j["loss"] = number_or_null(r.loss);
    arr.push_back(std::move(j));
  }
  out << arr.dump(1) << '\n';
}

void write_summary_json(const std::vector<SummaryRow>& rows, std::ostream& out) {
  ordered_json arr = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json j = cell_json(row.cell);
    j["method"] = std::string(to_string(row.method));
    j["count"] = row.stats.count;
    j["mean"] = number_or_null(row.stats.mean);
    j["std"] = number_or_null(row.stats.std);
    j["min"] = number_or_null(row.stats.min);
    j["q1"] = number_or_null(row.stats.q1);
    j["median"] = number_or_null(row.stats.median);
    j["q3"] = number_or_null(row.stats.q3);
    j["max"] = number_or_null(row.stats.max);
    arr.push_back(std::move(j));
  }
  out << arr.dump(1) << '\n';
}

std::vector<TrialRecord> read_records_json(std::istream& in) {
  const ordered_json arr = ordered_json::parse(in);
  if (!arr.is_array()) throw std::invalid_argument("records JSON must be an array");
  std::vector<TrialRecord> out;
  for (const auto& j : arr) {
    TrialRecord r;
    r.cell.setup = parse_setup(j.at("setup").get<std::string>());
    r.cell.n = j.at("n").get<std::size_t>();
    r.cell.d = j.at("d").get<std::size_t>();
    r.cell.rho_or_p = j.at("rho_or_p").get<double>();
    r.cell.eps = j.at("eps").get<double>();
    r.cell.error = ErrorDist::parse(j.at("error_dist").get<std::string>());
    r.method = parse_method(j.at("method").get<std::string>());
    r.trial = j.at("trial").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.loss = number_from(j.at("loss"));
    out.push_back(r);
  }
  return out;
}

void emit(const std::vector<TrialRecord>& records, const std::vector<SummaryRow>& stats,
          const std::filesystem::path& dir, OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  auto write = [](const std::filesystem::path& path, auto&& body) {
    std::ofstream out = open_for_write(path);
    body(out);
    finish(out, path);
  };
  if (format != OutputFormat::Json) {
    write(dir / "records.csv", [&](std::ostream& o) { write_records_csv(records, o); });
    write(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(stats, o); });
  }
  if (format != OutputFormat::Csv) {
    write(dir / "records.json", [&](std::ostream& o) { write_records_json(records, o); });
    write(dir / "summary.json", [&](std::ostream& o) { write_summary_json(stats, o); });
  }
}

void write_metadata(const ExperimentConfig& config, const std::filesystem::path& path) {
  ordered_json j;
  j["setup"] = std::string(to_string(config.setup));
  j["n"] = config.n;
  j["d"] = config.d;
  j[config.setup == Setup::A ? "rho" : "p"] = config.rho_or_p;
  j["error_dist"] = config.error.name();
  j["eps_grid"] = config.eps_grid;
  ordered_json methods = ordered_json::array();
  for (Method m : config.methods) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  j["trials"] = config.trials;
  j["base_seed"] = config.base_seed;
  j["beta_star"] = "ones";
  j["trim_rule"] = "k = floor(eps*n) + " + std::to_string(config.trim_extra);
  j["initializer"] = std::string(to_string(config.init));
  j["gd"] = {{"tol_delta", config.gd.tol_delta}, {"eta0", config.gd.eta0},      {"xi0", config.gd.xi0},
             {"theta", config.gd.theta},         {"max_iters", config.gd.max_iters},
             {"max_backtracks", config.gd.max_backtracks}};
  j["plugin_iters"] = config.plugin_iters;
  j["mom_buckets"] = config.mom_buckets == 0 ? ordered_json("auto: smallest divisor of n >= 2*floor(eps*n)+1")
                                             : ordered_json(config.mom_buckets);
  j["best_mom"] = "infeasible oracle baseline: bucket count chosen with knowledge of beta_star and Sigma";
  j["best_mom_candidates"] = config.best_mom_candidates.empty() ? ordered_json("divisors of n")
                                                                : ordered_json(config.best_mom_candidates);
  if (config.setup == Setup::A) j["outlier_response"] = config.outlier_response;
  j["loss"] = "sqrt((beta_hat - beta_star)' Sigma (beta_hat - beta_star)), population Sigma";

  std::ofstream out = open_for_write(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

}  // namespace trimreg
