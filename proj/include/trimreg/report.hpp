#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trimreg/harness.hpp"

namespace trimreg {

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, divisor count - 1
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

struct SummaryRow {
  CellKey cell;
  Method method = Method::Ols;
  SummaryStats stats;
};

/// Type-7 (linear interpolation) quantile of an ascending sample.
double quantile_type7(std::span<const double> sorted, double q);

SummaryStats summarize_losses(std::span<const double> losses);

/// One row per (cell, method), in (cell, method) order.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

/// 100 (plugin - aasd) / aasd.
double delta_percent(double aasd, double plugin);

enum class OutputFormat { Csv, Json, Both };
OutputFormat parse_output_format(std::string_view text);

void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
void write_records_json(const std::vector<TrialRecord>& records, std::ostream& out);
void write_summary_json(const std::vector<SummaryRow>& rows, std::ostream& out);
std::vector<TrialRecord> read_records_json(std::istream& in);

/// Writes records.{csv,json} and summary.{csv,json} into dir (created if
/// missing). Throws std::runtime_error naming the path on I/O failure.
void emit(const std::vector<TrialRecord>& records, const std::vector<SummaryRow>& stats,
          const std::filesystem::path& dir, OutputFormat format);

/// Run provenance (config echo, initializer, oracle-baseline note) as JSON.
void write_metadata(const ExperimentConfig& config, const std::filesystem::path& path);

/// Formats a double with 17 significant digits ("inf" for +infinity).
std::string format_double(double v);

}  // namespace trimreg
