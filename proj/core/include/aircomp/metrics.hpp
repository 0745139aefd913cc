#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aircomp/domain.hpp"

namespace aircomp {

struct OutcomeCounts {
  std::uint64_t created = 0;
  std::uint64_t succeeded = 0;
  std::uint64_t failed_deadline = 0;
  std::uint64_t failed_no_resource = 0;
  /// Still in service at the end of the run with the budget not yet exceeded.
  std::uint64_t censored = 0;

  /// Tasks whose outcome is known.
  std::uint64_t classified() const { return created - censored; }
  /// succeeded / classified; 1.0 when nothing was classified.
  double success_rate() const;

  OutcomeCounts& operator+=(const OutcomeCounts& other);
  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

struct OutcomeRecord {
  TaskId task;
  TownId town;
  Seconds created_at = 0.0;
  Seconds completed_at = 0.0;  // equals created_at for censored records
  Outcome outcome = Outcome::Pending;
  bool censored = false;
};

/// Half-open interval [begin, end).
struct Interval {
  Seconds begin = 0.0;
  Seconds end = 0.0;
};

/// Per-town, time-bucketed record of task outcomes. Tasks are bucketed by
/// creation time.
class MetricsLedger {
 public:
  MetricsLedger() = default;
  MetricsLedger(Seconds bucket_width, std::vector<std::string> town_names,
                bool keep_records = false);

  void record(const Task& task);
  void record_censored(const Task& task);

  /// Extends the bucket range to cover [0, horizon) even if the tail is empty.
  void set_horizon(Seconds horizon);

  /// Number of stationed UAVs per town sampled at the start of a bucket.
  void sample_uav_presence(Seconds at, std::vector<std::uint32_t> per_town);

  Seconds bucket_width() const { return bucket_width_; }
  std::size_t town_count() const { return town_names_.size(); }
  const std::vector<std::string>& town_names() const { return town_names_; }
  std::size_t bucket_count() const;
  bool keeps_records() const { return keep_records_; }
  const std::vector<OutcomeRecord>& records() const { return records_; }

  /// Counts for one (town, bucket); zeros for buckets never touched.
  OutcomeCounts bucket(TownId town, std::size_t index) const;
  /// Counts over a town (or all towns) and an interval (or the whole run).
  /// Without per-task records the interval bounds must lie on bucket edges;
  /// otherwise InvalidValue is thrown.
  OutcomeCounts totals(std::optional<TownId> town = std::nullopt,
                       std::optional<Interval> interval = std::nullopt) const;

  struct PresenceSample {
    Seconds at = 0.0;
    std::vector<std::uint32_t> per_town;
  };
  const std::vector<PresenceSample>& uav_presence() const { return presence_; }

 private:
  std::size_t bucket_index(Seconds created_at) const;
  OutcomeCounts& slot(TownId town, Seconds created_at);

  Seconds bucket_width_ = 100.0;
  std::vector<std::string> town_names_;
  bool keep_records_ = false;
  std::size_t horizon_buckets_ = 0;
  std::vector<std::vector<OutcomeCounts>> buckets_;  // [town][bucket]
  std::vector<OutcomeRecord> records_;
  std::vector<PresenceSample> presence_;
};

/// succeeded / classified over matching tasks; 1.0 when none match.
double success_rate(const MetricsLedger& ledger, std::optional<TownId> town = std::nullopt,
                    std::optional<Interval> interval = std::nullopt);

struct RunLabel {
  std::string policy;
  std::uint32_t uav_count = 0;
  std::uint64_t seed = 0;
};

/// One line of summary.csv.
struct SummaryRow {
  std::string policy;
  std::uint32_t uav_count = 0;
  std::uint64_t seed = 0;
  std::string town;  // "ALL" for the pooled row
  double success_rate = 0.0;
};

/// Per-town rows in ledger order followed by the pooled ALL row; empty for a
/// ledger without towns.
std::vector<SummaryRow> summary_rows(const MetricsLedger& ledger, const RunLabel& label);

class IoError : public Error {
 public:
  using Error::Error;
};

/// Writes `dir/timeseries.csv` and `dir/summary.csv`, each atomically.
void export_csv(const MetricsLedger& ledger, const RunLabel& label,
                const std::filesystem::path& dir);

std::string timeseries_csv(const MetricsLedger& ledger);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(const std::string& text);
std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct ComparisonRow {
  std::string policy;
  std::uint32_t uav_count = 0;
  std::string town;
  std::uint32_t seeds = 0;
  double mean_success_rate = 0.0;
};

/// Mean success rate across seeds per (policy, uav_count, town). Output is
/// sorted by policy, uav_count, then town in first-seen order with ALL last.
std::vector<ComparisonRow> compare_table(const std::vector<SummaryRow>& rows);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

/// Fixed-point with 6 fractional digits and a '.' separator.
std::string format_fixed6(double value);

}  // namespace aircomp
