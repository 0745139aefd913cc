#include "aircomp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace aircomp {

double OutcomeCounts::success_rate() const {
  const auto denom = classified();
  return denom == 0 ? 1.0 : static_cast<double>(succeeded) / static_cast<double>(denom);
}

OutcomeCounts& OutcomeCounts::operator+=(const OutcomeCounts& o) {
  created += o.created;
  succeeded += o.succeeded;
  failed_deadline += o.failed_deadline;
  failed_no_resource += o.failed_no_resource;
  censored += o.censored;
  return *this;
}

MetricsLedger::MetricsLedger(Seconds bucket_width, std::vector<std::string> town_names,
                             bool keep_records)
    : bucket_width_(bucket_width),
      town_names_(std::move(town_names)),
      keep_records_(keep_records),
      buckets_(town_names_.size()) {
  if (!(bucket_width > 0.0) || !std::isfinite(bucket_width)) {
    throw InvalidValue("metrics bucket must be > 0");
  }
}

void MetricsLedger::set_horizon(Seconds horizon) {
  horizon_buckets_ = static_cast<std::size_t>(std::ceil(horizon / bucket_width_));
}

std::size_t MetricsLedger::bucket_index(Seconds created_at) const {
  return static_cast<std::size_t>(std::floor(created_at / bucket_width_));
}

OutcomeCounts& MetricsLedger::slot(TownId town, Seconds created_at) {
  auto& series = buckets_.at(town.value);
  const auto idx = bucket_index(created_at);
  if (series.size() <= idx) series.resize(idx + 1);
  return series[idx];
}

void MetricsLedger::record(const Task& task) {
  auto& c = slot(task.town, task.created_at);
  ++c.created;
  switch (task.outcome) {
    case Outcome::Success: ++c.succeeded; break;
    case Outcome::FailedDeadline: ++c.failed_deadline; break;
    case Outcome::FailedNoResource: ++c.failed_no_resource; break;
    case Outcome::Pending: throw InvalidValue("cannot record a pending task");
  }
  if (keep_records_) {
    records_.push_back({task.id, task.town, task.created_at,
                        task.completed_at.value_or(task.created_at), task.outcome, false});
  }
}

void MetricsLedger::record_censored(const Task& task) {
  auto& c = slot(task.town, task.created_at);
  ++c.created;
  ++c.censored;
  if (keep_records_) {
    records_.push_back(
        {task.id, task.town, task.created_at, task.created_at, Outcome::Pending, true});
  }
}

void MetricsLedger::sample_uav_presence(Seconds at, std::vector<std::uint32_t> per_town) {
  presence_.push_back({at, std::move(per_town)});
}

std::size_t MetricsLedger::bucket_count() const {
  std::size_t n = horizon_buckets_;
  for (const auto& series : buckets_) n = std::max(n, series.size());
  return n;
}

OutcomeCounts MetricsLedger::bucket(TownId town, std::size_t index) const {
  const auto& series = buckets_.at(town.value);
  return index < series.size() ? series[index] : OutcomeCounts{};
}

namespace {

bool on_bucket_edge(Seconds t, Seconds width) {
  const double k = t / width;
  return std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, std::abs(k));
}

}  // namespace

OutcomeCounts MetricsLedger::totals(std::optional<TownId> town,
                                    std::optional<Interval> interval) const {
  OutcomeCounts sum;
  auto town_matches = [&](TownId t) { return !town || *town == t; };

  if (interval && keep_records_) {
    for (const auto& r : records_) {
      if (!town_matches(r.town) || r.created_at < interval->begin ||
          r.created_at >= interval->end) {
        continue;
      }
      ++sum.created;
      if (r.censored) {
        ++sum.censored;
        continue;
      }
      switch (r.outcome) {
        case Outcome::Success: ++sum.succeeded; break;
        case Outcome::FailedDeadline: ++sum.failed_deadline; break;
        case Outcome::FailedNoResource: ++sum.failed_no_resource; break;
        case Outcome::Pending: break;
      }
    }
    return sum;
  }

  std::size_t first = 0;
  std::size_t last = bucket_count();
  if (interval) {
    if (!on_bucket_edge(interval->begin, bucket_width_) ||
        !on_bucket_edge(interval->end, bucket_width_)) {
      throw InvalidValue("interval must be aligned to the metrics bucket width");
    }
    first = static_cast<std::size_t>(std::max(0.0, std::round(interval->begin / bucket_width_)));
    last = static_cast<std::size_t>(std::max(0.0, std::round(interval->end / bucket_width_)));
  }
  for (std::size_t t = 0; t < buckets_.size(); ++t) {
    if (!town_matches(TownId{static_cast<std::uint32_t>(t)})) continue;
    const auto& series = buckets_[t];
    for (std::size_t b = first; b < std::min(last, series.size()); ++b) sum += series[b];
  }
  return sum;
}

double success_rate(const MetricsLedger& ledger, std::optional<TownId> town,
                    std::optional<Interval> interval) {
  return ledger.totals(town, interval).success_rate();
}

std::string format_fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::vector<SummaryRow> summary_rows(const MetricsLedger& ledger, const RunLabel& label) {
  std::vector<SummaryRow> rows;
  if (ledger.town_count() == 0) return rows;
  for (std::size_t t = 0; t < ledger.town_count(); ++t) {
    rows.push_back({label.policy, label.uav_count, label.seed, ledger.town_names()[t],
                    success_rate(ledger, TownId{static_cast<std::uint32_t>(t)})});
  }
  rows.push_back({label.policy, label.uav_count, label.seed, "ALL", success_rate(ledger)});
  return rows;
}

std::string timeseries_csv(const MetricsLedger& ledger) {
  std::string out =
      "bucket_start,town,created,succeeded,success_rate,failed_deadline,failed_no_resource,"
      "censored\n";
  const auto n = ledger.bucket_count();
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t t = 0; t < ledger.town_count(); ++t) {
      const auto c = ledger.bucket(TownId{static_cast<std::uint32_t>(t)}, b);
      out += format_fixed6(static_cast<double>(b) * ledger.bucket_width());
      out += ',';
      out += ledger.town_names()[t];
      out += ',' + std::to_string(c.created);
      out += ',' + std::to_string(c.succeeded);
      out += ',' + format_fixed6(c.success_rate());
      out += ',' + std::to_string(c.failed_deadline);
      out += ',' + std::to_string(c.failed_no_resource);
      out += ',' + std::to_string(c.censored);
      out += '\n';
    }
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "policy,uav_count,seed,town,success_rate\n";
  for (const auto& r : rows) {
    out += r.policy + ',' + std::to_string(r.uav_count) + ',' + std::to_string(r.seed) + ',' +
           r.town + ',' + format_fixed6(r.success_rate) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "policy,uav_count,seed,town,success_rate") {
    throw IoError("summary.csv: unexpected header");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw IoError("summary.csv: malformed row '" + line + "'");
    try {
      rows.push_back({f[0], static_cast<std::uint32_t>(std::stoul(f[1])), std::stoull(f[2]),
                      f[3], std::stod(f[4])});
    } catch (const std::logic_error&) {
      throw IoError("summary.csv: malformed row '" + line + "'");
    }
  }
  return rows;
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_summary_csv(ss.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void export_csv(const MetricsLedger& ledger, const RunLabel& label,
                const std::filesystem::path& dir) {
  write_file_atomic(dir / "timeseries.csv", timeseries_csv(ledger));
  // summary.csv goes last: its presence marks a finished run.
  write_file_atomic(dir / "summary.csv", summary_csv(summary_rows(ledger, label)));
}

std::vector<ComparisonRow> compare_table(const std::vector<SummaryRow>& rows) {
  std::vector<std::string> town_order;
  for (const auto& r : rows) {
    if (r.town != "ALL" &&
        std::find(town_order.begin(), town_order.end(), r.town) == town_order.end()) {
      town_order.push_back(r.town);
    }
  }
  auto town_rank = [&](const std::string& town) {
    auto it = std::find(town_order.begin(), town_order.end(), town);
    return it == town_order.end() ? town_order.size() : std::size_t(it - town_order.begin());
  };

  using Key = std::tuple<std::string, std::uint32_t, std::size_t>;
  struct Acc {
    std::string town;
    double sum = 0.0;
    std::uint32_t n = 0;
  };
  std::map<Key, Acc> cells;
  for (const auto& r : rows) {
    auto& acc = cells[Key{r.policy, r.uav_count, town_rank(r.town)}];
    acc.town = r.town;
    acc.sum += r.success_rate;
    ++acc.n;
  }

  std::vector<ComparisonRow> out;
  out.reserve(cells.size());
  for (const auto& [key, acc] : cells) {
    out.push_back({std::get<0>(key), std::get<1>(key), acc.town, acc.n, acc.sum / acc.n});
  }
  return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "policy,uav_count,town,seeds,success_rate\n";
  for (const auto& r : rows) {
    out += r.policy + ',' + std::to_string(r.uav_count) + ',' + r.town + ',' +
           std::to_string(r.seeds) + ',' + format_fixed6(r.mean_success_rate) + '\n';
  }
  return out;
}

}  // namespace aircomp
