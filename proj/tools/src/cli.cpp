#include "aircomp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "aircomp/engine.hpp"

namespace aircomp::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidValue(what + ": '" + text + "' is not a non-negative integer");
  }
  try {
    return std::stoull(text);
  } catch (const std::out_of_range&) {
    throw InvalidValue(what + ": '" + text + "' is out of range");
  }
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw InvalidValue(what + ": '" + text + "' is not a number");
  return v;
}

bool is_policy_key(const std::string& key) { return key.rfind("policy.", 0) == 0; }

fs::path resolve_out_dir(const fs::path& requested) {
  if (!requested.empty()) return requested;
  if (const char* env = std::getenv("AIRCOMP_OUT"); env && *env) return env;
  return "aircomp-out";
}

// Phase boundaries: 0, each distinct event time inside the run, duration.
std::vector<Interval> report_intervals(const Scenario& s) {
  std::set<Seconds> cuts{0.0, s.sim.duration};
  for (const auto& e : s.events) {
    if (e.at > 0.0 && e.at < s.sim.duration) cuts.insert(e.at);
  }
  std::vector<Seconds> edges(cuts.begin(), cuts.end());
  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) out.push_back({edges[i], edges[i + 1]});
  if (edges.size() > 2) out.push_back({edges[1], s.sim.duration});

  const double w = s.sim.metrics_bucket;
  auto aligned = [w](Seconds t) { return std::fmod(t, w) == 0.0; };
  std::erase_if(out, [&](const Interval& iv) { return !aligned(iv.begin) || !aligned(iv.end); });
  return out;
}

std::string format_seconds(Seconds t) {
  std::ostringstream ss;
  ss << t;
  return ss.str();
}

std::string run_report(const Scenario& s, const CellResult& r) {
  std::ostringstream out;
  out << "policy=" << r.label.policy << " uavs=" << r.label.uav_count << " seed=" << r.label.seed
      << " overall=" << format_fixed6(success_rate(r.ledger)) << '\n';
  const auto intervals = report_intervals(s);
  for (std::uint32_t t = 0; t < r.ledger.town_count(); ++t) {
    out << "  " << r.ledger.town_names()[t];
    for (const auto& iv : intervals) {
      out << " [" << format_seconds(iv.begin) << ',' << format_seconds(iv.end)
          << ")=" << format_fixed6(success_rate(r.ledger, TownId{t}, iv));
    }
    out << '\n';
  }
  return out.str();
}

struct Cell {
  std::string policy;
  std::uint32_t uav_count = 0;
  std::uint64_t seed = 0;
};

struct CellOutcome {
  std::vector<SummaryRow> rows;
  std::string report;
  std::string error;
  int code = kOk;
  bool skipped = false;
};

int code_for(const std::exception_ptr& e, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const IoError& ex) {
    message = ex.what();
    return kIoFailure;
  } catch (const fs::filesystem_error& ex) {
    message = ex.what();
    return kIoFailure;
  } catch (const Error& ex) {
    message = ex.what();
    return kUsage;
  } catch (const std::exception& ex) {
    message = ex.what();
    return kIoFailure;
  }
}

std::optional<std::vector<SummaryRow>> completed_rows(const fs::path& dir, const RunLabel& label) {
  if (!fs::exists(dir / "summary.csv") || !fs::exists(dir / "timeseries.csv")) return std::nullopt;
  try {
    auto rows = read_summary_csv(dir / "summary.csv");
    if (rows.empty()) return std::nullopt;
    for (const auto& r : rows) {
      if (r.policy != label.policy || r.uav_count != label.uav_count || r.seed != label.seed) {
        return std::nullopt;
      }
    }
    return rows;
  } catch (const Error&) {
    return std::nullopt;
  }
}

// Runs every cell (up to `jobs` at once) and returns outcomes in cell order.
std::vector<CellOutcome> execute(const Scenario& base, const std::vector<Cell>& cells,
                                 const std::map<std::string, DeploymentPolicy>& policies,
                                 const fs::path& out_dir, unsigned jobs, bool resume,
                                 bool with_report) {
  std::vector<CellOutcome> results(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      auto& res = results[i];
      const RunLabel label{c.policy, c.uav_count, c.seed};
      const auto dir = cell_dir(out_dir, label);
      try {
        if (resume) {
          if (auto rows = completed_rows(dir, label)) {
            res.rows = std::move(*rows);
            res.skipped = true;
            continue;
          }
        }
        auto r = run_cell(base, policies.at(c.policy), c.uav_count, c.seed);
        export_csv(r.ledger, r.label, dir);
        // Round-trip through the CSV text so fresh and resumed cells agree.
        res.rows = parse_summary_csv(summary_csv(summary_rows(r.ledger, r.label)));
        if (with_report) res.report = run_report(base, r);
      } catch (...) {
        res.code = code_for(std::current_exception(), res.error);
      }
    }
  };

  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

std::vector<std::uint32_t> to_u32(const std::vector<std::uint64_t>& values, const char* what) {
  std::vector<std::uint32_t> out;
  for (auto v : values) {
    if (v > UINT32_MAX) throw InvalidValue(std::string(what) + " out of range");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (...) {
    std::string message;
    const int code = code_for(std::current_exception(), message);
    err << "error: " << message << '\n';
    return code;
  }
}

}  // namespace

std::vector<std::uint64_t> parse_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_uint(text.substr(0, dots), "range start");
    const auto hi = parse_uint(text.substr(dots + 2), "range end");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_uint(item, "list item"));
  return out;
}

std::pair<std::string, std::string> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidValue("override '" + text + "' is not of the form key=value");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

Scenario resolve_scenario(const RunSpec& spec) {
  Scenario s;
  if (spec.scenario == kBuiltinEarthquake) {
    s = build_default_earthquake(spec.users_per_town.value_or(1000));
  } else {
    if (spec.users_per_town) {
      throw InvalidValue("--users-per-town applies only to " + std::string(kBuiltinEarthquake));
    }
    const fs::path path = spec.scenario;
    if (!fs::is_regular_file(path)) throw IoError("cannot read scenario file " + path.string());
    s = load_scenario(path);
  }
  std::vector<std::pair<std::string, std::string>> scenario_keys;
  for (const auto& kv : spec.overrides) {
    if (!is_policy_key(kv.first)) scenario_keys.push_back(kv);
  }
  if (!scenario_keys.empty()) s = apply_overrides(s, scenario_keys);
  return s;
}

DeploymentPolicy resolve_policy(const std::string& name,
                                const std::vector<std::pair<std::string, std::string>>& overrides) {
  auto parsed = parse_policy(name);
  if (!parsed) {
    std::string valid;
    for (const auto& n : policy_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw InvalidValue("unknown policy '" + name + "' (valid policies: " + valid + ")");
  }
  auto p = *parsed;
  for (const auto& [key, value] : overrides) {
    if (!is_policy_key(key)) continue;
    if (key == "policy.decrement") {
      const double d = parse_double(value, key);
      if (auto* lb = std::get_if<policy::LoadBalancing>(&p.variant)) lb->decrement = d;
    } else if (key == "policy.kmeans_iters") {
      const auto n = parse_uint(value, key);
      if (auto* em = std::get_if<policy::Emergency>(&p.variant)) {
        em->kmeans_iters = static_cast<std::uint32_t>(n);
      }
    } else if (key == "policy.k_override") {
      const auto n = parse_uint(value, key);
      if (auto* em = std::get_if<policy::Emergency>(&p.variant)) {
        em->k_override = static_cast<std::uint32_t>(n);
      }
    } else {
      throw InvalidValue("unknown override key '" + key +
                         "' (policy keys: policy.decrement, policy.kmeans_iters, "
                         "policy.k_override)");
    }
  }
  p.validate();
  return p;
}

CellResult run_cell(const Scenario& base, const DeploymentPolicy& policy, std::uint32_t uav_count,
                    std::uint64_t seed) {
  Scenario s = base;
  s.uavs.count = uav_count;
  s.sim.rng_seed = seed;
  Simulation sim(build_world(s), s.sim, policy);
  CellResult r;
  r.label = {policy.name(), uav_count, seed};
  r.ledger = sim.run();
  r.trace_hash = sim.trace_hash();
  return r;
}

fs::path cell_dir(const fs::path& out_dir, const RunLabel& label) {
  return out_dir / label.policy / std::to_string(label.uav_count) / std::to_string(label.seed);
}

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (spec.policies.size() != 1) throw InvalidValue("run takes exactly one --policy");
    if (spec.seeds.empty()) throw InvalidValue("no seeds given");
    if (spec.uav_counts.size() > 1) throw InvalidValue("run takes a single --uavs value");
    const auto scenario = resolve_scenario(spec);
    const auto policy = resolve_policy(spec.policies.front(), spec.overrides);
    const std::uint32_t uavs = spec.uav_counts.empty() ? scenario.uavs.count : spec.uav_counts[0];

    std::vector<Cell> cells;
    for (auto seed : spec.seeds) cells.push_back({policy.name(), uavs, seed});
    const auto results = execute(scenario, cells, {{policy.name(), policy}},
                                 resolve_out_dir(spec.out_dir), spec.jobs, spec.resume, true);
    int code = kOk;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      if (r.code != kOk) {
        err << "error: seed " << cells[i].seed << ": " << r.error << '\n';
        code = std::max(code, r.code);
      } else if (r.skipped) {
        out << "policy=" << cells[i].policy << " uavs=" << uavs << " seed=" << cells[i].seed
            << " skipped (already complete)\n";
      } else {
        out << r.report;
      }
    }
    return code;
  });
}

int cmd_sweep(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (spec.uav_counts.empty()) throw InvalidValue("empty UAV range");
    if (spec.seeds.empty()) throw InvalidValue("no seeds given");
    const auto scenario = resolve_scenario(spec);
    const auto names = spec.policies.empty() ? policy_names() : spec.policies;

    std::map<std::string, DeploymentPolicy> policies;
    std::vector<std::string> canonical;
    for (const auto& n : names) {
      auto p = resolve_policy(n, spec.overrides);
      if (policies.emplace(p.name(), p).second) canonical.push_back(p.name());
    }

    std::vector<Cell> cells;
    for (const auto& p : canonical) {
      for (auto u : spec.uav_counts) {
        for (auto seed : spec.seeds) cells.push_back({p, u, seed});
      }
    }
    const fs::path out_dir = resolve_out_dir(spec.out_dir);
    const auto results =
        execute(scenario, cells, policies, out_dir, spec.jobs, spec.resume, false);

    int code = kOk;
    std::vector<SummaryRow> rows;
    std::size_t ran = 0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      if (r.code != kOk) {
        err << "error: " << cells[i].policy << '/' << cells[i].uav_count << '/' << cells[i].seed
            << ": " << r.error << '\n';
        code = std::max(code, r.code);
        continue;
      }
      r.skipped ? ++skipped : ++ran;
      rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    }
    if (code != kOk) return code;

    const auto table = compare_table(rows);
    write_file_atomic(out_dir / "runs.csv", summary_csv(rows));
    write_file_atomic(out_dir / "comparison.csv", comparison_csv(table));

    out << "cells=" << cells.size() << " ran=" << ran << " skipped=" << skipped << '\n';
    for (const auto& row : table) {
      if (row.town != "ALL") continue;
      out << row.policy << " uavs=" << row.uav_count << " overall=" << format_fixed6(row.mean_success_rate)
          << '\n';
    }
    return kOk;
  });
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Disaster-area UAV edge computing simulator"};
  app.require_subcommand(1);

  RunSpec spec;
  std::string out_dir;
  std::vector<std::string> override_args;
  std::string seeds_arg;
  std::optional<std::uint64_t> seed_arg;
  std::optional<std::uint32_t> users_arg;
  std::string policy_arg;
  std::vector<std::string> policy_list;
  std::optional<std::uint32_t> uavs_arg;
  std::string range_arg = "4..10";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", spec.scenario, "Scenario JSON file or builtin:earthquake")
        ->capture_default_str();
    sub->add_option("--seed", seed_arg, "Single seed");
    sub->add_option("--seeds", seeds_arg, "Seed list: 1,2,3 or 1..5 (default 1..5)");
    sub->add_option("--out", out_dir, "Output directory (default $AIRCOMP_OUT or ./aircomp-out)");
    sub->add_option("--override", override_args, "key=value, repeatable");
    sub->add_option("--users-per-town", users_arg, "Users per town for the builtin scenario");
    sub->add_option("--jobs", spec.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
    sub->add_flag("--resume", spec.resume, "Skip cells whose outputs already exist");
  };

  auto* run = app.add_subcommand("run", "Run one policy and UAV count for each seed");
  common(run);
  run->add_option("--policy", policy_arg, "none, random, load-balancing, emergency, lsi")
      ->required();
  run->add_option("--uavs", uavs_arg, "Number of UAVs (default: scenario fleet size)");

  auto* sweep = app.add_subcommand("sweep", "Run policy x UAV count x seed and compare");
  common(sweep);
  sweep->add_option("--policy,--policies", policy_list, "Policies (default: all)")->delimiter(',');
  sweep->add_option("--uav-range,--uavs", range_arg, "UAV counts: 4..10 or 4,6,8")
      ->capture_default_str();

  auto* dump = app.add_subcommand("scenario", "Print the resolved scenario as JSON");
  dump->add_option("--scenario", spec.scenario, "Scenario JSON file or builtin:earthquake")
      ->capture_default_str();
  dump->add_option("--override", override_args, "key=value, repeatable");
  dump->add_option("--users-per-town", users_arg, "Users per town for the builtin scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  return guarded(err, [&] {
    spec.out_dir = out_dir;
    spec.users_per_town = users_arg;
    for (const auto& o : override_args) spec.overrides.push_back(parse_override(o));
    if (seed_arg && !seeds_arg.empty()) throw InvalidValue("use either --seed or --seeds");
    if (seed_arg) spec.seeds = {*seed_arg};
    if (!seeds_arg.empty()) spec.seeds = parse_list(seeds_arg);

    if (run->parsed()) {
      spec.policies = {policy_arg};
      if (uavs_arg) spec.uav_counts = {*uavs_arg};
      return cmd_run(spec, out, err);
    }
    if (sweep->parsed()) {
      spec.policies = policy_list;
      spec.uav_counts = to_u32(parse_list(range_arg), "UAV count");
      return cmd_sweep(spec, out, err);
    }
    out << serialize_scenario(resolve_scenario(spec));
    return kOk;
  });
}

}  // namespace aircomp::cli
