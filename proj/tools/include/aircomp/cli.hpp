#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aircomp/metrics.hpp"
#include "aircomp/policies.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp::cli {

inline constexpr const char* kBuiltinEarthquake = "builtin:earthquake";

struct RunSpec {
  std::string scenario = kBuiltinEarthquake;
  std::vector<std::string> policies;
  /// Empty means "use the scenario's fleet size".
  std::vector<std::uint32_t> uav_counts;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::filesystem::path out_dir;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::uint32_t> users_per_town;
  unsigned jobs = 1;
  bool resume = false;
};

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kIoFailure = 1;
inline constexpr int kUsage = 2;

/// "3", "1,2,5" or "4..10" (inclusive). Throws InvalidValue.
std::vector<std::uint64_t> parse_list(const std::string& text);
/// "key=value". Throws InvalidValue.
std::pair<std::string, std::string> parse_override(const std::string& text);

/// Loads the scenario named by `spec.scenario` and applies the scenario overrides
/// (everything except policy.* keys).
Scenario resolve_scenario(const RunSpec& spec);

/// Builds the named policy and applies policy.* overrides that concern it.
/// Throws InvalidValue on an unknown policy or policy key.
DeploymentPolicy resolve_policy(const std::string& name,
                                const std::vector<std::pair<std::string, std::string>>& overrides);

struct CellResult {
  RunLabel label;
  MetricsLedger ledger;
  std::uint64_t trace_hash = 0;
};

/// Runs one (policy, uav_count, seed) cell of `base`.
CellResult run_cell(const Scenario& base, const DeploymentPolicy& policy, std::uint32_t uav_count,
                    std::uint64_t seed);

/// out_dir/policy/uav_count/seed
std::filesystem::path cell_dir(const std::filesystem::path& out_dir, const RunLabel& label);

int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Full command line entry point; argv[0] is the program name.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aircomp::cli
