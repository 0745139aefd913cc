#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aircomp/domain.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

namespace policy {

struct NoUav {};
struct Random {};

struct LoadBalancing {
  /// Tasks subtracted from a town's working count per assigned UAV. When
  /// unset: uav_capacity * window / mean_cpu, i.e. what one UAV absorbs in a
  /// window.
  std::optional<double> decrement;
};

struct Emergency {
  std::uint32_t kmeans_iters = 50;
  std::optional<std::uint32_t> k_override;
};

struct Lsi {};

}  // namespace policy

struct DeploymentPolicy {
  std::variant<policy::NoUav, policy::Random, policy::LoadBalancing, policy::Emergency,
               policy::Lsi>
      variant;

  /// CLI name: none, random, load-balancing, emergency, lsi.
  std::string name() const;
  /// Throws InvalidValue on a nonsensical parameter.
  void validate() const;
};

/// nullopt for an unknown name.
std::optional<DeploymentPolicy> parse_policy(std::string_view name);
const std::vector<std::string>& policy_names();

/// Runs the policy. Only stationed UAVs are ever commanded, at most once each.
std::vector<RelocationCommand> plan(const DeploymentPolicy& policy, const HapSnapshot& snapshot,
                                    Rng& rng);

std::vector<RelocationCommand> plan_random(const HapSnapshot& snapshot, Rng& rng);

/// Greedy task-count split: the UAV count each town should hold.
std::vector<std::pair<TownId, std::uint32_t>> load_balancing_targets(const HapSnapshot& snapshot,
                                                                     double decrement);
std::vector<RelocationCommand> plan_load_balancing(const HapSnapshot& snapshot, double decrement);

/// Default decrement: tasks one UAV can absorb over the observation window.
double default_lb_decrement(const HapSnapshot& snapshot);

std::vector<Position> uncovered_users(const HapSnapshot& snapshot);

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

struct KMeansResult {
  std::vector<Position> centroids;
  std::vector<std::size_t> assignment;
  /// WCSS after initialisation and after every update step.
  std::vector<double> wcss_history;
  std::uint32_t iterations = 0;
};

/// Lloyd's algorithm with seeded initial centres drawn without replacement.
/// Throws DegenerateInput if points is empty, k == 0 or k > points.size().
KMeansResult kmeans_run(const std::vector<Position>& points, std::size_t k, std::uint32_t iters,
                        Rng& rng);
std::vector<Position> kmeans(const std::vector<Position>& points, std::size_t k,
                             std::uint32_t iters, Rng& rng);
double wcss(const std::vector<Position>& points, const std::vector<Position>& centroids,
            const std::vector<std::size_t>& assignment);

std::vector<RelocationCommand> plan_emergency(const HapSnapshot& snapshot,
                                              const policy::Emergency& config, Rng& rng);

struct TownLoadModel {
  TownId town;
  double lambda = 0.0;  // tasks per second
  CpuUnits mean_cpu = 0.0;
  CpuRate capacity = 0.0;
  double mu = 0.0;  // tasks per second
  Seconds required_delay = 0.0;

  /// Fills mu = capacity / mean_cpu (infinite when mean_cpu is zero).
  static TownLoadModel make(TownId town, double lambda, CpuUnits mean_cpu, CpuRate capacity,
                            Seconds required_delay);
};

/// M/M/1 mean response time 1/(mu - lambda); nullopt when mu <= lambda.
std::optional<Seconds> mm1_response_time(const TownLoadModel& model);

/// Additional capacity (CPU-units/s) the town needs; zero when both the delay
/// and the load conditions already hold.
CpuRate capacity_deficit(const TownLoadModel& model);
std::uint32_t required_uavs(const TownLoadModel& model, CpuRate uav_capacity);

/// Requirement per town, computed against edge-only capacity.
TownLoadModel lsi_model(const TownView& town);

std::vector<RelocationCommand> plan_lsi(const HapSnapshot& snapshot);

}  // namespace aircomp
