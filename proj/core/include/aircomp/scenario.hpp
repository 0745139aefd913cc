#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aircomp/domain.hpp"
#include "aircomp/engine.hpp"
#include "aircomp/world.hpp"

namespace aircomp {

struct EdgeSpec {
  CpuRate capacity = 100000.0;
  Seconds wlan_delay = 0.001;

  friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

struct TownSpec {
  std::string id;
  Position center;
  Meters radius = 80.0;
  std::optional<EdgeSpec> edge;

  friend bool operator==(const TownSpec&, const TownSpec&) = default;
};

struct UavFleetSpec {
  std::uint32_t count = 8;
  CpuRate capacity = 50000.0;
  Meters coverage_radius = 100.0;
  Meters altitude = 200.0;
  double speed = 20.0;  // m/s
  Seconds wlan_delay = 0.005;
  Position depot{3000.0, -1000.0};

  friend bool operator==(const UavFleetSpec&, const UavFleetSpec&) = default;
};

struct Scenario {
  SimConfig sim;
  std::vector<TownSpec> towns;
  UavFleetSpec uavs;
  std::vector<PopulationSpec> populations;
  std::vector<TimedEvent> events;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Carries every violated invariant, one per entry.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class UnknownTown : public Error {
 public:
  using Error::Error;
};

/// Three towns hit by an earthquake at t=1000 (Town-1 edge destroyed,
/// interarrival drops to 1 s everywhere) with user counts doubling at t=2000.
Scenario build_default_earthquake(std::uint32_t users_per_town = 1000);

/// Throws ValidationError listing every violation.
void validate(const Scenario& scenario);

/// JSON text; the schema is documented in README.md.
std::string serialize_scenario(const Scenario& scenario);
/// Throws ParseError on syntax / shape errors and ValidationError on semantics.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Applies `key=value` overrides to the scenario. Keys are dotted paths into
/// the serialised form; array elements are addressed by their `id` (towns) or
/// index. Unknown keys throw ValidationError. The result is validated.
Scenario apply_overrides(const Scenario& scenario,
                         const std::vector<std::pair<std::string, std::string>>& overrides);

/// Builds the initial world: towns, edges, initial populations (placed
/// uniformly in their town disk) and `uavs.count` UAVs at the depot. The
/// scenario events become the world's timeline.
WorldState build_world(const Scenario& scenario);

struct EventEffects {
  std::vector<UserId> spawned;
  /// Tasks that were queued on a destroyed edge, marked FailedNoResource.
  std::vector<Task> failed;
};

/// Mutates the world at the event's time. Throws UnknownTown.
EventEffects apply_event(WorldState& world, const TimedEvent& event);

/// Uniform position inside the town disk, drawn from the user's placement
/// substream.
Position place_user(const Town& town, std::uint64_t seed, UserId user);

}  // namespace aircomp
