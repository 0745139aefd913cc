#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "aircomp/domain.hpp"

namespace aircomp {

/// Complete simulation state. Ids are dense indices into the owning vectors.
struct WorldState {
  Seconds clock = 0.0;
  std::vector<Town> towns;
  std::vector<User> users;
  std::vector<EdgeServer> edges;
  std::vector<Uav> uavs;
  /// Scenario events not yet applied, in the order they were declared.
  std::vector<TimedEvent> timeline;
  /// Root seed; placement and arrival substreams are derived from it.
  std::uint64_t seed = 0;
  /// When true the configured WLAN delay is a round trip (paid once);
  /// otherwise it is one-way and paid for upload and for the result.
  bool wlan_round_trip = false;

  Town& town(TownId id) { return towns.at(id.value); }
  const Town& town(TownId id) const { return towns.at(id.value); }
  User& user(UserId id) { return users.at(id.value); }
  const User& user(UserId id) const { return users.at(id.value); }
  EdgeServer& edge(EdgeId id) { return edges.at(id.value); }
  const EdgeServer& edge(EdgeId id) const { return edges.at(id.value); }
  Uav& uav(UavId id) { return uavs.at(id.value); }
  const Uav& uav(UavId id) const { return uavs.at(id.value); }

  std::optional<TownId> find_town(std::string_view name) const;
  /// Town whose region contains `p`, if any.
  std::optional<TownId> town_at(const Position& p) const;
  /// Town a UAV is stationed in, or flying to.
  std::optional<TownId> uav_town(const Uav& uav) const;

  /// Edge server of a town, if it exists and is operational.
  const EdgeServer* operational_edge(TownId town) const;

  /// Total transfer delay (upload + result) for a resource with the given
  /// configured WLAN delay.
  Seconds transfer_delay(Seconds wlan_delay) const {
    return wlan_round_trip ? wlan_delay : 2.0 * wlan_delay;
  }
};

}  // namespace aircomp
