#pragma once

#include <cstdint>
#include <string>

#include "aircomp/scenario.hpp"

namespace aircomp::testing {

inline ApplicationProfile profile(CpuUnits cpu, Seconds budget, Seconds interarrival) {
  ApplicationProfile p;
  p.cpu_demand = cpu;
  p.worst_case_delay = budget;
  p.mean_interarrival = interarrival;
  return p;
}

inline PopulationSpec population(std::string town, std::uint32_t count, ApplicationProfile p,
                                 Seconds active_from = 0.0) {
  PopulationSpec s;
  s.town = std::move(town);
  s.count = count;
  s.profile = p;
  s.active_from = active_from;
  return s;
}

inline TownSpec town(std::string id, Position center, bool with_edge = true) {
  TownSpec t;
  t.id = std::move(id);
  t.center = center;
  t.radius = 80.0;
  if (with_edge) t.edge = EdgeSpec{};
  return t;
}

/// One town "A" at the origin with an edge server and no UAVs.
inline Scenario single_town(std::uint32_t users, ApplicationProfile p, Seconds duration) {
  Scenario s;
  s.sim.duration = duration;
  s.towns = {town("A", {0, 0})};
  s.uavs.count = 0;
  s.populations = {population("A", users, p)};
  return s;
}

/// Three edge-equipped towns at the default centres and no users.
inline Scenario three_towns() {
  Scenario s;
  s.towns = {town("T1", {0, 0}), town("T2", {3000, 0}), town("T3", {6000, 0})};
  s.uavs.count = 0;
  return s;
}

inline Task make_task(std::uint64_t id, CpuUnits cpu, Seconds created, Seconds budget,
                      TownId town = TownId{0}, UserId owner = UserId{0}) {
  Task t;
  t.id = TaskId{id};
  t.owner = owner;
  t.town = town;
  t.cpu_demand = cpu;
  t.created_at = created;
  t.worst_case_delay = budget;
  return t;
}

}  // namespace aircomp::testing
