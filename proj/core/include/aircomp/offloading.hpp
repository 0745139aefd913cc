#pragma once

#include <optional>
#include <vector>

#include "aircomp/world.hpp"

namespace aircomp {

struct ResourceRef {
  enum class Kind : std::uint8_t { Edge, Uav };

  Kind kind = Kind::Edge;
  std::uint32_t id = 0;

  static ResourceRef edge(EdgeId e) { return {Kind::Edge, e.value}; }
  static ResourceRef uav(UavId u) { return {Kind::Uav, u.value}; }

  friend constexpr bool operator==(const ResourceRef&, const ResourceRef&) = default;
};

FifoServer& server_of(WorldState& world, ResourceRef ref);
const FifoServer& server_of(const WorldState& world, ResourceRef ref);
Seconds wlan_delay_of(const WorldState& world, ResourceRef ref);

/// Resources a user may offload to right now: the town edge (if operational)
/// first, then every covering stationed UAV in id order.
std::vector<ResourceRef> eligible_resources(const User& user, const WorldState& world);

/// Queue drain time plus own service time plus the transfer legs, assuming
/// the HAP reports exact queue state.
Seconds estimate_response_time(ResourceRef resource, const Task& task, const WorldState& world);

struct Placement {
  ResourceRef resource;
  Seconds completes_at = 0.0;
  /// True when the task is at the head of the queue, i.e. the caller must
  /// schedule its completion now.
  bool at_head = false;
  std::uint64_t epoch = 0;
};

/// Enqueues the task on the eligible resource with the smallest estimated
/// response time (ties: eligibility order). With no eligible resource the
/// task is marked FailedNoResource and nullopt is returned.
std::optional<Placement> offload(Task& task, WorldState& world);

/// Pops the head of the resource queue and classifies it at `now`.
/// Throws std::logic_error if `task_id` is not at the head.
Task complete(ResourceRef resource, TaskId task_id, Seconds now, WorldState& world);

}  // namespace aircomp
