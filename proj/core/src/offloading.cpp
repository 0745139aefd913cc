#include "aircomp/offloading.hpp"

#include <stdexcept>

namespace aircomp {

FifoServer& server_of(WorldState& world, ResourceRef ref) {
  return ref.kind == ResourceRef::Kind::Edge ? world.edge(EdgeId{ref.id}).queue
                                             : world.uav(UavId{ref.id}).queue;
}

const FifoServer& server_of(const WorldState& world, ResourceRef ref) {
  return ref.kind == ResourceRef::Kind::Edge ? world.edge(EdgeId{ref.id}).queue
                                             : world.uav(UavId{ref.id}).queue;
}

Seconds wlan_delay_of(const WorldState& world, ResourceRef ref) {
  return ref.kind == ResourceRef::Kind::Edge ? world.edge(EdgeId{ref.id}).wlan_delay
                                             : world.uav(UavId{ref.id}).wlan_delay;
}

std::vector<ResourceRef> eligible_resources(const User& user, const WorldState& world) {
  std::vector<ResourceRef> out;
  if (const auto* e = world.operational_edge(user.town)) out.push_back(ResourceRef::edge(e->id));
  for (const auto& u : world.uavs) {
    if (in_uav_coverage(user, u)) out.push_back(ResourceRef::uav(u.id));
  }
  return out;
}

Seconds estimate_response_time(ResourceRef resource, const Task& task, const WorldState& world) {
  const auto& server = server_of(world, resource);
  const Seconds backlog = server.backlog_work(world.clock) / server.capacity();
  const Seconds service = task.cpu_demand / server.capacity();
  return backlog + service + world.transfer_delay(wlan_delay_of(world, resource));
}

std::optional<Placement> offload(Task& task, WorldState& world) {
  // Same candidates and order as eligible_resources(), without the allocation.
  const User& user = world.user(task.owner);
  std::optional<ResourceRef> chosen;
  Seconds best_rt = 0.0;
  auto consider = [&](ResourceRef r) {
    const Seconds rt = estimate_response_time(r, task, world);
    if (!chosen || rt < best_rt) {
      chosen = r;
      best_rt = rt;
    }
  };
  if (const auto* e = world.operational_edge(user.town)) consider(ResourceRef::edge(e->id));
  for (const auto& u : world.uavs) {
    if (in_uav_coverage(user, u)) consider(ResourceRef::uav(u.id));
  }
  if (!chosen) {
    task.fail_no_resource(task.created_at);
    return std::nullopt;
  }
  const ResourceRef best = *chosen;

  if (best.kind == ResourceRef::Kind::Uav && !world.uav(UavId{best.id}).stationed()) {
    throw std::logic_error("enqueue on a flying UAV");
  }

  auto& server = server_of(world, best);
  const bool at_head = server.empty();
  const auto& entry =
      server.enqueue(task, world.clock, world.transfer_delay(wlan_delay_of(world, best)));
  return Placement{best, entry.completes_at, at_head, server.epoch()};
}

Task complete(ResourceRef resource, TaskId task_id, Seconds now, WorldState& world) {
  auto& server = server_of(world, resource);
  if (server.empty() || server.front().task.id != task_id) {
    throw std::logic_error("completion for a task that is not at the queue head");
  }
  Task task = server.pop_front().task;
  task.finish(now);
  return task;
}

}  // namespace aircomp
