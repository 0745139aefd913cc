#include "aircomp/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aircomp/scenario.hpp"

namespace aircomp {

void SimConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(duration)) throw InvalidValue("sim.duration must be > 0");
  if (!positive(policy_tick_period)) throw InvalidValue("sim.policy_tick_period must be > 0");
  if (!positive(metrics_bucket)) throw InvalidValue("sim.metrics_bucket must be > 0");
}

void EventQueue::schedule(Seconds at, EventKind kind) {
  if (at < now_) throw SchedulingInPast("event scheduled before the current clock");
  std::uint32_t slot;
  if (free_slots_.empty()) {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.push_back(std::move(kind));
  } else {
    slot = free_slots_.back();
    free_slots_.pop_back();
    slots_[slot] = std::move(kind);
  }

  const Node node{at, next_seq_++, slot};
  std::size_t i = heap_.size();
  heap_.push_back(node);
  while (i > 0) {
    const std::size_t parent = (i - 1) / 4;
    if (!before(node, heap_[parent])) break;
    heap_[i] = heap_[parent];
    i = parent;
  }
  heap_[i] = node;
}

Event EventQueue::peek() const {
  const Node& top = heap_.front();
  return Event{top.at, top.seq, slots_[top.slot]};
}

Event EventQueue::pop() {
  const Node top = heap_.front();
  const Node last = heap_.back();
  heap_.pop_back();
  const std::size_t n = heap_.size();
  if (n > 0) {
    std::size_t i = 0;
    for (;;) {
      const std::size_t first = 4 * i + 1;
      if (first >= n) break;
      std::size_t best = first;
      const std::size_t end = std::min(first + 4, n);
      for (std::size_t c = first + 1; c < end; ++c) {
        if (before(heap_[c], heap_[best])) best = c;
      }
      if (!before(heap_[best], last)) break;
      heap_[i] = heap_[best];
      i = best;
    }
    heap_[i] = last;
  }

  free_slots_.push_back(top.slot);
  now_ = top.at;
  return Event{top.at, top.seq, std::move(slots_[top.slot])};
}

Seconds sample_interarrival(double u, Seconds mean) { return -mean * std::log(1.0 - u); }

Seconds sample_interarrival(Rng& rng, Seconds mean) {
  return sample_interarrival(rng.uniform01(), mean);
}

HapSnapshot take_snapshot(const WorldState& world, const std::vector<WindowStats>& window,
                          Seconds window_length) {
  HapSnapshot s;
  s.taken_at = world.clock;
  s.window = window_length;

  for (const auto& t : world.towns) {
    TownView v;
    v.id = t.id;
    v.center = t.center;
    v.radius = t.radius;
    v.has_edge = t.edge_server.has_value();
    if (const auto* e = world.operational_edge(t.id)) {
      v.edge_operational = true;
      v.edge_capacity = e->capacity;
    }
    const auto& w = window.at(t.id.value);
    v.task_count = w.tasks;
    v.arrival_rate = window_length > 0.0 ? static_cast<double>(w.tasks) / window_length : 0.0;
    v.mean_cpu_demand = w.tasks > 0 ? w.cpu_sum / static_cast<double>(w.tasks) : 0.0;
    v.min_required_delay = std::numeric_limits<double>::infinity();
    v.operational_capacity = v.edge_capacity;
    s.towns.push_back(v);
  }

  for (const auto& u : world.uavs) {
    const auto town = world.uav_town(u);
    s.uav_states.push_back({u.id, u.position, u.flight_state, town, u.capacity});
    if (town && u.stationed()) s.towns[town->value].operational_capacity += u.capacity;
  }

  for (const auto& user : world.users) {
    if (!user.active_at(world.clock)) continue;
    auto& view = s.towns[user.town.value];
    view.min_required_delay = std::min(view.min_required_delay, user.profile.worst_case_delay);
    if (view.edge_operational) continue;
    bool covered = false;
    for (const auto& u : world.uavs) {
      if (in_uav_coverage(user, u)) {
        covered = true;
        break;
      }
    }
    if (!covered) s.uncovered_users.push_back({user.id, user.position});
  }
  return s;
}

Simulation::Simulation(WorldState world, SimConfig config, DeploymentPolicy policy)
    : world_(std::move(world)),
      config_(config),
      policy_(std::move(policy)),
      policy_rng_(derive_seed(config.rng_seed, Stream::Policy, 0)) {
  config_.validate();
  policy_.validate();
}

MetricsLedger Simulation::run() {
  if (ran_) throw std::logic_error("Simulation::run called twice");
  ran_ = true;

  std::vector<std::string> names;
  for (const auto& t : world_.towns) names.push_back(t.name);
  ledger_ = MetricsLedger(config_.metrics_bucket, std::move(names), config_.record_outcomes);
  ledger_.set_horizon(config_.duration);

  world_.clock = 0.0;
  world_.seed = config_.rng_seed;
  world_.wlan_round_trip = config_.wlan_round_trip;
  window_.assign(world_.towns.size(), WindowStats{});

  arrival_rngs_.reserve(world_.users.size());
  for (const auto& user : world_.users) schedule_first_arrival(user);
  for (std::uint32_t i = 0; i < world_.timeline.size(); ++i) {
    if (world_.timeline[i].at <= config_.duration) {
      queue_.schedule(world_.timeline[i].at, event::ScenarioEvent{i});
    }
  }
  if (config_.policy_tick_period <= config_.duration) {
    queue_.schedule(config_.policy_tick_period, event::PolicyTick{});
  }
  queue_.schedule(0.0, event::MetricsFlush{});

  while (!queue_.empty() && queue_.next_time() <= config_.duration) {
    const Event ev = queue_.pop();
    world_.clock = ev.at;
    hash_event(ev);
    ++dispatched_;
    dispatch(ev);
  }
  world_.clock = config_.duration;
  finalize();
  return std::move(ledger_);
}

void Simulation::dispatch(const Event& ev) {
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, event::TaskArrival>) on_arrival(e.user);
        else if constexpr (std::is_same_v<T, event::TaskCompletion>) on_completion(e);
        else if constexpr (std::is_same_v<T, event::UavArrival>) on_uav_arrival(e.uav);
        else if constexpr (std::is_same_v<T, event::PolicyTick>) on_policy_tick();
        else if constexpr (std::is_same_v<T, event::ScenarioEvent>) on_scenario_event(e.index);
        else on_metrics_flush();
      },
      ev.kind);
}

void Simulation::hash_event(const Event& ev) {
  std::uint64_t id = 0;
  if (const auto* a = std::get_if<event::TaskArrival>(&ev.kind)) id = a->user.value;
  else if (const auto* c = std::get_if<event::TaskCompletion>(&ev.kind)) id = c->task.value;
  else if (const auto* u = std::get_if<event::UavArrival>(&ev.kind)) id = u->uav.value;
  else if (const auto* s = std::get_if<event::ScenarioEvent>(&ev.kind)) id = s->index;
  for (const std::uint64_t word : {std::bit_cast<std::uint64_t>(ev.at),
                                   static_cast<std::uint64_t>(ev.kind.index()), id}) {
    trace_hash_ = (trace_hash_ ^ word) * 0x100000001b3ULL;
  }
}

Seconds Simulation::next_interarrival(const User& user) {
  auto& rng = arrival_rngs_.at(user.id.value);
  if (config_.deterministic_arrivals) return user.profile.mean_interarrival;
  return sample_interarrival(rng, user.profile.mean_interarrival);
}

void Simulation::schedule_first_arrival(const User& user) {
  while (arrival_rngs_.size() <= user.id.value) {
    arrival_rngs_.emplace_back(
        derive_seed(config_.rng_seed, Stream::Arrivals, arrival_rngs_.size()));
  }
  auto& rng = arrival_rngs_[user.id.value];
  const Seconds start = std::max(user.active_from, world_.clock);
  const Seconds first = config_.deterministic_arrivals
                            ? start + rng.uniform01() * user.profile.mean_interarrival
                            : start + sample_interarrival(rng, user.profile.mean_interarrival);
  if (first < config_.duration) queue_.schedule(first, event::TaskArrival{user.id});
}

void Simulation::on_arrival(UserId user_id) {
  const User& user = world_.user(user_id);
  Task task;
  task.id = TaskId{next_task_id_++};
  task.owner = user.id;
  task.town = user.town;
  task.cpu_demand = user.profile.cpu_demand;
  task.created_at = world_.clock;
  task.worst_case_delay = user.profile.worst_case_delay;

  auto& w = window_[user.town.value];
  ++w.tasks;
  w.cpu_sum += task.cpu_demand;

  if (const auto placement = offload(task, world_)) {
    if (placement->at_head) {
      queue_.schedule(placement->completes_at,
                      event::TaskCompletion{placement->resource, task.id, placement->epoch});
    }
  } else {
    ledger_.record(task);
  }

  const Seconds next = world_.clock + next_interarrival(user);
  if (next < config_.duration) queue_.schedule(next, event::TaskArrival{user_id});
}

void Simulation::on_completion(const event::TaskCompletion& ev) {
  auto& server = server_of(world_, ev.resource);
  if (server.epoch() != ev.epoch || server.empty() || server.front().task.id != ev.task) {
    return;  // queue was dropped after this completion was scheduled
  }
  ledger_.record(complete(ev.resource, ev.task, world_.clock, world_));
  if (!server.empty()) {
    const auto& head = server.front();
    queue_.schedule(head.completes_at,
                    event::TaskCompletion{ev.resource, head.task.id, server.epoch()});
  }
}

void Simulation::on_uav_arrival(UavId id) {
  auto& uav = world_.uav(id);
  const auto& flight = std::get<Flying>(uav.flight_state);
  uav.position = flight.destination;
  uav.flight_state = Stationed{};
}

void Simulation::on_policy_tick() {
  const auto snapshot = take_snapshot(world_, window_, config_.policy_tick_period);
  for (const auto& cmd : plan(policy_, snapshot, policy_rng_)) {
    auto& uav = world_.uav(cmd.uav);
    if (!uav.stationed()) throw std::logic_error("policy commanded a flying UAV");
    const Meters dist = horizontal_distance(uav.position, cmd.destination);
    if (dist <= 1e-9) continue;
    const Seconds arrival = world_.clock + dist / uav.speed;
    uav.flight_state = Flying{cmd.destination, arrival};
    queue_.schedule(arrival, event::UavArrival{uav.id});
  }
  window_.assign(world_.towns.size(), WindowStats{});

  const Seconds next = world_.clock + config_.policy_tick_period;
  if (next <= config_.duration) queue_.schedule(next, event::PolicyTick{});
}

void Simulation::on_scenario_event(std::uint32_t index) {
  auto effects = apply_event(world_, world_.timeline.at(index));
  for (const auto& t : effects.failed) ledger_.record(t);
  for (const auto id : effects.spawned) schedule_first_arrival(world_.user(id));
}

void Simulation::on_metrics_flush() {
  std::vector<std::uint32_t> per_town(world_.towns.size(), 0);
  for (const auto& u : world_.uavs) {
    if (!u.stationed()) continue;
    if (const auto t = world_.town_at(u.position)) ++per_town[t->value];
  }
  ledger_.sample_uav_presence(world_.clock, std::move(per_town));

  const Seconds next = static_cast<double>(++flush_index_) * config_.metrics_bucket;
  if (next <= config_.duration) queue_.schedule(next, event::MetricsFlush{});
}

void Simulation::finalize() {
  auto drain = [&](const FifoServer& server) {
    for (const auto& entry : server.entries()) {
      Task t = entry.task;
      if (config_.duration - t.created_at > t.worst_case_delay) {
        t.finish(entry.completes_at);
        ledger_.record(t);
      } else {
        ledger_.record_censored(t);
      }
    }
  };
  for (const auto& e : world_.edges) drain(e.queue);
  for (const auto& u : world_.uavs) drain(u.queue);
}

MetricsLedger run(WorldState world, const SimConfig& config, const DeploymentPolicy& policy) {
  Simulation sim(std::move(world), config, policy);
  return sim.run();
}

}  // namespace aircomp
