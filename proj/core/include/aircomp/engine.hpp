#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "aircomp/metrics.hpp"
#include "aircomp/offloading.hpp"
#include "aircomp/policies.hpp"
#include "aircomp/rng.hpp"
#include "aircomp/world.hpp"

namespace aircomp {

struct SimConfig {
  Seconds duration = 4000.0;
  Seconds policy_tick_period = 10.0;
  Seconds metrics_bucket = 100.0;
  std::uint64_t rng_seed = 1;
  /// Fixed spacing equal to the mean instead of exponential interarrivals
  /// (first arrival at a uniform phase).
  bool deterministic_arrivals = false;
  /// See WorldState::wlan_round_trip.
  bool wlan_round_trip = false;
  /// Keep one record per task in the ledger (memory heavy on full runs).
  bool record_outcomes = false;

  /// Throws InvalidValue on a non-positive duration, tick period or bucket.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

namespace event {
struct TaskArrival {
  UserId user;
};
struct TaskCompletion {
  ResourceRef resource;
  TaskId task;
  std::uint64_t epoch = 0;
};
struct UavArrival {
  UavId uav;
};
struct PolicyTick {};
struct ScenarioEvent {
  std::uint32_t index = 0;
};
struct MetricsFlush {};
}  // namespace event

using EventKind = std::variant<event::TaskArrival, event::TaskCompletion, event::UavArrival,
                               event::PolicyTick, event::ScenarioEvent, event::MetricsFlush>;

struct Event {
  Seconds at = 0.0;
  std::uint64_t seq = 0;
  EventKind kind;
};

class SchedulingInPast : public Error {
 public:
  using Error::Error;
};

/// Timestamp-ordered queue; equal timestamps leave in insertion order.
class EventQueue {
 public:
  Seconds now() const { return now_; }

  /// Throws SchedulingInPast if `at` is earlier than now().
  void schedule(Seconds at, EventKind kind);

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  /// Time of the earliest event; the queue must not be empty.
  Seconds next_time() const { return heap_.front().at; }
  Event peek() const;
  /// Removes the earliest event and advances the clock to it.
  Event pop();

 private:
  // 4-ary min-heap of small keys; payloads live in a slot table.
  struct Node {
    Seconds at;
    std::uint64_t seq;
    std::uint32_t slot;
  };
  static bool before(const Node& a, const Node& b) {
    return a.at < b.at || (a.at == b.at && a.seq < b.seq);
  }

  std::vector<Node> heap_;
  std::vector<EventKind> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::uint64_t next_seq_ = 0;
  Seconds now_ = 0.0;
};

/// Inverse-CDF exponential sample: -mean * ln(1 - u), u in [0, 1).
Seconds sample_interarrival(double u, Seconds mean);
Seconds sample_interarrival(Rng& rng, Seconds mean);

/// Tasks generated per town since the last policy tick.
struct WindowStats {
  std::uint64_t tasks = 0;
  CpuUnits cpu_sum = 0.0;
};

HapSnapshot take_snapshot(const WorldState& world, const std::vector<WindowStats>& window,
                          Seconds window_length);

/// Single-threaded, deterministic run of one world under one policy.
class Simulation {
 public:
  Simulation(WorldState world, SimConfig config, DeploymentPolicy policy);

  /// Dispatches every event with at <= duration and returns the finalised
  /// ledger. Call once.
  MetricsLedger run();

  /// FNV-1a style hash over (time, kind, id) of every dispatched event.
  std::uint64_t trace_hash() const { return trace_hash_; }
  std::uint64_t events_dispatched() const { return dispatched_; }
  const WorldState& world() const { return world_; }

 private:
  void dispatch(const Event& ev);
  void on_arrival(UserId user);
  void on_completion(const event::TaskCompletion& ev);
  void on_uav_arrival(UavId uav);
  void on_policy_tick();
  void on_scenario_event(std::uint32_t index);
  void on_metrics_flush();
  void schedule_first_arrival(const User& user);
  Seconds next_interarrival(const User& user);
  void finalize();
  void hash_event(const Event& ev);

  WorldState world_;
  SimConfig config_;
  DeploymentPolicy policy_;
  EventQueue queue_;
  MetricsLedger ledger_;
  Rng policy_rng_;
  std::vector<Rng> arrival_rngs_;  // indexed by user id
  std::vector<WindowStats> window_;
  std::uint64_t next_task_id_ = 0;
  std::uint64_t flush_index_ = 0;
  std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;
  std::uint64_t dispatched_ = 0;
  bool ran_ = false;
};

MetricsLedger run(WorldState world, const SimConfig& config, const DeploymentPolicy& policy);

}  // namespace aircomp
