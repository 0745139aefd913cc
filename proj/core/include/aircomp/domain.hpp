#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace aircomp {

using Seconds = double;
using Meters = double;
using CpuUnits = double;
/// CPU-units per second.
using CpuRate = double;

template <class Tag, class Rep = std::uint32_t>
struct Id {
  Rep value = 0;

  constexpr Id() = default;
  constexpr explicit Id(Rep v) : value(v) {}

  friend constexpr auto operator<=>(Id, Id) = default;
};

using TownId = Id<struct TownTag>;
using UserId = Id<struct UserTag>;
using UavId = Id<struct UavTag>;
using EdgeId = Id<struct EdgeTag>;
using TaskId = Id<struct TaskTag, std::uint64_t>;

// Errors. Every module throws a subclass of aircomp::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidValue : public Error {
 public:
  using Error::Error;
};

struct Position {
  Meters x = 0.0;
  Meters y = 0.0;

  friend constexpr bool operator==(const Position&, const Position&) = default;
};

/// Euclidean distance on the ground plane.
Meters horizontal_distance(const Position& a, const Position& b);

struct ApplicationProfile {
  std::uint32_t id = 0;
  CpuUnits cpu_demand = 0.0;
  Seconds worst_case_delay = 0.0;
  Seconds mean_interarrival = 0.0;

  /// Throws InvalidValue unless every field is strictly positive and finite.
  void validate() const;

  friend bool operator==(const ApplicationProfile&, const ApplicationProfile&) = default;
};

enum class Outcome : std::uint8_t { Pending, Success, FailedDeadline, FailedNoResource };

const char* to_string(Outcome outcome);

/// Success iff the end-to-end latency stays within the budget (inclusive).
Outcome classify_latency(Seconds latency, Seconds worst_case_delay);

struct Task {
  TaskId id;
  UserId owner;
  TownId town;
  CpuUnits cpu_demand = 0.0;
  Seconds created_at = 0.0;
  Seconds worst_case_delay = 0.0;
  std::optional<Seconds> completed_at;
  Outcome outcome = Outcome::Pending;

  /// Sets completed_at and derives Success / FailedDeadline.
  Outcome finish(Seconds now);
  /// Marks the task as never served; completed_at is set to `at`.
  void fail_no_resource(Seconds at);
};

struct User {
  UserId id;
  TownId town;
  Position position;
  ApplicationProfile profile;
  Seconds active_from = 0.0;

  bool active_at(Seconds now) const { return active_from <= now; }
};

struct Town {
  TownId id;
  std::string name;
  Position center;
  Meters radius = 0.0;
  std::optional<EdgeId> edge_server;

  bool contains(const Position& p) const;
};

/// One entry of a single-server FIFO queue.
///
/// Service times are tracked in the offload-instant frame: every task sent to
/// the same resource pays the same upload delay, so shifting the whole queue
/// by that constant leaves FIFO order and waiting times unchanged.
struct QueuedTask {
  Task task;
  Seconds service_start = 0.0;
  Seconds service_end = 0.0;
  /// service_end plus upload and return legs: the instant the user has the result.
  Seconds completes_at = 0.0;
};

/// Single-server FIFO with no preemption, serving one task at a time at full
/// capacity.
class FifoServer {
 public:
  FifoServer() = default;
  explicit FifoServer(CpuRate capacity);

  CpuRate capacity() const { return capacity_; }

  /// Remaining CPU-units of all queued work (in-service task included) at `now`.
  CpuUnits backlog_work(Seconds now) const;
  Seconds busy_until() const { return busy_until_; }

  /// Appends the task; returns the queued entry (service times filled in).
  const QueuedTask& enqueue(Task task, Seconds now, Seconds transfer_delay);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const QueuedTask& front() const { return entries_.front(); }
  QueuedTask pop_front();
  const std::deque<QueuedTask>& entries() const { return entries_; }

  /// Empties the queue (server lost). Bumps the epoch so stale completion
  /// events can be recognised.
  std::deque<QueuedTask> drain();
  std::uint64_t epoch() const { return epoch_; }

 private:
  CpuRate capacity_ = 0.0;
  Seconds busy_until_ = 0.0;
  std::uint64_t epoch_ = 0;
  std::deque<QueuedTask> entries_;
};

struct EdgeServer {
  EdgeId id;
  TownId town;
  CpuRate capacity = 0.0;
  Seconds wlan_delay = 0.0;
  bool operational = true;
  FifoServer queue;
};

struct Stationed {
  friend constexpr bool operator==(const Stationed&, const Stationed&) = default;
};

struct Flying {
  Position destination;
  Seconds arrival_at = 0.0;

  friend constexpr bool operator==(const Flying&, const Flying&) = default;
};

using FlightState = std::variant<Stationed, Flying>;

struct Uav {
  UavId id;
  Position position;
  Meters altitude = 0.0;
  CpuRate capacity = 0.0;
  Meters coverage_radius = 0.0;
  double speed = 0.0;  // m/s
  Seconds wlan_delay = 0.0;
  FlightState flight_state = Stationed{};
  FifoServer queue;

  bool stationed() const { return std::holds_alternative<Stationed>(flight_state); }
};

/// Coverage is horizontal and boundary-inclusive; a flying UAV covers nobody.
bool in_uav_coverage(const User& user, const Uav& uav);

// ---------------------------------------------------------------------------
// Scenario-level value types. They live here because WorldState carries the
// pending timeline.

struct PopulationSpec {
  std::string town;
  std::uint32_t count = 0;
  ApplicationProfile profile;
  Seconds active_from = 0.0;

  friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;
};

struct DestroyEdge {
  std::string town;
  friend bool operator==(const DestroyEdge&, const DestroyEdge&) = default;
};

struct SetInterarrival {
  std::string town;
  Seconds mean_interarrival = 0.0;
  friend bool operator==(const SetInterarrival&, const SetInterarrival&) = default;
};

struct SpawnUsers {
  PopulationSpec population;
  friend bool operator==(const SpawnUsers&, const SpawnUsers&) = default;
};

struct TimedEvent {
  Seconds at = 0.0;
  std::variant<DestroyEdge, SetInterarrival, SpawnUsers> kind;

  friend bool operator==(const TimedEvent&, const TimedEvent&) = default;
};

// ---------------------------------------------------------------------------
// HAP controller view.

struct TownView {
  TownId id;
  Position center;
  Meters radius = 0.0;
  bool has_edge = false;
  bool edge_operational = false;
  CpuRate edge_capacity = 0.0;  // zero when destroyed or absent

  /// Tasks generated in the town during the last observation window.
  std::uint64_t task_count = 0;
  double arrival_rate = 0.0;  // tasks per second
  CpuUnits mean_cpu_demand = 0.0;
  /// Strictest worst-case delay among active users; +inf if none are active.
  Seconds min_required_delay = 0.0;
  /// Edge (if operational) plus UAVs stationed in the town.
  CpuRate operational_capacity = 0.0;

  bool destroyed() const { return !edge_operational; }
};

struct UncoveredUser {
  UserId user;
  Position position;
};

struct UavView {
  UavId id;
  Position position;
  FlightState flight_state;
  /// Town the UAV is stationed in, or flying to.
  std::optional<TownId> town;
  CpuRate capacity = 0.0;

  bool stationed() const { return std::holds_alternative<Stationed>(flight_state); }
};

struct HapSnapshot {
  Seconds taken_at = 0.0;
  Seconds window = 0.0;
  /// Any order; policies break ties on TownId, never on list position.
  std::vector<TownView> towns;
  std::vector<UncoveredUser> uncovered_users;
  std::vector<UavView> uav_states;

  const TownView* town(TownId id) const;
};

struct RelocationCommand {
  UavId uav;
  Position destination;
  Seconds issued_at = 0.0;

  friend bool operator==(const RelocationCommand&, const RelocationCommand&) = default;
};

}  // namespace aircomp
