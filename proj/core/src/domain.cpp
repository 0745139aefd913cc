#include "aircomp/domain.hpp"

#include <algorithm>
#include <cmath>

namespace aircomp {

Meters horizontal_distance(const Position& a, const Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

void ApplicationProfile::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(cpu_demand)) throw InvalidValue("cpu_demand must be > 0");
  if (!positive(worst_case_delay)) throw InvalidValue("worst_case_delay must be > 0");
  if (!positive(mean_interarrival)) throw InvalidValue("mean_interarrival must be > 0");
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Pending: return "pending";
    case Outcome::Success: return "success";
    case Outcome::FailedDeadline: return "failed_deadline";
    case Outcome::FailedNoResource: return "failed_no_resource";
  }
  return "?";
}

Outcome classify_latency(Seconds latency, Seconds worst_case_delay) {
  return latency <= worst_case_delay ? Outcome::Success : Outcome::FailedDeadline;
}

Outcome Task::finish(Seconds now) {
  if (now < created_at) throw InvalidValue("task completed before it was created");
  completed_at = now;
  outcome = classify_latency(now - created_at, worst_case_delay);
  return outcome;
}

void Task::fail_no_resource(Seconds at) {
  completed_at = std::max(at, created_at);
  outcome = Outcome::FailedNoResource;
}

bool Town::contains(const Position& p) const {
  return horizontal_distance(center, p) <= radius;
}

FifoServer::FifoServer(CpuRate capacity) : capacity_(capacity) {
  if (!(capacity > 0.0) || !std::isfinite(capacity)) {
    throw InvalidValue("server capacity must be > 0");
  }
}

CpuUnits FifoServer::backlog_work(Seconds now) const {
  if (entries_.empty()) return 0.0;
  return std::max(0.0, busy_until_ - now) * capacity_;
}

const QueuedTask& FifoServer::enqueue(Task task, Seconds now, Seconds transfer_delay) {
  QueuedTask entry;
  entry.service_start = entries_.empty() ? now : std::max(now, busy_until_);
  entry.service_end = entry.service_start + task.cpu_demand / capacity_;
  entry.completes_at = entry.service_end + transfer_delay;
  entry.task = std::move(task);
  busy_until_ = entry.service_end;
  entries_.push_back(std::move(entry));
  return entries_.back();
}

QueuedTask FifoServer::pop_front() {
  QueuedTask entry = std::move(entries_.front());
  entries_.pop_front();
  return entry;
}

std::deque<QueuedTask> FifoServer::drain() {
  std::deque<QueuedTask> out;
  out.swap(entries_);
  busy_until_ = 0.0;
  ++epoch_;
  return out;
}

bool in_uav_coverage(const User& user, const Uav& uav) {
  return uav.stationed() &&
         horizontal_distance(user.position, uav.position) <= uav.coverage_radius;
}

const TownView* HapSnapshot::town(TownId id) const {
  auto it = std::find_if(towns.begin(), towns.end(),
                         [&](const TownView& t) { return t.id == id; });
  return it == towns.end() ? nullptr : &*it;
}

}  // namespace aircomp
