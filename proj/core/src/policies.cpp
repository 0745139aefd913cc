#include "aircomp/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace aircomp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<const TownView*> towns_by_id(const HapSnapshot& s) {
  std::vector<const TownView*> out;
  out.reserve(s.towns.size());
  for (const auto& t : s.towns) out.push_back(&t);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
  return out;
}

std::vector<const UavView*> uavs_by_id(const HapSnapshot& s) {
  std::vector<const UavView*> out;
  out.reserve(s.uav_states.size());
  for (const auto& u : s.uav_states) out.push_back(&u);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
  return out;
}

CpuRate fleet_uav_capacity(const HapSnapshot& s) {
  return s.uav_states.empty() ? 0.0 : s.uav_states.front().capacity;
}

struct TownDemand {
  TownId town;
  std::uint32_t wanted = 0;
  Position destination;
};

// Moves stationed UAVs so that each demanded town holds `wanted` UAVs
// (stationed there or already flying there). Demands are served in the
// given order. The pool is UAVs outside every town first, then the
// highest-id surplus UAVs of towns holding more than `keep[town]`; within a
// tier the UAV nearest to the destination goes first.
std::vector<RelocationCommand> allocate(const HapSnapshot& s,
                                        const std::vector<TownDemand>& demands,
                                        const std::map<TownId, std::uint32_t>& keep) {
  std::map<TownId, std::vector<const UavView*>> by_town;
  std::map<TownId, std::uint32_t> present;
  struct Candidate {
    const UavView* uav;
    int tier;
  };
  std::vector<Candidate> pool;

  for (const auto* u : uavs_by_id(s)) {
    if (u->town) {
      ++present[*u->town];
      by_town[*u->town].push_back(u);
    } else if (u->stationed()) {
      pool.push_back({u, 0});
    }
  }
  for (auto& [town, list] : by_town) {
    const auto it = keep.find(town);
    const std::uint32_t k = it == keep.end() ? 0u : it->second;
    std::uint32_t surplus = list.size() > k ? static_cast<std::uint32_t>(list.size() - k) : 0u;
    for (auto rit = list.rbegin(); rit != list.rend() && surplus > 0; ++rit) {
      if (!(*rit)->stationed()) continue;
      pool.push_back({*rit, 1});
      --surplus;
    }
  }

  std::vector<RelocationCommand> out;
  for (const auto& d : demands) {
    std::uint32_t have = present[d.town];
    while (have < d.wanted && !pool.empty()) {
      auto best = std::min_element(pool.begin(), pool.end(), [&](const auto& a, const auto& b) {
        if (a.tier != b.tier) return a.tier < b.tier;
        const double da = horizontal_distance(a.uav->position, d.destination);
        const double db = horizontal_distance(b.uav->position, d.destination);
        if (da != db) return da < db;
        return a.uav->id < b.uav->id;
      });
      out.push_back({best->uav->id, d.destination, s.taken_at});
      if (best->uav->town) --present[*best->uav->town];
      pool.erase(best);
      ++have;
    }
    present[d.town] = have;
  }
  return out;
}

}  // namespace

std::string DeploymentPolicy::name() const {
  return std::visit(overloaded{
                        [](const policy::NoUav&) { return std::string("none"); },
                        [](const policy::Random&) { return std::string("random"); },
                        [](const policy::LoadBalancing&) { return std::string("load-balancing"); },
                        [](const policy::Emergency&) { return std::string("emergency"); },
                        [](const policy::Lsi&) { return std::string("lsi"); },
                    },
                    variant);
}

void DeploymentPolicy::validate() const {
  if (const auto* lb = std::get_if<policy::LoadBalancing>(&variant)) {
    if (lb->decrement && !(*lb->decrement > 0.0)) {
      throw InvalidValue("load-balancing decrement must be > 0");
    }
  }
  if (const auto* em = std::get_if<policy::Emergency>(&variant)) {
    if (em->kmeans_iters < 1) throw InvalidValue("kmeans_iters must be >= 1");
    if (em->k_override && *em->k_override < 1) throw InvalidValue("k_override must be >= 1");
  }
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"none", "random", "load-balancing", "emergency",
                                              "lsi"};
  return names;
}

std::optional<DeploymentPolicy> parse_policy(std::string_view name) {
  if (name == "none") return DeploymentPolicy{policy::NoUav{}};
  if (name == "random") return DeploymentPolicy{policy::Random{}};
  if (name == "load-balancing") return DeploymentPolicy{policy::LoadBalancing{}};
  if (name == "emergency") return DeploymentPolicy{policy::Emergency{}};
  if (name == "lsi") return DeploymentPolicy{policy::Lsi{}};
  return std::nullopt;
}

std::vector<RelocationCommand> plan(const DeploymentPolicy& p, const HapSnapshot& snapshot,
                                    Rng& rng) {
  auto raw = std::visit(
      overloaded{
          [](const policy::NoUav&) { return std::vector<RelocationCommand>{}; },
          [&](const policy::Random&) { return plan_random(snapshot, rng); },
          [&](const policy::LoadBalancing& lb) {
            return plan_load_balancing(snapshot,
                                       lb.decrement.value_or(default_lb_decrement(snapshot)));
          },
          [&](const policy::Emergency& em) { return plan_emergency(snapshot, em, rng); },
          [&](const policy::Lsi&) { return plan_lsi(snapshot); },
      },
      p.variant);

  std::set<UavId> stationed;
  for (const auto& u : snapshot.uav_states) {
    if (u.stationed()) stationed.insert(u.id);
  }
  std::vector<RelocationCommand> out;
  std::set<UavId> seen;
  for (auto& c : raw) {
    if (!stationed.contains(c.uav) || !seen.insert(c.uav).second) continue;
    c.issued_at = snapshot.taken_at;
    out.push_back(c);
  }
  return out;
}

std::vector<RelocationCommand> plan_random(const HapSnapshot& snapshot, Rng& rng) {
  const auto towns = towns_by_id(snapshot);
  std::vector<RelocationCommand> out;
  if (towns.empty()) return out;
  for (const auto* u : uavs_by_id(snapshot)) {
    if (!u->stationed()) continue;
    const auto* t = towns[rng.uniform_index(towns.size())];
    out.push_back({u->id, t->center, snapshot.taken_at});
  }
  return out;
}

double default_lb_decrement(const HapSnapshot& s) {
  double tasks = 0.0;
  double work = 0.0;
  for (const auto& t : s.towns) {
    tasks += static_cast<double>(t.task_count);
    work += static_cast<double>(t.task_count) * t.mean_cpu_demand;
  }
  const CpuRate cap = fleet_uav_capacity(s);
  if (tasks <= 0.0 || work <= 0.0 || cap <= 0.0) return 1.0;
  return cap * s.window / (work / tasks);
}

std::vector<std::pair<TownId, std::uint32_t>> load_balancing_targets(const HapSnapshot& s,
                                                                     double decrement) {
  const auto towns = towns_by_id(s);
  std::vector<std::pair<TownId, std::uint32_t>> targets;
  std::vector<double> working;
  for (const auto* t : towns) {
    targets.emplace_back(t->id, 0u);
    working.push_back(static_cast<double>(t->task_count));
  }
  if (towns.empty()) return targets;
  for (std::size_t i = 0; i < s.uav_states.size(); ++i) {
    // Strict '>' keeps the lowest id on ties because towns are id-sorted.
    std::size_t best = 0;
    for (std::size_t j = 1; j < working.size(); ++j) {
      if (working[j] > working[best]) best = j;
    }
    ++targets[best].second;
    working[best] = std::max(0.0, working[best] - decrement);
  }
  return targets;
}

std::vector<RelocationCommand> plan_load_balancing(const HapSnapshot& s, double decrement) {
  if (!(decrement > 0.0)) throw InvalidValue("load-balancing decrement must be > 0");
  const auto targets = load_balancing_targets(s, decrement);

  std::map<TownId, std::uint32_t> keep;
  std::vector<TownDemand> demands;
  std::map<TownId, std::uint32_t> present;
  for (const auto& u : s.uav_states) {
    if (u.town) ++present[*u.town];
  }
  for (const auto& [town, n] : targets) {
    keep[town] = n;
    demands.push_back({town, n, s.town(town)->center});
  }
  // Largest shortfall first.
  std::stable_sort(demands.begin(), demands.end(), [&](const auto& a, const auto& b) {
    const long sa = long(a.wanted) - long(present[a.town]);
    const long sb = long(b.wanted) - long(present[b.town]);
    return sa > sb;
  });
  return allocate(s, demands, keep);
}

std::vector<Position> uncovered_users(const HapSnapshot& snapshot) {
  std::vector<Position> out;
  out.reserve(snapshot.uncovered_users.size());
  for (const auto& u : snapshot.uncovered_users) out.push_back(u.position);
  return out;
}

std::vector<RelocationCommand> plan_emergency(const HapSnapshot& s,
                                              const policy::Emergency& config, Rng& rng) {
  const auto points = uncovered_users(s);
  if (points.empty()) return {};

  std::set<TownId> destroyed;
  for (const auto& t : s.towns) {
    if (t.destroyed()) destroyed.insert(t.id);
  }
  std::size_t k = config.k_override ? *config.k_override : destroyed.size();
  if (k == 0) return {};

  // UAVs already inside a disaster area stay where they are.
  std::vector<const UavView*> movable;
  for (const auto* u : uavs_by_id(s)) {
    if (!u->stationed()) continue;
    if (u->town && destroyed.contains(*u->town)) continue;
    movable.push_back(u);
  }
  if (movable.empty()) return {};

  k = std::min(k, points.size());
  const auto centroids = kmeans(points, k, config.kmeans_iters, rng);

  std::vector<RelocationCommand> out;
  for (std::size_t i = 0; i < movable.size(); ++i) {
    out.push_back({movable[i]->id, centroids[i % centroids.size()], s.taken_at});
  }
  return out;
}

TownLoadModel TownLoadModel::make(TownId town, double lambda, CpuUnits mean_cpu,
                                  CpuRate capacity, Seconds required_delay) {
  TownLoadModel m;
  m.town = town;
  m.lambda = lambda;
  m.mean_cpu = mean_cpu;
  m.capacity = capacity;
  m.mu = mean_cpu > 0.0 ? capacity / mean_cpu : std::numeric_limits<double>::infinity();
  m.required_delay = required_delay;
  return m;
}

std::optional<Seconds> mm1_response_time(const TownLoadModel& m) {
  if (m.mu <= m.lambda) return std::nullopt;
  return 1.0 / (m.mu - m.lambda);
}

CpuRate capacity_deficit(const TownLoadModel& m) {
  const auto rt = mm1_response_time(m);
  const bool delay_ok = rt && *rt <= m.required_delay;
  const bool load_ok = m.lambda * m.mean_cpu <= m.capacity;
  if (delay_ok && load_ok) return 0.0;
  const double mu_required = m.lambda + 1.0 / m.required_delay;
  const CpuRate capacity_required = mu_required * m.mean_cpu;
  return std::max(0.0, capacity_required - m.capacity);
}

std::uint32_t required_uavs(const TownLoadModel& m, CpuRate uav_capacity) {
  if (!(uav_capacity > 0.0)) throw InvalidValue("uav capacity must be > 0");
  const CpuRate deficit = capacity_deficit(m);
  if (deficit <= 0.0) return 0;
  return static_cast<std::uint32_t>(std::ceil(deficit / uav_capacity));
}

TownLoadModel lsi_model(const TownView& t) {
  return TownLoadModel::make(t.id, t.arrival_rate, t.mean_cpu_demand,
                             t.edge_operational ? t.edge_capacity : 0.0, t.min_required_delay);
}

std::vector<RelocationCommand> plan_lsi(const HapSnapshot& s) {
  const CpuRate uav_capacity = fleet_uav_capacity(s);
  if (uav_capacity <= 0.0) return {};

  struct Need {
    const TownView* town;
    std::uint32_t uavs;
    CpuRate deficit;
  };
  std::vector<Need> needs;
  std::map<TownId, std::uint32_t> keep;
  for (const auto* t : towns_by_id(s)) {
    const auto model = lsi_model(*t);
    const auto n = required_uavs(model, uav_capacity);
    keep[t->id] = n;
    if (n > 0) needs.push_back({t, n, capacity_deficit(model)});
  }
  std::stable_sort(needs.begin(), needs.end(),
                   [](const Need& a, const Need& b) { return a.deficit > b.deficit; });

  std::vector<TownDemand> demands;
  for (const auto& n : needs) demands.push_back({n.town->id, n.uavs, n.town->center});
  return allocate(s, demands, keep);
}

}  // namespace aircomp
