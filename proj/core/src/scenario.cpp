#include "aircomp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

namespace aircomp {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Profile ids: initial populations 0..P-1, then spawn events in order.
void assign_profile_ids(Scenario& s) {
  std::uint32_t next = 0;
  for (auto& p : s.populations) p.profile.id = next++;
  for (auto& e : s.events) {
    if (auto* spawn = std::get_if<SpawnUsers>(&e.kind)) spawn->population.profile.id = next++;
  }
}

// --- serialisation ---------------------------------------------------------

json profile_fields(const PopulationSpec& p) {
  return {{"town", p.town},
          {"count", p.count},
          {"cpu_demand", p.profile.cpu_demand},
          {"worst_case_delay", p.profile.worst_case_delay},
          {"mean_interarrival", p.profile.mean_interarrival}};
}

json to_json_value(const Scenario& s) {
  json j;
  j["sim"] = {{"duration", s.sim.duration},
              {"policy_tick_period", s.sim.policy_tick_period},
              {"metrics_bucket", s.sim.metrics_bucket},
              {"seed", s.sim.rng_seed},
              {"deterministic_arrivals", s.sim.deterministic_arrivals},
              {"wlan_round_trip", s.sim.wlan_round_trip}};
  j["towns"] = json::array();
  for (const auto& t : s.towns) {
    json town = {{"id", t.id},
                 {"center_x", t.center.x},
                 {"center_y", t.center.y},
                 {"radius", t.radius}};
    if (t.edge) town["edge"] = {{"capacity", t.edge->capacity}, {"wlan_delay", t.edge->wlan_delay}};
    j["towns"].push_back(std::move(town));
  }
  j["uavs"] = {{"count", s.uavs.count},
               {"capacity", s.uavs.capacity},
               {"coverage_radius", s.uavs.coverage_radius},
               {"altitude", s.uavs.altitude},
               {"speed", s.uavs.speed},
               {"wlan_delay", s.uavs.wlan_delay},
               {"depot_x", s.uavs.depot.x},
               {"depot_y", s.uavs.depot.y}};
  j["populations"] = json::array();
  for (const auto& p : s.populations) {
    auto pop = profile_fields(p);
    pop["active_from"] = p.active_from;
    j["populations"].push_back(std::move(pop));
  }
  j["events"] = json::array();
  for (const auto& e : s.events) {
    json ev;
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, DestroyEdge>) {
            ev = {{"at", e.at}, {"kind", "destroy_edge"}, {"town", k.town}};
          } else if constexpr (std::is_same_v<T, SetInterarrival>) {
            ev = {{"at", e.at},
                  {"kind", "set_interarrival"},
                  {"town", k.town},
                  {"mean_interarrival", k.mean_interarrival}};
          } else {
            ev = profile_fields(k.population);
            ev["at"] = e.at;
            ev["kind"] = "spawn_users";
          }
        },
        e.kind);
    j["events"].push_back(std::move(ev));
  }
  return j;
}

// --- parsing ---------------------------------------------------------------

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  double number(const char* key) {
    const auto& v = at(key);
    if (!v.is_number()) throw ParseError(field(key) + ": expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const char* key) {
    const auto& v = at(key);
    if (!v.is_number_unsigned()) throw ParseError(field(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const char* key) {
    const auto& v = at(key);
    if (!v.is_string()) throw ParseError(field(key) + ": expected a string");
    return v.get<std::string>();
  }

  bool flag(const char* key, bool fallback) {
    if (!obj_.contains(key)) {
      seen_.insert(key);
      return fallback;
    }
    const auto& v = at(key);
    if (!v.is_boolean()) throw ParseError(field(key) + ": expected true or false");
    return v.get<bool>();
  }

  const json* optional(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  const json& at(const char* key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ParseError(field(key) + ": missing");
    return obj_.at(key);
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [k, _] : obj_.items()) {
      if (!seen_.contains(k)) throw ParseError(path_ + ": unknown key '" + k + "'");
    }
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

PopulationSpec read_population(Reader& r) {
  PopulationSpec p;
  p.town = r.text("town");
  p.count = static_cast<std::uint32_t>(r.count("count"));
  p.profile.cpu_demand = r.number("cpu_demand");
  p.profile.worst_case_delay = r.number("worst_case_delay");
  p.profile.mean_interarrival = r.number("mean_interarrival");
  return p;
}

const json& array_at(Reader& r, const char* key) {
  const auto& v = r.at(key);
  if (!v.is_array()) throw ParseError(r.field(key) + ": expected an array");
  return v;
}

Scenario from_json_value(const json& j) {
  Scenario s;
  Reader root(j, "scenario");

  {
    Reader r(root.at("sim"), "sim");
    s.sim.duration = r.number("duration");
    s.sim.policy_tick_period = r.number("policy_tick_period");
    s.sim.metrics_bucket = r.number("metrics_bucket");
    s.sim.rng_seed = r.count("seed");
    s.sim.deterministic_arrivals = r.flag("deterministic_arrivals", false);
    s.sim.wlan_round_trip = r.flag("wlan_round_trip", false);
    r.finish();
  }

  const auto& towns = array_at(root, "towns");
  for (std::size_t i = 0; i < towns.size(); ++i) {
    Reader r(towns[i], "towns[" + std::to_string(i) + "]");
    TownSpec t;
    t.id = r.text("id");
    t.center = {r.number("center_x"), r.number("center_y")};
    t.radius = r.number("radius");
    if (const auto* edge = r.optional("edge")) {
      Reader er(*edge, r.field("edge"));
      t.edge = EdgeSpec{er.number("capacity"), er.number("wlan_delay")};
      er.finish();
    }
    r.finish();
    s.towns.push_back(std::move(t));
  }

  {
    Reader r(root.at("uavs"), "uavs");
    s.uavs.count = static_cast<std::uint32_t>(r.count("count"));
    s.uavs.capacity = r.number("capacity");
    s.uavs.coverage_radius = r.number("coverage_radius");
    s.uavs.altitude = r.number("altitude");
    s.uavs.speed = r.number("speed");
    s.uavs.wlan_delay = r.number("wlan_delay");
    s.uavs.depot = {r.number("depot_x"), r.number("depot_y")};
    r.finish();
  }

  const auto& pops = array_at(root, "populations");
  for (std::size_t i = 0; i < pops.size(); ++i) {
    Reader r(pops[i], "populations[" + std::to_string(i) + "]");
    auto p = read_population(r);
    p.active_from = r.number("active_from");
    r.finish();
    s.populations.push_back(std::move(p));
  }

  const auto& events = array_at(root, "events");
  for (std::size_t i = 0; i < events.size(); ++i) {
    Reader r(events[i], "events[" + std::to_string(i) + "]");
    TimedEvent e;
    e.at = r.number("at");
    const auto kind = r.text("kind");
    if (kind == "destroy_edge") {
      e.kind = DestroyEdge{r.text("town")};
    } else if (kind == "set_interarrival") {
      e.kind = SetInterarrival{r.text("town"), r.number("mean_interarrival")};
    } else if (kind == "spawn_users") {
      auto p = read_population(r);
      p.active_from = e.at;
      e.kind = SpawnUsers{std::move(p)};
    } else {
      throw ParseError(r.field("kind") + ": unknown event kind '" + kind +
                       "' (expected destroy_edge, set_interarrival, spawn_users)");
    }
    r.finish();
    s.events.push_back(std::move(e));
  }
  root.finish();

  assign_profile_ids(s);
  return s;
}

bool finite(double v) { return std::isfinite(v); }

void check_profile(const ApplicationProfile& p, const std::string& where,
                   std::vector<std::string>& out) {
  if (!(finite(p.cpu_demand) && p.cpu_demand > 0)) out.push_back(where + ".cpu_demand must be > 0");
  if (!(finite(p.worst_case_delay) && p.worst_case_delay > 0)) {
    out.push_back(where + ".worst_case_delay must be > 0");
  }
  if (!(finite(p.mean_interarrival) && p.mean_interarrival > 0)) {
    out.push_back(where + ".mean_interarrival must be > 0");
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error("invalid scenario: " + join(violations, "; ")), violations_(std::move(violations)) {}

void validate(const Scenario& s) {
  std::vector<std::string> v;

  if (!(finite(s.sim.duration) && s.sim.duration > 0)) v.push_back("sim.duration must be > 0");
  if (!(finite(s.sim.policy_tick_period) && s.sim.policy_tick_period > 0)) {
    v.push_back("sim.policy_tick_period must be > 0");
  }
  if (!(finite(s.sim.metrics_bucket) && s.sim.metrics_bucket > 0)) {
    v.push_back("sim.metrics_bucket must be > 0");
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < s.towns.size(); ++i) {
    const auto& t = s.towns[i];
    const std::string where = "towns[" + std::to_string(i) + "]";
    if (t.id.empty()) v.push_back(where + ".id must not be empty");
    if (t.id == "ALL") v.push_back(where + ".id 'ALL' is reserved");
    if (!ids.insert(t.id).second) v.push_back(where + ".id '" + t.id + "' is duplicated");
    if (!(finite(t.center.x) && finite(t.center.y))) v.push_back(where + ".center must be finite");
    if (!(finite(t.radius) && t.radius > 0)) v.push_back(where + ".radius must be > 0");
    if (t.edge) {
      if (!(finite(t.edge->capacity) && t.edge->capacity > 0)) {
        v.push_back(where + ".edge.capacity must be > 0");
      }
      if (!(finite(t.edge->wlan_delay) && t.edge->wlan_delay >= 0)) {
        v.push_back(where + ".edge.wlan_delay must be >= 0");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = s.towns[j];
      if (horizontal_distance(t.center, o.center) <= t.radius + o.radius) {
        v.push_back("towns '" + o.id + "' and '" + t.id + "' overlap");
      }
    }
  }

  const auto& u = s.uavs;
  if (!(finite(u.capacity) && u.capacity > 0)) v.push_back("uavs.capacity must be > 0");
  if (!(finite(u.coverage_radius) && u.coverage_radius > 0)) {
    v.push_back("uavs.coverage_radius must be > 0");
  }
  if (!(finite(u.speed) && u.speed > 0)) v.push_back("uavs.speed must be > 0");
  if (!(finite(u.altitude) && u.altitude >= 0)) v.push_back("uavs.altitude must be >= 0");
  if (!(finite(u.wlan_delay) && u.wlan_delay >= 0)) v.push_back("uavs.wlan_delay must be >= 0");
  if (!(finite(u.depot.x) && finite(u.depot.y))) v.push_back("uavs.depot must be finite");

  for (std::size_t i = 0; i < s.populations.size(); ++i) {
    const auto& p = s.populations[i];
    const std::string where = "populations[" + std::to_string(i) + "]";
    if (!ids.contains(p.town)) v.push_back(where + ".town '" + p.town + "' is not a known town");
    check_profile(p.profile, where, v);
    if (!(finite(p.active_from) && p.active_from >= 0)) {
      v.push_back(where + ".active_from must be >= 0");
    }
  }

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    const std::string where = "events[" + std::to_string(i) + "]";
    if (!(finite(e.at) && e.at >= 0 && e.at <= s.sim.duration)) {
      v.push_back(where + ".at must lie within [0, sim.duration]");
    }
    auto check_town = [&](const std::string& town) {
      if (!ids.contains(town)) v.push_back(where + ".town '" + town + "' is not a known town");
    };
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, DestroyEdge>) {
            check_town(k.town);
          } else if constexpr (std::is_same_v<T, SetInterarrival>) {
            check_town(k.town);
            if (!(finite(k.mean_interarrival) && k.mean_interarrival > 0)) {
              v.push_back(where + ".mean_interarrival must be > 0");
            }
          } else {
            check_town(k.population.town);
            check_profile(k.population.profile, where, v);
          }
        },
        e.kind);
  }

  if (!v.empty()) throw ValidationError(std::move(v));
}

std::string serialize_scenario(const Scenario& s) { return to_json_value(s).dump(2) + "\n"; }

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario syntax error: ") + e.what());
  }
  auto s = from_json_value(j);
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write scenario file " + path.string());
  out << serialize_scenario(scenario);
}

Scenario apply_overrides(const Scenario& scenario,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j = to_json_value(scenario);
  std::vector<std::string> errors;

  for (const auto& [key, value] : overrides) {
    json* node = &j;
    std::istringstream parts(key);
    std::string part;
    bool ok = !key.empty();
    while (ok && std::getline(parts, part, '.')) {
      if (node->is_object()) {
        if (!node->contains(part)) {
          ok = false;
          break;
        }
        node = &(*node)[part];
      } else if (node->is_array()) {
        json* found = nullptr;
        for (auto& el : *node) {
          if (el.is_object() && el.contains("id") && el["id"] == part) found = &el;
        }
        if (!found && !part.empty() &&
            part.find_first_not_of("0123456789") == std::string::npos &&
            std::stoul(part) < node->size()) {
          found = &(*node)[std::stoul(part)];
        }
        if (!found) ok = false;
        node = found;
      } else {
        ok = false;
      }
    }
    if (!ok || node->is_object() || node->is_array()) {
      errors.push_back("unknown override key '" + key + "'");
      continue;
    }

    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    if (node->is_number() != parsed.is_number() || node->is_boolean() != parsed.is_boolean() ||
        node->is_string() != parsed.is_string()) {
      errors.push_back("override '" + key + "': value '" + value + "' has the wrong type");
      continue;
    }
    if (node->is_number_unsigned() && !parsed.is_number_unsigned()) {
      errors.push_back("override '" + key + "': expects a non-negative integer");
      continue;
    }
    *node = parsed;
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  Scenario out;
  try {
    out = from_json_value(j);
  } catch (const ParseError& e) {
    throw ValidationError({e.what()});
  }
  validate(out);
  return out;
}

Scenario build_default_earthquake(std::uint32_t users_per_town) {
  if (users_per_town < 1) throw InvalidValue("users_per_town must be >= 1");

  Scenario s;
  s.sim = SimConfig{};
  for (int i = 0; i < 3; ++i) {
    TownSpec t;
    t.id = "T" + std::to_string(i + 1);
    t.center = {3000.0 * i, 0.0};
    t.radius = 80.0;
    t.edge = EdgeSpec{100000.0, 0.001};
    s.towns.push_back(t);
  }
  s.uavs = UavFleetSpec{};

  auto population = [&](const char* town, CpuUnits cpu, Seconds budget, Seconds interarrival,
                        Seconds from) {
    PopulationSpec p;
    p.town = town;
    p.count = users_per_town;
    p.profile.cpu_demand = cpu;
    p.profile.worst_case_delay = budget;
    p.profile.mean_interarrival = interarrival;
    p.active_from = from;
    return p;
  };

  s.populations = {population("T1", 90, 1, 3.33, 0), population("T2", 90, 1, 3.33, 0),
                   population("T3", 90, 2, 3.33, 0)};

  s.events.push_back({1000.0, DestroyEdge{"T1"}});
  for (const char* town : {"T1", "T2", "T3"}) {
    s.events.push_back({1000.0, SetInterarrival{town, 1.0}});
  }
  s.events.push_back({2000.0, SpawnUsers{population("T1", 90, 1, 1, 2000)}});
  s.events.push_back({2000.0, SpawnUsers{population("T2", 90, 1, 1, 2000)}});
  s.events.push_back({2000.0, SpawnUsers{population("T3", 12, 5, 1, 2000)}});

  assign_profile_ids(s);
  return s;
}

Position place_user(const Town& town, std::uint64_t seed, UserId user) {
  Rng rng(derive_seed(seed, Stream::Placement, user.value));
  const double r = town.radius * std::sqrt(rng.uniform01());
  const double theta = 2.0 * std::numbers::pi * rng.uniform01();
  return {town.center.x + r * std::cos(theta), town.center.y + r * std::sin(theta)};
}

namespace {

void add_users(WorldState& world, const PopulationSpec& p, TownId town, Seconds active_from,
               std::vector<UserId>* created) {
  for (std::uint32_t i = 0; i < p.count; ++i) {
    User u;
    u.id = UserId{static_cast<std::uint32_t>(world.users.size())};
    u.town = town;
    u.position = place_user(world.town(town), world.seed, u.id);
    u.profile = p.profile;
    u.active_from = active_from;
    if (created) created->push_back(u.id);
    world.users.push_back(u);
  }
}

}  // namespace

WorldState build_world(const Scenario& s) {
  validate(s);
  WorldState w;
  w.seed = s.sim.rng_seed;
  w.wlan_round_trip = s.sim.wlan_round_trip;

  for (const auto& spec : s.towns) {
    Town t;
    t.id = TownId{static_cast<std::uint32_t>(w.towns.size())};
    t.name = spec.id;
    t.center = spec.center;
    t.radius = spec.radius;
    if (spec.edge) {
      EdgeServer e;
      e.id = EdgeId{static_cast<std::uint32_t>(w.edges.size())};
      e.town = t.id;
      e.capacity = spec.edge->capacity;
      e.wlan_delay = spec.edge->wlan_delay;
      e.queue = FifoServer(spec.edge->capacity);
      t.edge_server = e.id;
      w.edges.push_back(std::move(e));
    }
    w.towns.push_back(std::move(t));
  }

  for (const auto& p : s.populations) add_users(w, p, *w.find_town(p.town), p.active_from, nullptr);

  for (std::uint32_t i = 0; i < s.uavs.count; ++i) {
    Uav u;
    u.id = UavId{i};
    u.position = s.uavs.depot;
    u.altitude = s.uavs.altitude;
    u.capacity = s.uavs.capacity;
    u.coverage_radius = s.uavs.coverage_radius;
    u.speed = s.uavs.speed;
    u.wlan_delay = s.uavs.wlan_delay;
    u.queue = FifoServer(s.uavs.capacity);
    w.uavs.push_back(std::move(u));
  }

  w.timeline = s.events;
  return w;
}

EventEffects apply_event(WorldState& world, const TimedEvent& event) {
  EventEffects fx;
  auto resolve = [&](const std::string& name) {
    const auto id = world.find_town(name);
    if (!id) throw UnknownTown("unknown town '" + name + "'");
    return *id;
  };

  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, DestroyEdge>) {
          auto& town = world.town(resolve(k.town));
          if (!town.edge_server) return;
          auto& edge = world.edge(*town.edge_server);
          edge.operational = false;
          for (auto& entry : edge.queue.drain()) {
            entry.task.fail_no_resource(world.clock);
            fx.failed.push_back(std::move(entry.task));
          }
        } else if constexpr (std::is_same_v<T, SetInterarrival>) {
          const auto town = resolve(k.town);
          for (auto& u : world.users) {
            if (u.town == town) u.profile.mean_interarrival = k.mean_interarrival;
          }
        } else {
          const auto town = resolve(k.population.town);
          add_users(world, k.population, town, std::max(k.population.active_from, event.at),
                    &fx.spawned);
        }
      },
      event.kind);
  return fx;
}

}  // namespace aircomp
