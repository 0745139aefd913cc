#include "aircomp/world.hpp"

namespace aircomp {

std::optional<TownId> WorldState::find_town(std::string_view name) const {
  for (const auto& t : towns) {
    if (t.name == name) return t.id;
  }
  return std::nullopt;
}

std::optional<TownId> WorldState::town_at(const Position& p) const {
  for (const auto& t : towns) {
    if (t.contains(p)) return t.id;
  }
  return std::nullopt;
}

std::optional<TownId> WorldState::uav_town(const Uav& uav) const {
  if (const auto* f = std::get_if<Flying>(&uav.flight_state)) return town_at(f->destination);
  return town_at(uav.position);
}

const EdgeServer* WorldState::operational_edge(TownId town_id) const {
  const auto& t = town(town_id);
  if (!t.edge_server) return nullptr;
  const auto& e = edge(*t.edge_server);
  return e.operational ? &e : nullptr;
}

}  // namespace aircomp
