#include "phasebal/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "phasebal/error.hpp"

namespace phasebal {

PhaseId::PhaseId(int value) : value_(value) {
  if (value < 1 || value > kCount)
    throw std::invalid_argument("phase must be 1, 2 or 3, got " + std::to_string(value));
}

std::optional<PhaseId> PhaseId::parse(int value) noexcept {
  if (value < 1 || value > kCount) return std::nullopt;
  return PhaseId(value);
}

std::optional<std::size_t> Network::bus_index(BusId id) const {
  if (id >= 0 && static_cast<std::size_t>(id) < buses.size() && buses[static_cast<std::size_t>(id)].id == id)
    return static_cast<std::size_t>(id);
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return i;
  return std::nullopt;
}

std::optional<std::size_t> Network::customer_index(const std::string& id) const {
  for (std::size_t i = 0; i < customers.size(); ++i)
    if (customers[i].id == id) return i;
  return std::nullopt;
}

std::size_t Network::movable_count() const {
  return static_cast<std::size_t>(
      std::count_if(customers.begin(), customers.end(), [](const Customer& c) { return c.movable; }));
}

std::string describe(const Violation& v) {
  static constexpr const char* kNames[] = {"network", "bus", "segment", "customer"};
  std::ostringstream os;
  os << kNames[static_cast<int>(v.entity)];
  if (v.entity != Entity::network) os << ' ' << v.index;
  os << ": " << v.message;
  return os.str();
}

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

std::vector<Violation> validate(const Network& network) {
  std::vector<Violation> out;
  auto report = [&out](Entity e, std::size_t i, std::string msg) {
    out.push_back({e, i, std::move(msg)});
  };

  if (!(network.source_phase_voltage > 0.0) || !finite(network.source_phase_voltage))
    report(Entity::network, 0, "source phase voltage must be positive");
  if (network.customers.empty()) report(Entity::network, 0, "network has no customers");

  std::unordered_map<BusId, std::size_t> bus_pos;
  bool has_root = false;
  for (std::size_t i = 0; i < network.buses.size(); ++i) {
    const Bus& b = network.buses[i];
    if (!bus_pos.emplace(b.id, i).second) {
      report(Entity::bus, i, "duplicate bus id " + std::to_string(b.id));
      continue;
    }
    if (!(b.distance_from_transformer >= 0.0) || !finite(b.distance_from_transformer))
      report(Entity::bus, i, "bus " + std::to_string(b.id) + " has a negative distance");
    if (b.id < 0) report(Entity::bus, i, "bus id " + std::to_string(b.id) + " is negative");
    if (b.id == 0) {
      has_root = true;
      if (b.distance_from_transformer != 0.0)
        report(Entity::bus, i, "bus 0 (transformer busbar) must be at distance 0");
    }
  }
  if (!has_root) report(Entity::network, 0, "bus 0 (transformer busbar) is missing");

  std::unordered_map<BusId, std::size_t> parent_segment;
  for (std::size_t i = 0; i < network.segments.size(); ++i) {
    const LineSegment& s = network.segments[i];
    const std::string name =
        "segment " + std::to_string(s.from_bus) + "->" + std::to_string(s.to_bus);
    auto from = bus_pos.find(s.from_bus);
    auto to = bus_pos.find(s.to_bus);
    if (from == bus_pos.end() || to == bus_pos.end()) {
      report(Entity::segment, i, name + " references a nonexistent bus");
      continue;
    }
    if (!(s.length > 0.0) || !finite(s.length)) report(Entity::segment, i, name + " length must be positive");
    if (!(s.resistance_per_m > 0.0) || !finite(s.resistance_per_m))
      report(Entity::segment, i, name + " resistance must be positive");
    if (!(s.reactance_per_m >= 0.0) || !finite(s.reactance_per_m))
      report(Entity::segment, i, name + " reactance must be non-negative");
    if (s.from_bus >= s.to_bus) {
      report(Entity::segment, i, name + " must point away from the transformer (from < to)");
      continue;
    }
    if (!parent_segment.emplace(s.to_bus, i).second) {
      report(Entity::segment, i, name + " closes a cycle: bus " + std::to_string(s.to_bus) + " is already fed");
      continue;
    }
    if (s.kind == SegmentKind::trunk) {
      const double d_from = network.buses[from->second].distance_from_transformer;
      const double d_to = network.buses[to->second].distance_from_transformer;
      if (!(d_to > d_from))
        report(Entity::segment, i, name + " trunk distance does not increase");
    }
  }
  for (std::size_t i = 0; i < network.buses.size(); ++i) {
    const BusId id = network.buses[i].id;
    if (id != 0 && bus_pos.at(id) == i && !parent_segment.contains(id))
      report(Entity::bus, i, "bus " + std::to_string(id) + " is unreachable from the transformer");
  }

  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < network.customers.size(); ++i) {
    const Customer& c = network.customers[i];
    const std::string name = "customer '" + c.id + "'";
    if (c.id.empty()) report(Entity::customer, i, "customer id is empty");
    if (!ids.insert(c.id).second) report(Entity::customer, i, name + " is duplicated");
    if (!bus_pos.contains(c.bus))
      report(Entity::customer, i, name + " references nonexistent bus " + std::to_string(c.bus));
    if (!(c.drop.length >= 0.0) || !finite(c.drop.length))
      report(Entity::customer, i, name + " drop length must be non-negative");
    if (!(c.drop.conductor.resistance_per_m > 0.0) || !(c.drop.conductor.reactance_per_m >= 0.0))
      report(Entity::customer, i, name + " drop conductor impedance is invalid");
  }
  return out;
}

std::vector<BusId> trunk_buses(const Network& network) {
  std::unordered_set<BusId> reached{0};
  // Segments point to higher ids, so one pass in ascending from_bus order suffices.
  std::vector<const LineSegment*> trunk;
  for (const auto& s : network.segments)
    if (s.kind == SegmentKind::trunk) trunk.push_back(&s);
  std::stable_sort(trunk.begin(), trunk.end(),
                   [](const LineSegment* a, const LineSegment* b) { return a->from_bus < b->from_bus; });
  for (const LineSegment* s : trunk)
    if (reached.contains(s->from_bus)) reached.insert(s->to_bus);

  std::vector<BusId> out;
  for (const auto& b : network.buses)
    if (reached.contains(b.id)) out.push_back(b.id);
  return out;
}

BusId end_of_line_bus(const Network& network) {
  BusId best = 0;
  double best_distance = -1.0;
  for (BusId id : trunk_buses(network)) {
    const auto idx = network.bus_index(id);
    if (!idx) continue;
    const double d = network.buses[*idx].distance_from_transformer;
    if (d > best_distance || (d == best_distance && id > best)) {
      best = id;
      best_distance = d;
    }
  }
  return best;
}

std::vector<std::string> validate_profile(const Network& network, const LoadProfile& profile) {
  std::vector<std::string> out;
  if (profile.snapshots.empty()) out.emplace_back("profile has no snapshots");

  std::unordered_set<std::string> ids;
  for (const auto& id : profile.customer_ids)
    if (!ids.insert(id).second) out.push_back("customer '" + id + "' appears twice in the profile");
  for (const auto& c : network.customers)
    if (!ids.contains(c.id)) out.push_back("customer '" + c.id + "' has no demand in the profile");
  for (const auto& id : profile.customer_ids)
    if (!network.customer_index(id)) out.push_back("profile customer '" + id + "' is not in the network");

  for (std::size_t k = 0; k < profile.snapshots.size(); ++k) {
    const auto& snap = profile.snapshots[k];
    if (snap.demand.size() != profile.customer_ids.size()) {
      out.push_back("snapshot " + std::to_string(k) + " does not cover every customer");
      continue;
    }
    for (std::size_t i = 0; i < snap.demand.size(); ++i) {
      const Demand& d = snap.demand[i];
      if (!(d.active_power >= 0.0) || !finite(d.active_power) || !finite(d.reactive_power))
        out.push_back("snapshot " + std::to_string(k) + " customer '" + profile.customer_ids[i] +
                      "' has invalid demand");
    }
  }
  return out;
}

LoadProfile align_profile(const Network& network, const LoadProfile& profile) {
  const auto problems = validate_profile(network, profile);
  if (!problems.empty()) throw Error("profile does not match network: " + problems.front());

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < profile.customer_ids.size(); ++i) column.emplace(profile.customer_ids[i], i);

  LoadProfile out;
  out.customer_ids.reserve(network.customers.size());
  std::vector<std::size_t> order;
  order.reserve(network.customers.size());
  for (const auto& c : network.customers) {
    out.customer_ids.push_back(c.id);
    order.push_back(column.at(c.id));
  }
  out.snapshots.reserve(profile.snapshots.size());
  for (const auto& snap : profile.snapshots) {
    LoadSnapshot s{snap.timestamp, {}};
    s.demand.reserve(order.size());
    for (std::size_t j : order) s.demand.push_back(snap.demand[j]);
    out.snapshots.push_back(std::move(s));
  }
  return out;
}

}  // namespace phasebal
