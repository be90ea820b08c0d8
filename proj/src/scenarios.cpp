#include "phasebal/scenarios.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "phasebal/error.hpp"

namespace phasebal::scenarios {

std::string_view name(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::s112233: return "112233";
    case Scheme::s123123: return "123123";
    case Scheme::s111: return "111";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view text) noexcept {
  if (text.starts_with('s')) text.remove_prefix(1);
  if (text == "112233") return Scheme::s112233;
  if (text == "123123") return Scheme::s123123;
  if (text == "111") return Scheme::s111;
  return std::nullopt;
}

Network build_test_feeder(std::size_t customer_count) {
  if (customer_count < 1) throw ConfigError("test feeder needs at least one customer");
  Network net;
  net.transformer_rating = kTransformerRating;
  net.buses.push_back({0, 0.0});
  for (std::size_t k = 1; k <= customer_count; ++k) {
    const double distance = kFirstSpan + kCustomerSpacing * static_cast<double>(k - 1);
    const BusId id = static_cast<BusId>(k);
    net.buses.push_back({id, distance});
    net.segments.push_back({id - 1, id, k == 1 ? kFirstSpan : kCustomerSpacing, net.trunk_conductor.resistance_per_m,
                            net.trunk_conductor.reactance_per_m, SegmentKind::trunk});
    char label[16];
    std::snprintf(label, sizeof label, "C%03zu", k);
    Customer c;
    c.id = label;
    c.bus = id;
    c.drop = ServiceDrop{0.0, net.drop_conductor};
    net.customers.push_back(std::move(c));
  }
  return net;
}

PhaseAssignment apply_scheme(const Network& network, Scheme scheme) {
  auto layout = GeneLayout::of(network);
  const std::size_t m = layout->size();

  auto distance = [&](std::size_t gene) {
    const auto& c = network.customers[layout->customer_index[gene]];
    const auto bus = network.bus_index(c.bus);
    return bus ? network.buses[*bus].distance_from_transformer : 0.0;
  };
  std::vector<std::size_t> by_distance(m);
  std::iota(by_distance.begin(), by_distance.end(), std::size_t{0});
  std::stable_sort(by_distance.begin(), by_distance.end(),
                   [&](std::size_t a, std::size_t b) { return distance(a) < distance(b); });

  std::vector<std::uint8_t> genes(m, 1);
  const std::size_t third = m / 3;
  for (std::size_t rank = 0; rank < m; ++rank) {
    int phase = 1;
    switch (scheme) {
      case Scheme::s112233: phase = rank < third ? 1 : rank < 2 * third ? 2 : 3; break;
      case Scheme::s123123: phase = static_cast<int>(rank % 3) + 1; break;
      case Scheme::s111: phase = 1; break;
    }
    genes[by_distance[rank]] = static_cast<std::uint8_t>(phase);
  }
  return PhaseAssignment(std::move(genes), std::move(layout));
}

Network build_scenario(Scheme scheme, std::size_t customer_count) {
  Network net = build_test_feeder(customer_count);
  return with_initial_phases(net, apply_scheme(net, scheme));
}

LoadProfile constant_profile(const Network& network, double p_watts, double q_fraction, std::size_t n) {
  if (!(p_watts >= 0.0)) throw ConfigError("active power must be non-negative");
  if (n < 1) throw ConfigError("profile needs at least one snapshot");
  LoadProfile profile;
  for (const auto& c : network.customers) profile.customer_ids.push_back(c.id);
  const Demand d{p_watts, p_watts * q_fraction};
  for (std::size_t k = 0; k < n; ++k)
    profile.snapshots.push_back({std::to_string(k), std::vector<Demand>(network.customers.size(), d)});
  return profile;
}

}  // namespace phasebal::scenarios
