#pragma once

// Test-only builders and independent oracles. Nothing here calls into the
// solver or the metrics code paths it is used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "phasebal/network.hpp"

namespace phasebal::testing {

// Bus 0, one trunk segment to bus 1, one customer at bus 1.
inline Network two_bus(double length, Conductor trunk, double drop_length = 0.0,
                       Conductor drop = kDefaultDropConductor, int phase = 1) {
  Network net;
  net.buses = {{0, 0.0}, {1, length}};
  net.segments = {{0, 1, length, trunk.resistance_per_m, trunk.reactance_per_m, SegmentKind::trunk}};
  Customer c;
  c.id = "solo";
  c.bus = 1;
  c.initial_phase = PhaseId(phase);
  c.drop = {drop_length, drop};
  net.customers = {c};
  return net;
}

// Meter voltage of a constant-power load behind impedance z from an ideal
// source v0: the high root of |V|^4 + (2(PR + QX) - V0^2)|V|^2 + |Z|^2|S|^2 = 0,
// with the angle from V = V0 - Z conj(S / V).
inline std::complex<double> two_bus_voltage(double v0, std::complex<double> z, std::complex<double> s) {
  const double r = z.real(), x = z.imag(), p = s.real(), q = s.imag();
  const double b = v0 * v0 - 2.0 * (p * r + q * x);
  const double disc = b * b - 4.0 * std::norm(z) * std::norm(s);
  const double mag2 = 0.5 * (b + std::sqrt(disc));
  // With |V| known: V0 - V = Z conj(S) / conj(V); conj(V) = |V|^2 / V gives
  // V0 - V = Z conj(S) V / |V|^2, i.e. V (1 + Z conj(S) / |V|^2) = V0.
  return v0 / (1.0 + z * std::conj(s) / mag2);
}

// Linear feeder: customer k on bus k at 20 + 10 (k - 1) m, given loads and phases.
inline Network line_feeder(const std::vector<int>& phases, double spacing = 10.0) {
  Network net;
  net.transformer_rating = 250.0;
  net.buses.push_back({0, 0.0});
  for (std::size_t k = 1; k <= phases.size(); ++k) {
    const BusId id = static_cast<BusId>(k);
    const double d = 20.0 + spacing * static_cast<double>(k - 1);
    net.buses.push_back({id, d});
    net.segments.push_back({id - 1, id, k == 1 ? 20.0 : spacing, kDefaultTrunkConductor.resistance_per_m,
                            kDefaultTrunkConductor.reactance_per_m, SegmentKind::trunk});
    Customer c;
    c.id = "K" + std::to_string(k);
    c.bus = id;
    c.initial_phase = PhaseId(phases[k - 1]);
    net.customers.push_back(c);
  }
  return net;
}

inline LoadProfile profile_of(const Network& net, const std::vector<std::vector<Demand>>& snapshots) {
  LoadProfile prof;
  for (const auto& c : net.customers) prof.customer_ids.push_back(c.id);
  for (std::size_t k = 0; k < snapshots.size(); ++k) prof.snapshots.push_back({std::to_string(k), snapshots[k]});
  return prof;
}

// Random radial tree: every bus hangs from a random earlier bus; some drops
// have a length, and a few customers are locked.
inline Network random_tree(std::mt19937_64& rng, std::size_t buses, std::size_t customers) {
  std::uniform_real_distribution<double> len(5.0, 40.0), r(0.5e-3, 3e-3), x(0.0, 0.3e-3), drop(0.0, 30.0);
  std::uniform_int_distribution<int> phase(1, 3);
  Network net;
  net.buses.push_back({0, 0.0});
  for (std::size_t b = 1; b < buses; ++b) {
    std::uniform_int_distribution<std::size_t> up(0, b - 1);
    const std::size_t parent = up(rng);
    const double l = len(rng);
    net.buses.push_back({static_cast<BusId>(b), net.buses[parent].distance_from_transformer + l});
    net.segments.push_back({static_cast<BusId>(parent), static_cast<BusId>(b), l, r(rng), x(rng), SegmentKind::trunk});
  }
  std::uniform_int_distribution<std::size_t> where(0, buses - 1);
  for (std::size_t c = 0; c < customers; ++c) {
    Customer cust;
    cust.id = "R" + std::to_string(c);
    cust.bus = static_cast<BusId>(where(rng));
    cust.initial_phase = PhaseId(phase(rng));
    cust.movable = (c % 5) != 4;
    cust.drop.length = (c % 3 == 0) ? drop(rng) : 0.0;
    net.customers.push_back(cust);
  }
  return net;
}

inline std::vector<Demand> random_demand(std::mt19937_64& rng, std::size_t n, double p_max = 2000.0) {
  std::uniform_real_distribution<double> p(0.0, p_max), pf(-0.3, 0.5);
  std::vector<Demand> out(n);
  for (auto& d : out) {
    d.active_power = p(rng);
    d.reactive_power = d.active_power * pf(rng);
  }
  return out;
}

}  // namespace phasebal::testing
