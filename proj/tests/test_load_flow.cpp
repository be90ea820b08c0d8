#include <doctest.h>

#include <cmath>
#include <random>

#include "phasebal/error.hpp"
#include "phasebal/load_flow.hpp"
#include "phasebal/scenarios.hpp"
#include "support.hpp"

using namespace phasebal;

namespace {

constexpr SolverOptions kTight{1e-13, 200};

LoadSnapshot snapshot_of(std::vector<Demand> d) { return {"0", std::move(d)}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Complex power delivered by the source on one phase minus the loads and the
// I^2 Z losses on that phase.
std::complex<double> power_residual(const Network& net, const std::vector<PhaseId>& phases,
                                    const LoadSnapshot& snap, const PowerFlowResult& res, std::size_t ph,
                                    double* scale) {
  const std::complex<double> v0(net.source_phase_voltage, 0.0);
  std::complex<double> supplied = v0 * std::conj(res.transformer_current[ph]);
  std::complex<double> consumed = 0.0;
  for (std::size_t s = 0; s < net.segments.size(); ++s) {
    const auto& seg = net.segments[s];
    const std::complex<double> z(seg.length * seg.resistance_per_m, seg.length * seg.reactance_per_m);
    consumed += z * std::norm(res.segment_current[s][ph]);
  }
  for (std::size_t c = 0; c < net.customers.size(); ++c) {
    const auto& d = net.customers[c].drop;
    const std::complex<double> z(d.length * d.conductor.resistance_per_m, d.length * d.conductor.reactance_per_m);
    consumed += z * std::norm(res.drop_current[c][ph]);
    if (phases[c].index() == ph)
      consumed += std::complex<double>(snap.demand[c].active_power, snap.demand[c].reactive_power);
  }
  *scale = std::abs(supplied);
  return supplied - consumed;
}

}  // namespace

TEST_CASE("dead feeder sits at the source voltage") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s112233);
  const LoadProfile prof = scenarios::constant_profile(net, 0.0);
  const PowerFlowResult r = solve_snapshot(net, initial_assignment(net), prof.snapshots[0]);
  for (const auto& bus : r.bus_voltage)
    for (auto v : bus) CHECK(v == std::complex<double>(230.9, 0.0));
  for (auto i : r.transformer_current) CHECK(i == std::complex<double>(0.0, 0.0));
  CHECK(r.converged);
  CHECK(r.iterations == 1);
}

TEST_CASE("two-bus circuit matches the closed form") {
  SUBCASE("200 W + 20 var behind 20 m of trunk") {
    const Network net = testing::two_bus(20.0, kDefaultTrunkConductor);
    const auto r = solve_snapshot(net, initial_assignment(net), snapshot_of({{200.0, 20.0}}), kTight);
    const std::complex<double> z(20.0 * 1.91e-3, 20.0 * 0.10e-3);
    const auto expect = testing::two_bus_voltage(230.9, z, {200.0, 20.0});
    CHECK(rel(std::abs(r.customer_voltage[0][0]), std::abs(expect)) < 1e-9);
    CHECK(std::abs(r.customer_voltage[0][0] - expect) / std::abs(expect) < 1e-9);
    // |dV| = |I| |Z| at the fixed point.
    CHECK(rel(std::abs(230.9 - r.customer_voltage[0][0]), std::abs(r.transformer_current[0]) * std::abs(z)) < 1e-9);
  }
  SUBCASE("random impedances, loads, drops and phases") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> len(1.0, 300.0), p(0.0, 20000.0), pf(-0.5, 0.5), drop(0.0, 50.0);
    std::uniform_int_distribution<int> phase(1, 3);
    for (int trial = 0; trial < 200; ++trial) {
      const double l = len(rng), dl = drop(rng);
      const int ph = phase(rng);
      const Network net = testing::two_bus(l, kDefaultTrunkConductor, dl, kDefaultDropConductor, ph);
      const Demand d{p(rng), 0.0};
      const Demand dq{d.active_power, d.active_power * pf(rng)};
      const auto r = solve_snapshot(net, initial_assignment(net), snapshot_of({dq}), kTight);
      REQUIRE(r.converged);
      const std::complex<double> z(l * 1.91e-3 + dl * 1.15e-3, l * 0.10e-3 + dl * 0.08e-3);
      const auto expect = testing::two_bus_voltage(230.9, z, {dq.active_power, dq.reactive_power});
      const std::size_t k = static_cast<std::size_t>(ph - 1);
      CHECK(std::abs(r.customer_voltage[0][k] - expect) / std::abs(expect) < 1e-9);
      for (std::size_t other = 0; other < 3; ++other)
        if (other != k) CHECK(r.customer_voltage[0][other] == std::complex<double>(230.9, 0.0));
    }
  }
}

TEST_CASE("everybody on phase 1") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s111);
  const LoadProfile prof = scenarios::constant_profile(net);
  const auto r = solve_snapshot(net, initial_assignment(net), prof.snapshots[0]);
  const std::size_t end = *net.bus_index(end_of_line_bus(net));
  CHECK(r.converged);
  CHECK(std::abs(r.voltage(end, PhaseId(1)) - 196.3) < 2.0 * 2.309);
  CHECK(r.voltage(end, PhaseId(2)) == 230.9);
  CHECK(r.voltage(end, PhaseId(3)) == 230.9);
  CHECK(std::abs(r.current(PhaseId(1)) - 58.2) < 6.0);
  CHECK(r.current(PhaseId(2)) == 0.0);
}

TEST_CASE("profile solving") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s112233);
  const FeederSolver solver(net);
  const PhaseAssignment a = initial_assignment(net);
  SUBCASE("a single snapshot equals solve_snapshot") {
    const LoadProfile prof = scenarios::constant_profile(net);
    const auto rs = solver.solve_profile(a, prof);
    REQUIRE(rs.size() == 1);
    CHECK(rs[0] == solver.solve_snapshot(a, prof.snapshots[0]));
  }
  SUBCASE("identical snapshots give identical results") {
    const auto rs = solver.solve_profile(a, scenarios::constant_profile(net, 200.0, 0.1, 2));
    REQUIRE(rs.size() == 2);
    CHECK(rs[0] == rs[1]);
  }
  SUBCASE("doubling the phase-1 load raises the phase-1 current") {
    LoadProfile prof;
    for (const auto& c : net.customers) prof.customer_ids.push_back(c.id);
    double p = 100.0;
    for (int k = 0; k < 4; ++k, p *= 2.0) {
      LoadSnapshot s{std::to_string(k), {}};
      for (const auto& c : net.customers) s.demand.push_back(c.initial_phase.value() == 1 ? Demand{p, 0.1 * p} : Demand{});
      prof.snapshots.push_back(s);
    }
    const auto rs = solver.solve_profile(a, prof);
    for (int k = 0; k < 4; ++k) {
      CHECK(rs[k] == solver.solve_snapshot(a, prof.snapshots[k]));
      if (k) CHECK(rs[k].current(PhaseId(1)) > rs[k - 1].current(PhaseId(1)));
    }
  }
  SUBCASE("long profiles span several batches") {
    std::mt19937_64 rng(2);
    std::vector<std::vector<Demand>> snaps;
    for (std::size_t k = 0; k < FeederSolver::kBatchSnapshots + 7; ++k)
      snaps.push_back(testing::random_demand(rng, net.customers.size(), 600.0));
    const LoadProfile prof = testing::profile_of(net, snaps);
    const auto rs = solver.solve_profile(a, prof);
    REQUIRE(rs.size() == snaps.size());
    for (std::size_t k = 0; k < rs.size(); k += 13) CHECK(rs[k] == solver.solve_snapshot(a, prof.snapshots[k]));
  }
  SUBCASE("demand of the wrong size names the snapshot") {
    LoadProfile prof = scenarios::constant_profile(net, 200.0, 0.1, 3);
    prof.snapshots[2].demand.pop_back();
    try {
      solver.solve_profile(a, prof);
      FAIL("expected SnapshotError");
    } catch (const SnapshotError& e) {
      CHECK(e.index() == 2);
    }
  }
}

TEST_CASE("solving is deterministic") {
  std::mt19937_64 rng(1);
  const Network net = testing::random_tree(rng, 20, 30);
  const LoadProfile prof = testing::profile_of(net, {testing::random_demand(rng, 30)});
  CHECK(solve_snapshot(net, initial_assignment(net), prof.snapshots[0]) ==
        solve_snapshot(net, initial_assignment(net), prof.snapshots[0]));
}

TEST_CASE("drops grow with load") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s123123);
  const FeederSolver solver(net);
  const std::size_t end = *net.bus_index(end_of_line_bus(net));
  double last[3] = {230.9, 230.9, 230.9};
  for (double p = 50.0; p <= 400.0; p += 50.0) {
    const auto r = solver.solve_snapshot(initial_assignment(net), scenarios::constant_profile(net, p).snapshots[0]);
    for (int ph = 1; ph <= 3; ++ph) {
      CHECK(r.voltage(end, PhaseId(ph)) < last[ph - 1]);
      last[ph - 1] = r.voltage(end, PhaseId(ph));
    }
  }
}

TEST_CASE("power is conserved on every phase") {
  auto check_network = [](const Network& net, const LoadSnapshot& snap) {
    const PhaseAssignment a = initial_assignment(net);
    const auto r = solve_snapshot(net, a, snap, kTight);
    REQUIRE(r.converged);
    const auto phases = customer_phases(net, a);
    for (std::size_t ph = 0; ph < 3; ++ph) {
      double scale = 0.0;
      const auto residual = power_residual(net, phases, snap, r, ph, &scale);
      if (scale == 0.0) CHECK(std::abs(residual) == 0.0);
      else CHECK(std::abs(residual) / scale < 1e-6);
    }
  };
  for (auto scheme : {scenarios::Scheme::s112233, scenarios::Scheme::s123123, scenarios::Scheme::s111}) {
    const Network net = scenarios::build_scenario(scheme);
    check_network(net, scenarios::constant_profile(net).snapshots[0]);
  }
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Network net = testing::random_tree(rng, 15, 20);
    check_network(net, snapshot_of(testing::random_demand(rng, 20)));
  }
}

TEST_CASE("phases are decoupled") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = testing::random_tree(rng, 12, 15);
    const PhaseAssignment a = initial_assignment(net);
    const auto phases = customer_phases(net, a);
    LoadSnapshot base = snapshot_of(testing::random_demand(rng, 15));
    LoadSnapshot bumped = base;
    for (std::size_t c = 0; c < 15; ++c)
      if (phases[c].value() == 2) bumped.demand[c].active_power *= 3.0;
    const auto r0 = solve_snapshot(net, a, base);
    const auto r1 = solve_snapshot(net, a, bumped);
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
      CHECK(r0.bus_voltage[b][0] == r1.bus_voltage[b][0]);
      CHECK(r0.bus_voltage[b][2] == r1.bus_voltage[b][2]);
    }
    CHECK(r0.transformer_current[0] == r1.transformer_current[0]);
    CHECK(r0.transformer_current[2] == r1.transformer_current[2]);
    CHECK(r0.phase_iterations[0] == r1.phase_iterations[0]);
  }
}

TEST_CASE("trunk voltages never rise away from the transformer") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = testing::random_tree(rng, 25, 30);
    const auto r = solve_snapshot(net, initial_assignment(net), snapshot_of(testing::random_demand(rng, 30)));
    for (std::size_t s = 0; s < net.segments.size(); ++s) {
      const auto& seg = net.segments[s];
      const std::size_t up = *net.bus_index(seg.from_bus), down = *net.bus_index(seg.to_bus);
      for (std::size_t ph = 0; ph < 3; ++ph)
        CHECK(std::abs(r.bus_voltage[down][ph]) <= std::abs(r.bus_voltage[up][ph]) + 1e-9);
    }
  }
}

TEST_CASE("assignments must fit the network") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s112233, 6);
  const LoadSnapshot snap = scenarios::constant_profile(net).snapshots[0];
  CHECK_THROWS_AS(solve_snapshot(net, PhaseAssignment{1, 2, 3}, snap), InvalidAssignment);
  const Network other = scenarios::build_scenario(scenarios::Scheme::s112233, 6);
  Network renamed = other;
  renamed.customers[0].id = "Z";
  CHECK_THROWS_AS(solve_snapshot(net, initial_assignment(renamed), snap), InvalidAssignment);
  Network broken = net;
  broken.customers[0].bus = 77;
  CHECK_THROWS_AS(FeederSolver{broken}, Error);
}

TEST_CASE("an overloaded feeder reports non-convergence") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s111);
  const auto r = solve_snapshot(net, initial_assignment(net), scenarios::constant_profile(net, 20000.0).snapshots[0]);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.phase_converged[0]);
  CHECK(r.phase_converged[1]);
  CHECK(r.iterations == SolverOptions{}.max_iterations);
}
