#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "phasebal/error.hpp"
#include "phasebal/metrics.hpp"
#include "phasebal/scenarios.hpp"
#include "support.hpp"

using namespace phasebal;

namespace {

// Straight transcriptions of the definitions, used as oracles.
double nema(const std::array<double, 3>& i) {
  const double mean = (i[0] + i[1] + i[2]) / 3.0;
  return 100.0 * (std::max({i[0], i[1], i[2]}) - mean) / mean;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

bool close(double a, double b, double rel = 1e-9) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("instant imbalance") {
  CHECK(imbalance_instant({10, 10, 10}) == 0.0);
  CHECK(imbalance_instant({58.2, 0, 0}) == 200.0);
  CHECK(imbalance_instant({0, 0, 3.5}) == 200.0);
  CHECK(close(imbalance_instant({17.6, 18.6, 18.9}), nema({17.6, 18.6, 18.9})));
  CHECK(imbalance_instant({17.6, 18.6, 18.9}) == doctest::Approx(2.904).epsilon(1e-3));
  CHECK_THROWS_AS(imbalance_instant({0, 0, 0}), ZeroMeanCurrent);
}

TEST_CASE("aggregate imbalance") {
  const std::vector<double> one{5.0}, two{3.0, 4.0}, zeros{0, 0, 0};
  CHECK(imbalance_aggregate(one) == 5.0);
  CHECK(close(imbalance_aggregate(two), std::sqrt(12.5)));
  CHECK(imbalance_aggregate(zeros) == 0.0);
  CHECK_THROWS_AS(imbalance_aggregate(std::vector<double>{}), EmptySeries);
}

TEST_CASE("voltage drop") {
  CHECK(voltage_drop_instant(230.9, 230.9) == 0.0);
  CHECK(close(voltage_drop_instant(230.9, 212.8), 100.0 * 18.1 / 230.9));
  CHECK(voltage_drop_instant(230.9, 212.8) == doctest::Approx(7.839).epsilon(1e-3));
  CHECK(close(voltage_drop_instant(230.9, 196.3), 100.0 * 34.6 / 230.9));
  CHECK(voltage_drop_instant(230.9, 196.3) == doctest::Approx(14.985).epsilon(1e-3));
  CHECK(voltage_drop_aggregate(std::vector<double>{4.2}) == 4.2);
  CHECK(voltage_drop_aggregate(std::vector<double>{1.0, 7.84, 3.0}) == 7.84);
  CHECK(voltage_drop_aggregate(std::vector<double>(5, 2.5)) == 2.5);
  CHECK_THROWS_AS(voltage_drop_aggregate(std::vector<double>{}), EmptySeries);
}

TEST_CASE("change count") {
  CHECK(change_count(PhaseAssignment{1, 2, 3}, PhaseAssignment{1, 2, 3}) == 0);
  CHECK(change_count(PhaseAssignment{1, 2, 3}, PhaseAssignment{2, 2, 3}) == 1);
  CHECK_THROWS_AS(change_count(PhaseAssignment{1, 2}, PhaseAssignment{1, 2, 3}), LengthMismatch);
}

TEST_CASE("fitness") {
  const ObjectiveWeights w;
  CHECK(fitness(0, 0, 0, w) == 1.0);
  CHECK(close(fitness(100, 10, 50, w), 0.0, 1e-15));
  const double expected = 1.0 - (1.0 * 0.77 / 100 + 1.0 * 4.87 / 10 + 0.6 * 14 / 50) / 2.6;
  CHECK(close(fitness(0.77, 4.87, 14, w), expected));
  CHECK(fitness(0.77, 4.87, 14, w) == doctest::Approx(0.74512).epsilon(1e-5));
}

TEST_CASE("weights are checked") {
  ObjectiveWeights w;
  CHECK_NOTHROW(w.check());
  w.alpha = -1;
  CHECK_THROWS_AS(w.check(), ConfigError);
  w = {};
  w.alpha = w.beta = w.gamma = 0;
  CHECK_THROWS_AS(w.check(), ConfigError);
  w = {};
  w.n_max = 0;
  CHECK_THROWS_AS(w.check(), ConfigError);
}

TEST_CASE("metric properties over random cases") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> cur(0.0, 100.0), scale(0.01, 100.0), pct(0.0, 50.0), weight(0.0, 3.0);
  std::uniform_int_distribution<int> phase(1, 3), len(1, 40), n(0, 60);

  SUBCASE("imbalance is scale invariant and bounded") {
    for (int k = 0; k < 1000; ++k) {
      const std::array<double, 3> i{cur(rng), cur(rng), k % 10 == 0 ? 0.0 : cur(rng)};
      const double s = scale(rng);
      const double b = imbalance_instant(i);
      CHECK(close(imbalance_instant({s * i[0], s * i[1], s * i[2]}), b));
      CHECK(close(b, nema(i)));
      CHECK(b >= 0.0);
      CHECK(b <= 200.0);
    }
  }
  SUBCASE("aggregate is the root mean square") {
    for (int k = 0; k < 1000; ++k) {
      std::vector<double> v(static_cast<std::size_t>(len(rng)));
      for (auto& x : v) x = pct(rng);
      const double agg = imbalance_aggregate(v);
      CHECK(close(agg * agg * static_cast<double>(v.size()), std::inner_product(v.begin(), v.end(), v.begin(), 0.0)));
      CHECK(close(agg, rms(v)));
      CHECK(agg <= *std::max_element(v.begin(), v.end()) + 1e-12);
    }
  }
  SUBCASE("scaling the weights keeps the best candidate") {
    for (int k = 0; k < 1000; ++k) {
      ObjectiveWeights w;
      w.alpha = weight(rng);
      w.beta = weight(rng);
      w.gamma = weight(rng) + 1e-3;
      ObjectiveWeights scaled = w;
      const double s = scale(rng);
      scaled.alpha *= s;
      scaled.beta *= s;
      scaled.gamma *= s;
      std::size_t best = 0, best_scaled = 0;
      double fb = -1e300, fs = -1e300;
      for (std::size_t c = 0; c < 8; ++c) {
        const double b = pct(rng), dv = pct(rng) / 5.0;
        const auto nc = static_cast<std::size_t>(n(rng));
        const double f1 = fitness(b, dv, nc, w), f2 = fitness(b, dv, nc, scaled);
        CHECK(close(f1, f2));
        if (f1 > fb) fb = f1, best = c;
        if (f2 > fs) fs = f2, best_scaled = c;
      }
      CHECK(best == best_scaled);
    }
  }
  SUBCASE("fitness strictly decreases in each weighted term") {
    const ObjectiveWeights w;
    for (int k = 0; k < 1000; ++k) {
      const double b = pct(rng), dv = pct(rng) / 5.0;
      const auto nc = static_cast<std::size_t>(n(rng));
      const double f = fitness(b, dv, nc, w);
      CHECK(fitness(b + 1.0, dv, nc, w) < f);
      CHECK(fitness(b, dv + 0.1, nc, w) < f);
      CHECK(fitness(b, dv, nc + 1, w) < f);
    }
  }
  SUBCASE("hamming is a metric") {
    for (int k = 0; k < 1000; ++k) {
      const std::size_t m = static_cast<std::size_t>(len(rng));
      std::vector<std::uint8_t> ga(m), gb(m), gc(m);
      for (std::size_t i = 0; i < m; ++i) {
        ga[i] = static_cast<std::uint8_t>(phase(rng));
        gb[i] = static_cast<std::uint8_t>(phase(rng));
        gc[i] = static_cast<std::uint8_t>(phase(rng));
      }
      const PhaseAssignment a(ga), b(gb), c(gc);
      CHECK(hamming(a, a) == 0);
      CHECK(hamming(a, b) == hamming(b, a));
      CHECK(hamming(a, c) <= hamming(a, b) + hamming(b, c));
      CHECK((hamming(a, b) == 0) == (a == b));
      CHECK(hamming(a, b) <= m);
    }
  }
}

TEST_CASE("evaluating the reference scenarios") {
  const ObjectiveWeights w;
  SUBCASE("112233") {
    const Network net = scenarios::build_scenario(scenarios::Scheme::s112233);
    const auto r = evaluate(net, initial_assignment(net), scenarios::constant_profile(net), w);
    CHECK(std::abs(r.imbalance_b - 3.37) < 0.5);
    CHECK(std::abs(r.voltage_drop - 7.84) < 1.5);
    CHECK(r.changes == 0);
    CHECK(r.nonconverged == 0);
    CHECK(close(r.fitness, fitness(r.imbalance_b, r.voltage_drop, 0, w)));
  }
  SUBCASE("123123") {
    const Network net = scenarios::build_scenario(scenarios::Scheme::s123123);
    const auto r = evaluate(net, initial_assignment(net), scenarios::constant_profile(net), w);
    CHECK(std::abs(r.imbalance_b - 0.16) < 0.1);
    CHECK(std::abs(r.voltage_drop - 4.69) < 1.5);
    CHECK(r.changes == 0);
  }
  SUBCASE("dead feeder") {
    for (auto s : {scenarios::Scheme::s112233, scenarios::Scheme::s123123, scenarios::Scheme::s111}) {
      const Network net = scenarios::build_scenario(s);
      const auto r = evaluate(net, initial_assignment(net), scenarios::constant_profile(net, 0.0, 0.1, 3), w);
      CHECK(r.imbalance_b == 0.0);
      CHECK(r.voltage_drop == 0.0);
      CHECK(r.changes == 0);
      CHECK(r.fitness == 1.0);
    }
  }
}

TEST_CASE("evaluator aggregates per-snapshot values") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s112233, 12);
  std::mt19937_64 rng(6);
  std::vector<std::vector<Demand>> snaps;
  for (int k = 0; k < 6; ++k) snaps.push_back(testing::random_demand(rng, 12, 800.0));
  const LoadProfile prof = testing::profile_of(net, snaps);
  const Evaluator eval(net, prof, {});
  PhaseAssignment a = eval.initial();
  a.set(0, PhaseId(3));
  a.set(5, PhaseId(1));
  const FitnessReport r = eval(a);
  REQUIRE(r.per_snapshot_b.size() == 6);
  CHECK(close(r.imbalance_b, rms(r.per_snapshot_b)));
  CHECK(r.voltage_drop == *std::max_element(r.per_snapshot_dv.begin(), r.per_snapshot_dv.end()));
  CHECK(r.changes == change_count(eval.initial(), a));

  // The per-snapshot values agree with the solved phase tables.
  const auto results = eval.solve(a);
  for (std::size_t k = 0; k < results.size(); ++k) {
    const PhaseTable t = phase_table(net, a, results[k]);
    CHECK(close(t.imbalance, r.per_snapshot_b[k]));
    CHECK(close(*std::max_element(t.voltage_drop.begin(), t.voltage_drop.end()), r.per_snapshot_dv[k]));
    CHECK(close(t.imbalance, nema(t.current)));
  }
  CHECK(eval.score(a, results) == r);
}

TEST_CASE("non-converged snapshots are penalized") {
  const Network net = scenarios::build_scenario(scenarios::Scheme::s111);
  LoadProfile prof = scenarios::constant_profile(net, 200.0, 0.1, 2);
  for (auto& d : prof.snapshots[1].demand) d.active_power = 20000.0;
  const ObjectiveWeights w;
  const auto r = evaluate(net, initial_assignment(net), prof, w);
  CHECK(r.nonconverged == 1);
  CHECK(r.per_snapshot_dv[1] == 100.0);
  CHECK(r.per_snapshot_b[1] == w.b_max);
  CHECK(r.voltage_drop == 100.0);
}
