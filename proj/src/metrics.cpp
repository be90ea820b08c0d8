#include "phasebal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phasebal/error.hpp"

namespace phasebal {

void ObjectiveWeights::check() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(gamma >= 0.0)) throw ConfigError("objective weights must be >= 0");
  if (!(alpha + beta + gamma > 0.0)) throw ConfigError("at least one objective weight must be positive");
  if (!(b_max > 0.0) || !(dv_max > 0.0) || !(n_max > 0.0)) throw ConfigError("objective maxima must be positive");
}

double imbalance_instant(const std::array<double, 3>& currents) {
  for (double c : currents)
    if (!(c >= 0.0)) throw std::invalid_argument("phase currents must be non-negative");
  const double sum = currents[0] + currents[1] + currents[2];
  if (sum == 0.0) throw ZeroMeanCurrent();
  // (max - mean) / mean rewritten as (2 max - others) / sum; exact for a single loaded phase.
  const auto top = static_cast<std::size_t>(std::max_element(currents.begin(), currents.end()) - currents.begin());
  const double others = currents[(top + 1) % 3] + currents[(top + 2) % 3];
  return 100.0 * (2.0 * currents[top] - others) / sum;
}

double imbalance_aggregate(std::span<const double> per_snapshot) {
  if (per_snapshot.empty()) throw EmptySeries();
  double sum = 0.0;
  for (double b : per_snapshot) sum += b * b;
  return std::sqrt(sum / static_cast<double>(per_snapshot.size()));
}

double voltage_drop_instant(double v_source, double v_end) {
  if (!(v_source > 0.0)) throw std::invalid_argument("source voltage must be positive");
  return 100.0 * (v_source - v_end) / v_source;
}

double voltage_drop_aggregate(std::span<const double> per_snapshot) {
  if (per_snapshot.empty()) throw EmptySeries();
  return *std::max_element(per_snapshot.begin(), per_snapshot.end());
}

std::size_t change_count(const PhaseAssignment& initial, const PhaseAssignment& proposed) {
  return hamming(initial, proposed);
}

double fitness(double imbalance_b, double voltage_drop, std::size_t changes, const ObjectiveWeights& w) {
  w.check();
  const double penalty = w.alpha * imbalance_b / w.b_max + w.beta * voltage_drop / w.dv_max +
                         w.gamma * static_cast<double>(changes) / w.n_max;
  return 1.0 - penalty / (w.alpha + w.beta + w.gamma);
}

namespace {

std::size_t end_bus_index(const Network& network) { return *network.bus_index(end_of_line_bus(network)); }

}  // namespace

PhaseTable phase_table(const Network& network, const PhaseAssignment& assignment, const PowerFlowResult& result) {
  PhaseTable t;
  const std::size_t end = end_bus_index(network);
  for (int v : PhaseId::all()) {
    const PhaseId ph(v);
    t.end_voltage[ph.index()] = result.voltage(end, ph);
    t.voltage_drop[ph.index()] = voltage_drop_instant(network.source_phase_voltage, t.end_voltage[ph.index()]);
    t.current[ph.index()] = result.current(ph);
  }
  t.customers = phase_counts(network, assignment);
  const bool dead = t.current[0] == 0.0 && t.current[1] == 0.0 && t.current[2] == 0.0;
  t.imbalance = dead ? 0.0 : imbalance_instant(t.current);
  return t;
}

Evaluator::Evaluator(const Network& network, const LoadProfile& profile, ObjectiveWeights weights,
                     SolverOptions options)
    : solver_(network),
      profile_(align_profile(network, profile)),
      weights_(weights),
      options_(options),
      initial_(initial_assignment(network)),
      end_bus_(end_bus_index(network)) {
  weights_.check();
}

std::vector<PowerFlowResult> Evaluator::solve(const PhaseAssignment& assignment) const {
  return solver_.solve_profile(assignment, profile_, options_);
}

FitnessReport Evaluator::score(const PhaseAssignment& assignment, std::span<const PowerFlowResult> results) const {
  FitnessReport report;
  const double v0 = network().source_phase_voltage;
  report.per_snapshot_b.reserve(results.size());
  report.per_snapshot_dv.reserve(results.size());
  for (const PowerFlowResult& r : results) {
    if (!r.converged) {
      ++report.nonconverged;
      report.per_snapshot_b.push_back(weights_.b_max);
      report.per_snapshot_dv.push_back(100.0);
      continue;
    }
    const std::array<double, 3> currents{r.current(PhaseId(1)), r.current(PhaseId(2)), r.current(PhaseId(3))};
    const bool dead = currents[0] == 0.0 && currents[1] == 0.0 && currents[2] == 0.0;
    report.per_snapshot_b.push_back(dead ? 0.0 : imbalance_instant(currents));
    const double v_end = std::min({r.voltage(end_bus_, PhaseId(1)), r.voltage(end_bus_, PhaseId(2)),
                                   r.voltage(end_bus_, PhaseId(3))});
    report.per_snapshot_dv.push_back(voltage_drop_instant(v0, v_end));
  }
  report.imbalance_b = imbalance_aggregate(report.per_snapshot_b);
  report.voltage_drop = voltage_drop_aggregate(report.per_snapshot_dv);
  report.changes = change_count(initial_, assignment);
  report.fitness = fitness(report.imbalance_b, report.voltage_drop, report.changes, weights_);
  return report;
}

FitnessReport Evaluator::operator()(const PhaseAssignment& assignment) const {
  const auto results = solve(assignment);
  return score(assignment, results);
}

FitnessReport evaluate(const Network& network, const PhaseAssignment& assignment, const LoadProfile& profile,
                       const ObjectiveWeights& weights, const SolverOptions& options) {
  return Evaluator(network, profile, weights, options)(assignment);
}

}  // namespace phasebal
