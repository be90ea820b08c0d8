#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "phasebal/assignment.hpp"
#include "phasebal/load_flow.hpp"
#include "phasebal/network.hpp"

namespace phasebal {

// Weights and normalizing maxima of the scalar fitness.
struct ObjectiveWeights {
  double alpha = 1.0;  // imbalance
  double beta = 1.0;   // end-of-line voltage drop
  double gamma = 0.6;  // number of reconnections
  double b_max = 100.0;
  double dv_max = 10.0;
  double n_max = 50.0;

  // Throws ConfigError when a weight is negative, all are zero, or a maximum
  // is not positive.
  void check() const;
};

struct FitnessReport {
  double imbalance_b = 0.0;   // %, RMS of per_snapshot_b
  double voltage_drop = 0.0;  // %, max of per_snapshot_dv
  std::size_t changes = 0;
  double fitness = 0.0;
  std::vector<double> per_snapshot_b;
  std::vector<double> per_snapshot_dv;
  std::size_t nonconverged = 0;  // snapshots penalized for solver failure

  friend bool operator==(const FitnessReport&, const FitnessReport&) = default;
};

// NEMA-style index 100 * (max - mean) / mean of three phase currents.
// Throws ZeroMeanCurrent when all currents are zero.
double imbalance_instant(const std::array<double, 3>& currents);

// Root mean square over the samples. Throws EmptySeries.
double imbalance_aggregate(std::span<const double> per_snapshot);

// 100 * (v_source - v_end) / v_source.
double voltage_drop_instant(double v_source, double v_end);

// Largest sample. Throws EmptySeries.
double voltage_drop_aggregate(std::span<const double> per_snapshot);

// Number of customers whose proposed phase differs from the initial one.
std::size_t change_count(const PhaseAssignment& initial, const PhaseAssignment& proposed);

// 1 - (alpha B/B_max + beta dV/dV_max + gamma N/N_max) / (alpha + beta + gamma).
double fitness(double imbalance_b, double voltage_drop, std::size_t changes, const ObjectiveWeights& weights);

// Per-phase view of one solved snapshot, the rows of a simulation report.
struct PhaseTable {
  std::array<double, 3> end_voltage{};   // V at the end-of-line bus
  std::array<double, 3> voltage_drop{};  // %
  std::array<double, 3> current{};       // A at the transformer
  std::array<std::size_t, 3> customers{};
  double imbalance = 0.0;  // % for this snapshot
};

PhaseTable phase_table(const Network& network, const PhaseAssignment& assignment, const PowerFlowResult& result);

// Scores assignments of one network over one profile. Holds the compiled
// solver; calls are pure and may run concurrently.
class Evaluator {
 public:
  // The profile is aligned to the network customer order here.
  Evaluator(const Network& network, const LoadProfile& profile, ObjectiveWeights weights,
            SolverOptions options = {});

  FitnessReport operator()(const PhaseAssignment& assignment) const;

  // Same as operator() over already solved snapshots.
  FitnessReport score(const PhaseAssignment& assignment, std::span<const PowerFlowResult> results) const;

  std::vector<PowerFlowResult> solve(const PhaseAssignment& assignment) const;

  const Network& network() const noexcept { return solver_.network(); }
  const LoadProfile& profile() const noexcept { return profile_; }
  const ObjectiveWeights& weights() const noexcept { return weights_; }
  const SolverOptions& options() const noexcept { return options_; }
  const PhaseAssignment& initial() const noexcept { return initial_; }
  std::size_t end_of_line_index() const noexcept { return end_bus_; }

 private:
  FeederSolver solver_;
  LoadProfile profile_;
  ObjectiveWeights weights_;
  SolverOptions options_;
  PhaseAssignment initial_;
  std::size_t end_bus_ = 0;
};

FitnessReport evaluate(const Network& network, const PhaseAssignment& assignment, const LoadProfile& profile,
                       const ObjectiveWeights& weights, const SolverOptions& options = {});

}  // namespace phasebal
