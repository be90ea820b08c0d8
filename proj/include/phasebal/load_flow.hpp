#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "phasebal/assignment.hpp"
#include "phasebal/network.hpp"
#include "phasebal/simd/kernels.hpp"

namespace phasebal {

struct SolverOptions {
  double tolerance = 1e-6;  // relative to the source phase voltage
  int max_iterations = 100;
};

using PhaseValues = std::array<std::complex<double>, 3>;

// Steady state of one snapshot. Each phase is an independent radial circuit
// against an ideal neutral.
struct PowerFlowResult {
  std::vector<PhaseValues> bus_voltage;       // per Network::buses entry
  std::vector<PhaseValues> customer_voltage;  // at each meter, per Network::customers entry
  std::vector<PhaseValues> segment_current;   // per Network::segments entry
  std::vector<PhaseValues> drop_current;      // per Network::customers entry
  PhaseValues transformer_current{};          // total leaving the busbar per phase
  std::array<bool, 3> phase_converged{};
  std::array<int, 3> phase_iterations{};
  bool converged = false;
  int iterations = 0;  // worst phase

  double voltage(std::size_t bus_index, PhaseId phase) const { return std::abs(bus_voltage[bus_index][phase.index()]); }
  double current(PhaseId phase) const { return std::abs(transformer_current[phase.index()]); }

  friend bool operator==(const PowerFlowResult&, const PowerFlowResult&) = default;
};

// Network compiled once into a ladder; solves any number of snapshots and
// assignments against it. Immutable and safe to share between threads.
class FeederSolver {
 public:
  // Throws Error when the network fails validate().
  explicit FeederSolver(const Network& network);

  const Network& network() const noexcept { return network_; }

  // demand is aligned with Network::customers.
  PowerFlowResult solve_snapshot(const PhaseAssignment& assignment, const LoadSnapshot& snapshot,
                                 const SolverOptions& options = {}) const;

  // Profile columns must be in network customer order (see align_profile).
  std::vector<PowerFlowResult> solve_profile(const PhaseAssignment& assignment, const LoadProfile& profile,
                                             const SolverOptions& options = {}) const;

  // Snapshots solved together in one kernel call.
  static constexpr std::size_t kBatchSnapshots = 64;

 private:
  void solve_batch(const std::vector<PhaseId>& phases, std::span<const LoadSnapshot* const> snapshots,
                   const SolverOptions& options, std::span<PowerFlowResult> out) const;

  Network network_;
  simd::Ladder ladder_;
  std::vector<std::size_t> bus_node_;       // node of each bus
  std::vector<std::size_t> customer_node_;  // node of each customer meter
  std::vector<std::size_t> segment_node_;   // node fed by each segment
};

PowerFlowResult solve_snapshot(const Network& network, const PhaseAssignment& assignment,
                               const LoadSnapshot& snapshot, const SolverOptions& options = {});

std::vector<PowerFlowResult> solve_profile(const Network& network, const PhaseAssignment& assignment,
                                           const LoadProfile& profile, const SolverOptions& options = {});

}  // namespace phasebal
