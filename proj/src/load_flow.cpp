#include "phasebal/load_flow.hpp"

#include <algorithm>
#include <numeric>

#include "phasebal/error.hpp"

namespace phasebal {

namespace {

void check_options(const SolverOptions& options) {
  if (!(options.tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (options.max_iterations < 1) throw ConfigError("solver max_iterations must be at least 1");
}

}  // namespace

FeederSolver::FeederSolver(const Network& network) : network_(network) {
  if (const auto problems = validate(network_); !problems.empty())
    throw Error("invalid network: " + describe(problems.front()));

  const std::size_t nbus = network_.buses.size();
  std::vector<std::size_t> by_id(nbus);
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::sort(by_id.begin(), by_id.end(),
            [this](std::size_t a, std::size_t b) { return network_.buses[a].id < network_.buses[b].id; });

  // Parent ids are smaller than child ids, so ascending id order is topological.
  bus_node_.assign(nbus, 0);
  for (std::size_t n = 0; n < nbus; ++n) bus_node_[by_id[n]] = n;

  const std::size_t nodes = nbus + network_.customers.size();
  ladder_.parent.assign(nodes, 0);
  ladder_.r.assign(nodes, 0.0);
  ladder_.x.assign(nodes, 0.0);
  segment_node_.assign(network_.segments.size(), 0);
  for (std::size_t s = 0; s < network_.segments.size(); ++s) {
    const LineSegment& seg = network_.segments[s];
    const std::size_t child = bus_node_[*network_.bus_index(seg.to_bus)];
    ladder_.parent[child] = static_cast<std::int32_t>(bus_node_[*network_.bus_index(seg.from_bus)]);
    ladder_.r[child] = seg.resistance_per_m * seg.length;
    ladder_.x[child] = seg.reactance_per_m * seg.length;
    segment_node_[s] = child;
  }
  customer_node_.assign(network_.customers.size(), 0);
  for (std::size_t c = 0; c < network_.customers.size(); ++c) {
    const Customer& cust = network_.customers[c];
    const std::size_t node = nbus + c;
    ladder_.parent[node] = static_cast<std::int32_t>(bus_node_[*network_.bus_index(cust.bus)]);
    ladder_.r[node] = cust.drop.conductor.resistance_per_m * cust.drop.length;
    ladder_.x[node] = cust.drop.conductor.reactance_per_m * cust.drop.length;
    customer_node_[c] = node;
  }
}

void FeederSolver::solve_batch(const std::vector<PhaseId>& phases, std::span<const LoadSnapshot* const> snapshots,
                               const SolverOptions& options, std::span<PowerFlowResult> out) const {
  const std::size_t nodes = ladder_.size();
  const std::size_t lanes = simd::padded_lanes(3 * snapshots.size());
  std::vector<double> p(nodes * lanes, 0.0), q(nodes * lanes, 0.0);
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const auto& demand = snapshots[s]->demand;
    for (std::size_t c = 0; c < demand.size(); ++c) {
      const std::size_t at = customer_node_[c] * lanes + 3 * s + phases[c].index();
      p[at] = demand[c].active_power;
      q[at] = demand[c].reactive_power;
    }
  }

  simd::SweepProblem problem;
  problem.ladder = &ladder_;
  problem.lanes = lanes;
  problem.p = p;
  problem.q = q;
  problem.source_voltage = network_.source_phase_voltage;
  problem.tolerance = options.tolerance * network_.source_phase_voltage;
  problem.max_iterations = options.max_iterations;

  simd::SweepState state;
  simd::kernels().sweep(problem, state);

  auto gather = [&](std::size_t node, std::size_t s, const std::vector<double>& re, const std::vector<double>& im) {
    PhaseValues v;
    for (std::size_t ph = 0; ph < 3; ++ph) v[ph] = {re[node * lanes + 3 * s + ph], im[node * lanes + 3 * s + ph]};
    return v;
  };

  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    PowerFlowResult& r = out[s];
    r.bus_voltage.resize(network_.buses.size());
    for (std::size_t b = 0; b < network_.buses.size(); ++b) r.bus_voltage[b] = gather(bus_node_[b], s, state.v_re, state.v_im);
    r.customer_voltage.resize(network_.customers.size());
    r.drop_current.resize(network_.customers.size());
    for (std::size_t c = 0; c < network_.customers.size(); ++c) {
      r.customer_voltage[c] = gather(customer_node_[c], s, state.v_re, state.v_im);
      r.drop_current[c] = gather(customer_node_[c], s, state.i_re, state.i_im);
    }
    r.segment_current.resize(network_.segments.size());
    for (std::size_t g = 0; g < network_.segments.size(); ++g)
      r.segment_current[g] = gather(segment_node_[g], s, state.i_re, state.i_im);
    r.transformer_current = gather(0, s, state.i_re, state.i_im);

    r.converged = true;
    r.iterations = 0;
    for (std::size_t ph = 0; ph < 3; ++ph) {
      const std::size_t lane = 3 * s + ph;
      r.phase_converged[ph] = state.converged[lane] != 0;
      r.phase_iterations[ph] = state.iterations[lane];
      r.converged = r.converged && r.phase_converged[ph];
      r.iterations = std::max(r.iterations, r.phase_iterations[ph]);
    }
  }
}

PowerFlowResult FeederSolver::solve_snapshot(const PhaseAssignment& assignment, const LoadSnapshot& snapshot,
                                             const SolverOptions& options) const {
  check_options(options);
  const auto phases = customer_phases(network_, assignment);
  if (snapshot.demand.size() != network_.customers.size())
    throw Error("snapshot has " + std::to_string(snapshot.demand.size()) + " demands, network has " +
                std::to_string(network_.customers.size()) + " customers");
  const LoadSnapshot* one[] = {&snapshot};
  PowerFlowResult result;
  solve_batch(phases, one, options, {&result, 1});
  return result;
}

std::vector<PowerFlowResult> FeederSolver::solve_profile(const PhaseAssignment& assignment,
                                                         const LoadProfile& profile,
                                                         const SolverOptions& options) const {
  check_options(options);
  const auto phases = customer_phases(network_, assignment);
  std::vector<const LoadSnapshot*> views;
  views.reserve(profile.size());
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (profile.snapshots[k].demand.size() != network_.customers.size())
      throw SnapshotError(k, "demand does not cover the network customers");
    views.push_back(&profile.snapshots[k]);
  }

  std::vector<PowerFlowResult> results(profile.size());
  for (std::size_t first = 0; first < views.size(); first += kBatchSnapshots) {
    const std::size_t count = std::min(kBatchSnapshots, views.size() - first);
    solve_batch(phases, std::span(views).subspan(first, count), options, std::span(results).subspan(first, count));
  }
  return results;
}

PowerFlowResult solve_snapshot(const Network& network, const PhaseAssignment& assignment,
                               const LoadSnapshot& snapshot, const SolverOptions& options) {
  return FeederSolver(network).solve_snapshot(assignment, snapshot, options);
}

std::vector<PowerFlowResult> solve_profile(const Network& network, const PhaseAssignment& assignment,
                                           const LoadProfile& profile, const SolverOptions& options) {
  return FeederSolver(network).solve_profile(assignment, profile, options);
}

}  // namespace phasebal
