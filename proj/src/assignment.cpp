#include "phasebal/assignment.hpp"

#include <stdexcept>

#include "phasebal/error.hpp"
#include "phasebal/simd/kernels.hpp"

namespace phasebal {

std::shared_ptr<const GeneLayout> GeneLayout::of(const Network& network) {
  auto layout = std::make_shared<GeneLayout>();
  for (std::size_t i = 0; i < network.customers.size(); ++i) {
    if (!network.customers[i].movable) continue;
    layout->customer_index.push_back(i);
    layout->customer_ids.push_back(network.customers[i].id);
  }
  return layout;
}

PhaseAssignment::PhaseAssignment(std::vector<std::uint8_t> genes, std::shared_ptr<const GeneLayout> layout)
    : genes_(std::move(genes)), layout_(std::move(layout)) {
  for (std::uint8_t g : genes_)
    if (g < 1 || g > 3) throw std::invalid_argument("gene outside {1, 2, 3}: " + std::to_string(g));
  if (layout_ && layout_->size() != genes_.size())
    throw InvalidAssignment("assignment has " + std::to_string(genes_.size()) + " genes but layout has " +
                            std::to_string(layout_->size()) + " customers");
}

PhaseAssignment::PhaseAssignment(std::initializer_list<int> genes) {
  genes_.reserve(genes.size());
  for (int g : genes) genes_.push_back(static_cast<std::uint8_t>(PhaseId(g).value()));
}

PhaseAssignment initial_assignment(const Network& network) {
  auto layout = GeneLayout::of(network);
  std::vector<std::uint8_t> genes;
  genes.reserve(layout->size());
  for (std::size_t idx : layout->customer_index)
    genes.push_back(static_cast<std::uint8_t>(network.customers[idx].initial_phase.value()));
  return PhaseAssignment(std::move(genes), std::move(layout));
}

std::vector<PhaseId> customer_phases(const Network& network, const PhaseAssignment& assignment) {
  const std::size_t movable = network.movable_count();
  if (assignment.size() != movable)
    throw InvalidAssignment("assignment has " + std::to_string(assignment.size()) + " genes, network has " +
                            std::to_string(movable) + " movable customers");
  std::vector<PhaseId> phases;
  phases.reserve(network.customers.size());
  std::size_t gene = 0;
  for (const auto& c : network.customers) {
    if (!c.movable) {
      phases.push_back(c.initial_phase);
      continue;
    }
    if (const auto& layout = assignment.layout(); layout && layout->customer_ids[gene] != c.id)
      throw InvalidAssignment("gene " + std::to_string(gene) + " belongs to customer '" +
                              layout->customer_ids[gene] + "', expected '" + c.id + "'");
    phases.push_back(assignment[gene++]);
  }
  return phases;
}

Network with_initial_phases(const Network& network, const PhaseAssignment& assignment) {
  const auto phases = customer_phases(network, assignment);
  Network out = network;
  for (std::size_t i = 0; i < out.customers.size(); ++i) out.customers[i].initial_phase = phases[i];
  return out;
}

std::size_t hamming(const PhaseAssignment& a, const PhaseAssignment& b) {
  if (a.size() != b.size()) throw LengthMismatch(a.size(), b.size());
  return simd::kernels().hamming(a.genes().data(), b.genes().data(), a.size());
}

std::array<std::size_t, 3> phase_counts(const Network& network, const PhaseAssignment& assignment) {
  std::array<std::size_t, 3> counts{};
  for (PhaseId p : customer_phases(network, assignment)) ++counts[p.index()];
  return counts;
}

}  // namespace phasebal
