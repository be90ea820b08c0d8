#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "phasebal/network.hpp"

namespace phasebal {

// Which customers the genes of an assignment refer to, in gene order.
struct GeneLayout {
  std::vector<std::size_t> customer_index;  // into Network::customers
  std::vector<std::string> customer_ids;

  static std::shared_ptr<const GeneLayout> of(const Network& network);

  std::size_t size() const noexcept { return customer_index.size(); }
  friend bool operator==(const GeneLayout&, const GeneLayout&) = default;
};

// Integer genome: one phase per movable customer.
class PhaseAssignment {
 public:
  PhaseAssignment() = default;
  // Throws std::invalid_argument if any gene is outside {1, 2, 3}.
  explicit PhaseAssignment(std::vector<std::uint8_t> genes,
                           std::shared_ptr<const GeneLayout> layout = nullptr);
  PhaseAssignment(std::initializer_list<int> genes);

  std::size_t size() const noexcept { return genes_.size(); }
  PhaseId operator[](std::size_t i) const { return PhaseId(genes_[i]); }
  void set(std::size_t i, PhaseId phase) { genes_[i] = static_cast<std::uint8_t>(phase.value()); }

  std::span<const std::uint8_t> genes() const noexcept { return genes_; }
  const std::shared_ptr<const GeneLayout>& layout() const noexcept { return layout_; }
  std::string key() const { return {genes_.begin(), genes_.end()}; }

  friend bool operator==(const PhaseAssignment& a, const PhaseAssignment& b) {
    return a.genes_ == b.genes_;
  }

 private:
  std::vector<std::uint8_t> genes_;
  std::shared_ptr<const GeneLayout> layout_;
};

// The assignment that keeps every movable customer on its initial phase.
PhaseAssignment initial_assignment(const Network& network);

// Phase of every customer of the network under the assignment. Throws
// InvalidAssignment when the assignment does not fit the network.
std::vector<PhaseId> customer_phases(const Network& network, const PhaseAssignment& assignment);

// Copy of the network whose initial phases are those of the assignment.
Network with_initial_phases(const Network& network, const PhaseAssignment& assignment);

// Number of differing genes. Throws LengthMismatch.
std::size_t hamming(const PhaseAssignment& a, const PhaseAssignment& b);

// Customers per phase under the assignment.
std::array<std::size_t, 3> phase_counts(const Network& network, const PhaseAssignment& assignment);

}  // namespace phasebal
