#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// where the CPU allows it, a vectorized one selected at runtime. All variants
// perform the same IEEE operations in the same order per lane, so results are
// bit-identical across instruction sets.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace phasebal::simd {

enum class Isa { scalar, avx2 };

std::string_view name(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view text) noexcept;
bool supported(Isa isa) noexcept;

// Best instruction set the running CPU supports.
Isa detect() noexcept;

// Instruction set used by kernels(): a forced value, else PHASEBAL_ISA from
// the environment, else detect().
Isa active() noexcept;
void force(std::optional<Isa> isa) noexcept;

class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) noexcept;
  ~ScopedIsa();
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  std::optional<Isa> previous_;
};

// Lanes are processed in blocks of this width; lane counts are padded to it.
inline constexpr std::size_t kLaneBlock = 4;

constexpr std::size_t padded_lanes(std::size_t lanes) noexcept {
  return (lanes + kLaneBlock - 1) / kLaneBlock * kLaneBlock;
}

// Radial ladder in topological order: node 0 is the source, parent[i] < i for
// i > 0, and (r[i], x[i]) is the impedance of the branch parent[i] -> i.
struct Ladder {
  std::vector<std::int32_t> parent;
  std::vector<double> r;
  std::vector<double> x;

  std::size_t size() const noexcept { return parent.size(); }
};

// Independent constant-power problems sharing one ladder. Per-node arrays are
// node-major: element (node, lane) lives at node * lanes + lane.
struct SweepProblem {
  const Ladder* ladder = nullptr;
  std::size_t lanes = 0;  // multiple of kLaneBlock
  std::span<const double> p;  // W drawn at each node
  std::span<const double> q;  // var drawn at each node
  double source_voltage = 0.0;
  double tolerance = 0.0;  // V, on the per-node complex voltage change
  int max_iterations = 0;
};

struct SweepState {
  std::vector<double> v_re, v_im;  // node voltages
  std::vector<double> i_re, i_im;  // current of the branch feeding each node; node 0 holds the source total
  std::vector<int> iterations;     // per lane
  std::vector<std::uint8_t> converged;  // per lane

  void resize(std::size_t nodes, std::size_t lanes);
};

// Backward-forward sweep from a flat start. Each lane iterates until its
// largest voltage change drops below the tolerance, then freezes.
using SweepFn = void (*)(const SweepProblem&, SweepState&);
using HammingFn = std::size_t (*)(const std::uint8_t*, const std::uint8_t*, std::size_t);

struct KernelTable {
  Isa isa;
  SweepFn sweep;
  HammingFn hamming;
};

const KernelTable& kernels(Isa isa);
inline const KernelTable& kernels() { return kernels(active()); }

namespace scalar {
void sweep(const SweepProblem& problem, SweepState& state);
std::size_t hamming(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void sweep(const SweepProblem& problem, SweepState& state);
std::size_t hamming(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace phasebal::simd
