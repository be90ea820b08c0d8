#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "phasebal/simd/kernels.hpp"

namespace phasebal::simd {

namespace {

// -1: no override.
std::atomic<int> g_forced{-1};

constexpr KernelTable kScalar{Isa::scalar, &scalar::sweep, &scalar::hamming};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::sweep, &avx2::hamming};
#endif

Isa from_environment() noexcept {
  const char* env = std::getenv("PHASEBAL_ISA");
  if (env != nullptr) {
    if (auto isa = parse_isa(env); isa && supported(*isa)) return *isa;
  }
  return detect();
}

}  // namespace

std::string_view name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view text) noexcept {
  if (text == "scalar") return Isa::scalar;
  if (text == "avx2") return Isa::avx2;
  return std::nullopt;
}

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa detect() noexcept { return supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active() noexcept {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa from_env = from_environment();
  return from_env;
}

void force(std::optional<Isa> isa) noexcept {
  g_forced.store(isa ? static_cast<int>(*isa) : -1, std::memory_order_relaxed);
}

ScopedIsa::ScopedIsa(Isa isa) noexcept {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) previous_ = static_cast<Isa>(forced);
  force(isa);
}

ScopedIsa::~ScopedIsa() { force(previous_); }

void SweepState::resize(std::size_t nodes, std::size_t lanes) {
  v_re.assign(nodes * lanes, 0.0);
  v_im.assign(nodes * lanes, 0.0);
  i_re.assign(nodes * lanes, 0.0);
  i_im.assign(nodes * lanes, 0.0);
  iterations.assign(lanes, 0);
  converged.assign(lanes, 0);
}

const KernelTable& kernels(Isa isa) {
  if (!supported(isa)) throw std::runtime_error("instruction set not supported: " + std::string(name(isa)));
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace phasebal::simd
