// Built with -mavx2; only reached through the dispatch table after a CPU check.

#include <immintrin.h>

#include <bit>
#include <vector>

#include "phasebal/simd/kernels.hpp"

namespace phasebal::simd::avx2 {

namespace {

static_assert(kLaneBlock == 4, "one __m256d per lane block");

inline __m256d load(const std::vector<double>& v, std::size_t i) { return _mm256_loadu_pd(v.data() + i); }
inline __m256d load(std::span<const double> v, std::size_t i) { return _mm256_loadu_pd(v.data() + i); }
inline void store(std::vector<double>& v, std::size_t i, __m256d x) { _mm256_storeu_pd(v.data() + i, x); }

}  // namespace

void sweep(const SweepProblem& problem, SweepState& state) {
  const Ladder& ladder = *problem.ladder;
  const std::size_t nodes = ladder.size();
  const std::size_t lanes = problem.lanes;
  state.resize(nodes, lanes);

  const __m256d v0 = _mm256_set1_pd(problem.source_voltage);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d tol2 = _mm256_set1_pd(problem.tolerance * problem.tolerance);

  // Working currents for one block: node-major, 4 lanes per node.
  std::vector<double> wr(nodes * kLaneBlock), wi(nodes * kLaneBlock);

  for (std::size_t base = 0; base < lanes; base += kLaneBlock) {
    auto at = [lanes, base](std::size_t node) { return node * lanes + base; };
    for (std::size_t n = 0; n < nodes; ++n) {
      store(state.v_re, at(n), v0);
      store(state.v_im, at(n), zero);
    }

    __m256d active = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    int iter = 0;
    while (_mm256_movemask_pd(active) != 0 && iter < problem.max_iterations) {
      ++iter;
      for (std::size_t n = 0; n < nodes; ++n) {
        const __m256d p = load(problem.p, at(n));
        const __m256d q = load(problem.q, at(n));
        const __m256d vr = load(state.v_re, at(n));
        const __m256d vi = load(state.v_im, at(n));
        const __m256d d = _mm256_add_pd(_mm256_mul_pd(vr, vr), _mm256_mul_pd(vi, vi));
        const __m256d idle = _mm256_and_pd(_mm256_cmp_pd(p, zero, _CMP_EQ_OQ), _mm256_cmp_pd(q, zero, _CMP_EQ_OQ));
        const __m256d ir = _mm256_div_pd(_mm256_add_pd(_mm256_mul_pd(p, vr), _mm256_mul_pd(q, vi)), d);
        const __m256d ii = _mm256_div_pd(_mm256_sub_pd(_mm256_mul_pd(p, vi), _mm256_mul_pd(q, vr)), d);
        _mm256_storeu_pd(wr.data() + n * kLaneBlock, _mm256_blendv_pd(ir, zero, idle));
        _mm256_storeu_pd(wi.data() + n * kLaneBlock, _mm256_blendv_pd(ii, zero, idle));
      }
      for (std::size_t n = nodes - 1; n > 0; --n) {
        const std::size_t up = static_cast<std::size_t>(ladder.parent[n]) * kLaneBlock;
        const std::size_t self = n * kLaneBlock;
        _mm256_storeu_pd(wr.data() + up, _mm256_add_pd(_mm256_loadu_pd(wr.data() + up), _mm256_loadu_pd(wr.data() + self)));
        _mm256_storeu_pd(wi.data() + up, _mm256_add_pd(_mm256_loadu_pd(wi.data() + up), _mm256_loadu_pd(wi.data() + self)));
      }

      __m256d moved = zero;
      for (std::size_t n = 1; n < nodes; ++n) {
        const std::size_t up = static_cast<std::size_t>(ladder.parent[n]);
        const __m256d r = _mm256_set1_pd(ladder.r[n]);
        const __m256d x = _mm256_set1_pd(ladder.x[n]);
        const __m256d jr = _mm256_loadu_pd(wr.data() + n * kLaneBlock);
        const __m256d ji = _mm256_loadu_pd(wi.data() + n * kLaneBlock);
        const __m256d old_r = load(state.v_re, at(n));
        const __m256d old_i = load(state.v_im, at(n));
        const __m256d nr = _mm256_sub_pd(load(state.v_re, at(up)), _mm256_sub_pd(_mm256_mul_pd(r, jr), _mm256_mul_pd(x, ji)));
        const __m256d ni = _mm256_sub_pd(load(state.v_im, at(up)), _mm256_add_pd(_mm256_mul_pd(r, ji), _mm256_mul_pd(x, jr)));
        const __m256d dr = _mm256_sub_pd(nr, old_r);
        const __m256d di = _mm256_sub_pd(ni, old_i);
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dr, dr), _mm256_mul_pd(di, di));
        moved = _mm256_or_pd(moved, _mm256_cmp_pd(d2, tol2, _CMP_NLT_UQ));
        store(state.v_re, at(n), _mm256_blendv_pd(old_r, nr, active));
        store(state.v_im, at(n), _mm256_blendv_pd(old_i, ni, active));
      }
      for (std::size_t n = 0; n < nodes; ++n) {
        store(state.i_re, at(n), _mm256_blendv_pd(load(state.i_re, at(n)), _mm256_loadu_pd(wr.data() + n * kLaneBlock), active));
        store(state.i_im, at(n), _mm256_blendv_pd(load(state.i_im, at(n)), _mm256_loadu_pd(wi.data() + n * kLaneBlock), active));
      }

      const int live = _mm256_movemask_pd(active);
      const int still = _mm256_movemask_pd(moved);
      for (std::size_t k = 0; k < kLaneBlock; ++k) {
        if ((live >> k) & 1) {
          state.iterations[base + k] = iter;
          if (((still >> k) & 1) == 0) state.converged[base + k] = 1;
        }
      }
      active = _mm256_and_pd(active, moved);
    }
  }
}

std::size_t hamming(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const auto equal = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb)));
    count += 32 - static_cast<std::size_t>(std::popcount(equal));
  }
  for (; i < n; ++i) count += a[i] != b[i];
  return count;
}

}  // namespace phasebal::simd::avx2
