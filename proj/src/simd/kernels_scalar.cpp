#include <cmath>
#include <vector>

#include "phasebal/simd/kernels.hpp"

namespace phasebal::simd::scalar {

void sweep(const SweepProblem& problem, SweepState& state) {
  const Ladder& ladder = *problem.ladder;
  const std::size_t nodes = ladder.size();
  const std::size_t lanes = problem.lanes;
  const double tol2 = problem.tolerance * problem.tolerance;
  state.resize(nodes, lanes);

  std::vector<double> jr(nodes), ji(nodes);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    auto at = [lanes, lane](std::size_t node) { return node * lanes + lane; };
    for (std::size_t n = 0; n < nodes; ++n) {
      state.v_re[at(n)] = problem.source_voltage;
      state.v_im[at(n)] = 0.0;
    }

    int iter = 0;
    bool done = false;
    while (!done && iter < problem.max_iterations) {
      ++iter;
      // Load currents I = conj(S / V).
      for (std::size_t n = 0; n < nodes; ++n) {
        const double p = problem.p[at(n)];
        const double q = problem.q[at(n)];
        const double vr = state.v_re[at(n)];
        const double vi = state.v_im[at(n)];
        const double d = vr * vr + vi * vi;
        const bool idle = (p == 0.0) & (q == 0.0);
        jr[n] = idle ? 0.0 : (p * vr + q * vi) / d;
        ji[n] = idle ? 0.0 : (p * vi - q * vr) / d;
      }
      for (std::size_t n = nodes - 1; n > 0; --n) {
        const auto up = static_cast<std::size_t>(ladder.parent[n]);
        jr[up] = jr[up] + jr[n];
        ji[up] = ji[up] + ji[n];
      }

      bool moved = false;
      for (std::size_t n = 1; n < nodes; ++n) {
        const auto up = static_cast<std::size_t>(ladder.parent[n]);
        const double r = ladder.r[n];
        const double x = ladder.x[n];
        const double nr = state.v_re[at(up)] - (r * jr[n] - x * ji[n]);
        const double ni = state.v_im[at(up)] - (r * ji[n] + x * jr[n]);
        const double dr = nr - state.v_re[at(n)];
        const double di = ni - state.v_im[at(n)];
        const double d2 = dr * dr + di * di;
        moved |= !(d2 < tol2);
        state.v_re[at(n)] = nr;
        state.v_im[at(n)] = ni;
      }
      for (std::size_t n = 0; n < nodes; ++n) {
        state.i_re[at(n)] = jr[n];
        state.i_im[at(n)] = ji[n];
      }
      done = !moved;
    }
    state.iterations[lane] = iter;
    state.converged[lane] = done ? 1 : 0;
  }
}

std::size_t hamming(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += a[i] != b[i];
  return count;
}

}  // namespace phasebal::simd::scalar
