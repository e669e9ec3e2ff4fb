#pragma once

#include <random>

#include "edlab/spectra.hpp"

namespace edlab::testutil {

inline BlockOperator identity_op(std::span<const FockSector> sectors) {
  BlockOperator op;
  op.name = "1";
  op.hermitian = true;
  for (const auto& s : sectors) {
    SparseCd m(s.dim(), s.dim());
    m.setIdentity();
    op.blocks[{s.N, s.N}] = m;
  }
  return op;
}

/// interacting parameter draw in the small-coupling regime
inline ModelParams random_params(std::mt19937_64& rng, int L, bool with_flux = true) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ModelParams p;
  p.L = L;
  p.lambda = 0.5 * u(rng);
  p.epsilon = 0.25 * u(rng);
  p.h_field = 0.4 * u(rng);
  p.v_couplings = {{2, u(rng)}};
  if (L >= 8 && u(rng) > 0.3) p.v_couplings.push_back({3, 0.5 * u(rng)});
  if (with_flux) p.flux_phi = 0.9 * kPi * u(rng);
  return p;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace edlab::testutil
