#pragma once

#include <optional>
#include <vector>

#include "edlab/numeric.hpp"
#include "edlab/model.hpp"

namespace edlab::ff {

/// Closed-form single-particle data at lambda = epsilon = 0.
/// Momenta k_j = 2 pi j / L (periodic) or 2 pi (j + 1/2) / L (antiperiodic);
/// the flux enters as the shift k -> k + phi, energies eps(k) = -J cos(k+phi) - h.
struct FreeSpectrum {
  int L;
  double J = 1.0;
  double h = 0.0;
  double phi = 0.0;
  bool antiperiodic = false;

  std::vector<double> momenta() const;
  std::vector<double> energies() const;

  /// grand-canonical occupations at inverse temperature beta (full Fock-space
  /// Gibbs state); at beta = inf exact zero modes carry f = 1/2
  std::vector<double> occupations_grand(double beta) const;
  /// Slater-determinant occupations of the N lowest levels (beta = inf, fixed N);
  /// throws if the N-th level is shell-degenerate
  std::vector<double> occupations_filling(int N) const;

  /// many-body ground energy at filling N (sum of N lowest levels, +h L/2 offset)
  double ground_energy(int N) const;
};

struct FFEnsemble {
  FreeSpectrum spec;
  double beta;
  std::vector<double> f;  // occupations
};

FFEnsemble grand_ensemble(const FreeSpectrum& s, double beta);
FFEnsemble filling_ensemble(const FreeSpectrum& s, int N);

enum class FFKind { jj, rhorho, jrho, rhoj };

/// per-site Matsubara correlator, same normalization and connected-part
/// convention as correlators::matsubara_correlator
cd ff_matsubara(const FFEnsemble& e, FFKind kind, double mom, double p0, bool connected = true);
/// (1/L) <[A_p(t), B_-p]>
cd ff_realtime_commutator(const FFEnsemble& e, FFKind kind, double mom, double t);
/// (1/L) <A_p(z) B_-p>
cd ff_complex_time(const FFEnsemble& e, FFKind kind, double mom, cd z);

double ff_kinetic_per_site(const FFEnsemble& e);

// transport formulations, same conventions as the ED engine
cd ff_canonical_H(const FFEnsemble& e, double eta, double mom, double T);
cd ff_canonical_K(const FFEnsemble& e, double eta, double mom, double T, bool damped_kernel = false);
cd ff_euclidean_H(const FFEnsemble& e, double p0, double mom);
cd ff_euclidean_K(const FFEnsemble& e, double p0, double mom);
cd ff_thermal_drude(const FFEnsemble& e, double eta);
double ff_kubo_JJ_per_site(const FFEnsemble& e);

/// (1/L) d^2 E_0 / d phi^2 at filling N, analytic; reported in the same
/// closed-forms normalization as transport::twist_drude (factor 2).
/// Throws when the occupied shell is degenerate at phi.
double ff_twist_drude(int L, int N, bool antiperiodic, double J = 1.0, double phi = 0.0);
/// charge-step curvature |kappa| in closed-forms normalization (factor 1/2)
double ff_field_susceptibility(int L, int N, bool antiperiodic, double J = 1.0);

}  // namespace edlab::ff
