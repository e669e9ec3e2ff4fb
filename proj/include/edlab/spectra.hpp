#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "edlab/model.hpp"

namespace edlab {

constexpr double kBetaInf = std::numeric_limits<double>::infinity();

struct SectorSpectrum {
  FockSector sector;
  VectorXd evals;      // ascending
  MatrixXcd evecs;     // empty when values_only
  VectorXd weights;    // Gibbs weights, normalized across all retained sectors
};

struct DiagOptions {
  std::optional<std::vector<int>> sectors;  // particle numbers; all if empty
  int dim_cap = 5000;
  bool values_only = false;
  bool use_cache = false;  // eigenvalue cache under EDLAB_CACHE_DIR
};

struct SpectralData {
  ModelParams params;
  double beta = kBetaInf;
  std::vector<SectorSpectrum> sectors;
  double ground_energy = 0;
  int ground_sector = 0;       // particle number of the global minimum
  int ground_degeneracy = 1;   // across all retained sectors
  double energy_scale = 1;     // max |E| over retained sectors
  double deg_tol = 0;

  const SectorSpectrum* find(int N) const;
  std::vector<FockSector> sector_list() const;
};

/// Dense per-sector diagonalization plus Gibbs weights at inverse temperature
/// beta (kBetaInf supported: uniform weights on the detected ground multiplet).
SpectralData diagonalize(const ModelParams& p, double beta, const DiagOptions& opt = {});

struct GroundStateInfo {
  double energy;
  int sector;       // particle number
  int degeneracy;
};

GroundStateInfo ground_state(const ModelParams& p, const DiagOptions& opt = {});

/// sum_n w_n <n|A|n>; rejects operators with mixed-sector blocks
cd thermal_expectation(const BlockOperator& A, const SpectralData& spec);

/// recompute Gibbs weights in place for a new beta (spectra unchanged)
void set_beta(SpectralData& spec, double beta);

/// ground energy of one sector, eigenvalues-only path (cache-aware)
double sector_ground_energy(const ModelParams& p, int N, const DiagOptions& opt = {});

}  // namespace edlab
