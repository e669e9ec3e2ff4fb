#pragma once

#include <vector>

#include "edlab/transport.hpp"

namespace edlab::verify {

struct ResidualReport {
  double residual = 0;
  double scale = 0;  // max modulus over the identity's individual terms
  bool pass(double rel_tol) const { return residual <= rel_tol * scale + 1e-15; }
};

/// lattice Ward identity at (p0, p):
/// p0 <T j_{0,p}; j_{nu,-p}> - eta(p) <T j_{1,p}; j_{nu,-p}> + i S_nu(p),
/// with eta(p) = 1 - e^{-ip} and S_nu(p) = sum_x e^{-ipx} <[rho_x, j_{nu,0}]>
ResidualReport ward_residual(const SpectralData& spec, double mom, double p0, int nu);

/// |<T j_{1,(0,p)}; j_{1,(0,-p)}> + <Delta_0>|
ResidualReport static_jj_identity(const SpectralData& spec, double mom);

struct WickReport {
  cd lhs;             // int_{-T}^0 e^{eta t} (1/L) <[j_p(t), j_-p]> dt
  cd euclidean_part;  // i int_0^beta e^{-i eta_b t} (1/L) <j_p(-it) j_-p> dt
  cd err1;            // eta -> eta_b kernel replacement
  cd err2;            // vertical contour segment at Re z = -T
  double residual = 0;
  double scale = 0;
  double eta = 0, eta_beta = 0, T = 0, p = 0, beta = 0;
  bool pass(double rel_tol = 1e-9) const { return residual <= rel_tol * scale + 1e-15; }
};

WickReport wick_decomposition(const SpectralData& spec, double eta, double mom, double T);

struct ScalingFit {
  double beta_slope = 0;      // log|err1| vs log beta
  double T_rate = 0;          // -d log|err2| / dT
  double T_rate_target = 0;   // eta of the fitted series
  double eta_slope = 0;       // log|err1| vs log eta
  double C_max = 0;           // max |err1+err2| / (1/(eta^2 beta) + e^{-eta T})
  double C_median = 0;
  std::vector<std::string> lines;  // per-point log
  bool degenerate = false;
};

struct ScalingGrid {
  std::vector<double> beta_axis;  // half-spacing-aligned ladder for the slope fit
  std::vector<double> T_axis;
  std::vector<double> eta_axis;   // half-grid-aligned at eta_fit_beta
  double eta_star = 0.5;          // eta of the beta/T fits
  double T_star = 30.0;
  double eta_fit_beta = 40.0;
  double mom = 0;
  /// default 4x4x4 geometric design; mom = 2 pi / L
  static ScalingGrid standard(int L, double eta_star = 0.5);
};

ScalingFit error_scaling_sweep(const ModelParams& p, const ScalingGrid& grid);

struct AdiabaticOptions {
  double E_field = 1e-3;
  double eta = 0.2;
  double beta = kBetaInf;
  double rel_tol = 1e-9;       // integrator tolerance
  double horizon_factor = 8.0; // T_sim = horizon_factor / eta
};

struct AdiabaticReport {
  std::vector<int> bonds;              // bulk bonds compared
  std::vector<double> simulated;       // Tr j_x rho(0)
  std::vector<double> predicted;       // first-order Lehmann response
  std::vector<double> rel_deviation;
  double central_bond_rel_dev = 0;
  double max_bulk_rel_dev = 0;
};

/// drives H + e^{eta t} E X on an open chain from the thermal state at
/// t = -horizon/eta and compares the t = 0 current against linear response
AdiabaticReport adiabatic_response_sim(const ModelParams& p, const AdiabaticOptions& opt = {});

struct BoundProbe {
  cd z;
  double modulus;     // |(1/L)<j_p(z) j_-p>|
  double bound;       // Cauchy-Schwarz bound from the Im z row
  bool ok;            // modulus <= bound + 1e-10 * scale
};

std::vector<BoundProbe> complex_bound_probe(const SpectralData& spec, double mom,
                                            std::span<const cd> samples);

}  // namespace edlab::verify
