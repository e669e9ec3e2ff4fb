#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "edlab/numeric.hpp"

namespace edlab {

enum class Boundary { periodic, antiperiodic, open };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct VCoupling {
  int range = 2;        // r >= 2; r = 1 would duplicate the lambda term
  double strength = 0;  // v(r)
};

/// Chain parameters. Hopping enters the Hamiltonian as -(J_hop/2)(a+_x a-_{x+1} + h.c.),
/// so the single-particle dispersion is -J_hop cos k. `flux_phi` is the per-bond
/// twist phase, `external_h` the probe field of the susceptibility Hamiltonian
/// (+h sum_x (n_x - 1/2) by default, sign switched by probe_sign).
struct ModelParams {
  double J_hop = 1.0;
  double lambda = 0.0;
  double h_field = 0.0;
  double epsilon = 0.0;
  std::vector<VCoupling> v_couplings;
  int L = 8;
  double flux_phi = 0.0;
  double external_h = 0.0;
  int probe_sign = +1;
  Boundary boundary = Boundary::periodic;

  void validate() const;  // throws std::invalid_argument
  std::uint64_t hash() const;
};

/// Occupation basis of the fixed-N sector: L-bit words, bit x = site x, sorted ascending.
/// Kets are ordered as (a+_0)^{n_0} (a+_1)^{n_1} ... |0>.
struct FockSector {
  int L = 0;
  int N = 0;
  std::vector<std::uint32_t> states;

  static FockSector build(int L, int N);
  int dim() const { return static_cast<int>(states.size()); }
  int index_of(std::uint32_t w) const;  // -1 if absent
};

using SparseCd = Eigen::SparseMatrix<cd>;

/// Sector-blocked operator. Number-conserving operators hold only diagonal
/// (N, N) blocks; the key is (sector_in, sector_out).
struct BlockOperator {
  std::map<std::pair<int, int>, SparseCd> blocks;
  bool hermitian = false;
  std::string name;

  bool number_conserving() const;
  const SparseCd* block(int n_in, int n_out) const;
  const SparseCd* diag_block(int n) const { return block(n, n); }
  double hermiticity_defect() const;  // max over blocks of |B - B^dag| / |B|
  void write_coo(std::ostream& os) const;
};

BlockOperator operator*(const BlockOperator& a, const BlockOperator& b);
BlockOperator commutator(const BlockOperator& a, const BlockOperator& b);
BlockOperator operator+(const BlockOperator& a, const BlockOperator& b);
BlockOperator operator*(cd s, const BlockOperator& a);

double operator_norm(const SparseCd& m);     // largest singular value
double operator_norm(const BlockOperator& a);  // max over blocks

// ---- builders (one diagonal block per listed sector) ----

BlockOperator build_hamiltonian(const ModelParams& p, const FockSector& sector);
BlockOperator build_hamiltonian(const ModelParams& p, std::span<const FockSector> sectors);

BlockOperator build_density(const ModelParams& p, int x, std::span<const FockSector> sectors);
BlockOperator build_density_fourier(const ModelParams& p, double mom, std::span<const FockSector> sectors);
BlockOperator build_current(const ModelParams& p, int x, std::span<const FockSector> sectors);
BlockOperator build_current_fourier(const ModelParams& p, double mom, std::span<const FockSector> sectors);
BlockOperator build_kinetic(const ModelParams& p, std::span<const FockSector> sectors);
BlockOperator build_kinetic_site(const ModelParams& p, int x, std::span<const FockSector> sectors);
BlockOperator build_number(const ModelParams& p, std::span<const FockSector> sectors);
/// sum_x x n_x; requires open boundary
BlockOperator build_position(const ModelParams& p, std::span<const FockSector> sectors);
/// j_{nu,p}: nu = 0 density, nu = 1 current
BlockOperator build_j_fourier(const ModelParams& p, int nu, double mom, std::span<const FockSector> sectors);

/// momentum grid index of mom = 2 pi m / L; throws on off-grid values
int momentum_index(double mom, int L);

/// operator norm of i[H, rho_x] + j_x - j_{x-1}; nullopt at open-chain edges
std::optional<double> continuity_residual(const ModelParams& p, std::span<const FockSector> sectors, int x);

std::vector<FockSector> all_sectors(int L);

}  // namespace edlab
