#pragma once

#include <functional>
#include <vector>

#include "edlab/spectra.hpp"

namespace edlab {

/// Eigenbasis matrix elements of a pair (A, B) over the retained sectors,
/// ready for Lehmann pair sums. Pairs with max(w_n, w_m) |A_nm B_mn| below
/// trunc_tol are skipped; the skipped mass is accumulated and reported.
struct LehmannTable {
  const SpectralData* spec = nullptr;
  std::vector<MatrixXcd> A;  // V^dag A V per sector
  std::vector<MatrixXcd> B;
  cd mean_A{0, 0};           // <A>, <B> for connected subtractions
  cd mean_B{0, 0};
  double trunc_tol = 1e-14;
  mutable double dropped_mass = 0;

  double adjoint_defect() const;  // max |B_mn - conj(A_nm)|, for B = A^dag pairs
};

LehmannTable make_table(const SpectralData& spec, const BlockOperator& A, const BlockOperator& B,
                        double trunc_tol = 1e-14);

/// sum over retained (n, m) pairs of kern(w_n, w_m, om_nm) * A_nm * B_mn.
/// Rows are data-parallel; the result comes from a fixed-order pairwise tree
/// over row partials, so it is bitwise reproducible at any thread count.
template <class Kernel>
cd pair_sum(const LehmannTable& t, Kernel&& kern) {
  std::size_t total = 0;
  for (const auto& A : t.A) total += A.rows();
  std::vector<cd> row_sums(total, cd{0, 0});
  std::vector<double> row_drop(total, 0.0);
  std::size_t base = 0;
  for (std::size_t s = 0; s < t.A.size(); ++s) {
    const auto& E = t.spec->sectors[s].evals;
    const auto& w = t.spec->sectors[s].weights;
    const auto& A = t.A[s];
    const auto& B = t.B[s];
    const int d = static_cast<int>(E.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int n = 0; n < d; ++n) {
      cd acc{0, 0};
      double drop = 0;
      for (int m = 0; m < d; ++m) {
        const cd ab = A(n, m) * B(m, n);
        const double mag = std::max(w[n], w[m]) * std::abs(ab);
        if (mag < t.trunc_tol) {
          drop += mag;
          continue;
        }
        acc += kern(w[n], w[m], E[n] - E[m]) * ab;
      }
      row_sums[base + n] = acc;
      row_drop[base + n] = drop;
    }
    base += d;
  }
  t.dropped_mass = pairwise_sum(row_drop);
  return pairwise_sum(row_sums);
}

/// (1/L) <[ j_p(t), j_-p ]> (or any A(t), B pair); purely imaginary for B = A^dag
cd realtime_commutator(const LehmannTable& jj, double t);

/// (1/L) < A(z) B >, z complex; Im z <= 0 is the bounded regime, other z
/// accepted when allow_any_z (throws on exponent overflow)
cd complex_time_correlator(const LehmannTable& t, cd z, bool allow_any_z = false);

/// per-site time-ordered Euclidean correlator at Matsubara frequency p0:
/// (1/L) int_0^beta dx0 e^{-i p0 x0} sum_x e^{-ipx} <T A_x(-i x0); B_0>.
/// `connected` subtracts beta <A><B>/L at p0 = 0. p0 must sit on the
/// (2 pi / beta) grid at finite beta.
cd matsubara_correlator(const LehmannTable& t, double p0, bool connected = true);

/// Kubo scalar product int_0^beta dx0 <A(-i x0) B> (disconnected part retained)
cd kubo_inner(const LehmannTable& t);

// convenience tables
LehmannTable jj_table(const SpectralData& spec, double mom);                    // (j_p, j_-p)
LehmannTable rho_rho_table(const SpectralData& spec, double mom);               // (rho_p, rho_-p)
LehmannTable j_pair_table(const SpectralData& spec, int mu, int nu, double mom); // (j_{mu,p}, j_{nu,-p})

}  // namespace edlab
