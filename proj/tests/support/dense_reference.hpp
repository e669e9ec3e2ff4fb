#pragma once

// Independent full-Fock-space reference built from Jordan-Wigner strings and
// Kronecker products. Completely separate code path from the bit-encoded
// sector engine: fermionic signs come from explicit Z-string matrices, time
// evolution and Gibbs states from dense matrix exponentials.

#include <vector>

#include "edlab/model.hpp"

namespace edlab::dense_ref {

/// 2^L x 2^L matrices; index bit x = occupation of site x (site 0 least significant)
MatrixXcd annihilator(int L, int x);
MatrixXcd creator(int L, int x);
MatrixXcd number_op(int L, int x);

MatrixXcd hamiltonian(const ModelParams& p);
MatrixXcd current(const ModelParams& p, int x);
MatrixXcd current_fourier(const ModelParams& p, double mom);
MatrixXcd density_fourier(const ModelParams& p, double mom);
MatrixXcd kinetic(const ModelParams& p);

/// rows/cols with popcount == N, in ascending word order (matches FockSector)
MatrixXcd sector_block(const MatrixXcd& full, int L, int N);

/// Tr A e^{-beta H} / Tr e^{-beta H} via dense exponentials
cd gibbs_expectation(const MatrixXcd& H, const MatrixXcd& A, double beta);

/// (1/L) Tr rho [A(t), B] with A(t) = e^{iHt} A e^{-iHt}
cd realtime_commutator(const MatrixXcd& H, const MatrixXcd& A, const MatrixXcd& B, double beta,
                       double t, int L);

/// (1/L) Tr rho A(-i x0) B  (imaginary-time evolution by dense exponentials)
cd imaginary_time_two_point(const MatrixXcd& H, const MatrixXcd& A, const MatrixXcd& B,
                            double beta, double x0, int L);

}  // namespace edlab::dense_ref
