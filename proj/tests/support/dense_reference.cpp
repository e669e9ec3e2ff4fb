#include "support/dense_reference.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <bit>
#include <cmath>

namespace edlab::dense_ref {

namespace {

MatrixXcd kron_chain(int L, int site, const MatrixXcd& at_site, bool z_string_below) {
  const MatrixXcd I2 = MatrixXcd::Identity(2, 2);
  MatrixXcd Z(2, 2);
  Z << 1, 0, 0, -1;
  // first Kronecker factor carries the highest bit = site L-1
  MatrixXcd acc = MatrixXcd::Identity(1, 1);
  for (int x = L - 1; x >= 0; --x) {
    const MatrixXcd& f = (x == site) ? at_site : (x < site && z_string_below ? Z : I2);
    acc = Eigen::kroneckerProduct(acc, f).eval();
  }
  return acc;
}

std::vector<std::pair<int, int>> bonds(const ModelParams& p) {
  std::vector<std::pair<int, int>> out;
  for (int x = 0; x + 1 < p.L; ++x) out.push_back({x, x + 1});
  if (p.boundary != Boundary::open) out.push_back({p.L - 1, 0});
  return out;
}

double wrap_sign(const ModelParams& p, int x) {
  return (x == p.L - 1 && p.boundary == Boundary::antiperiodic) ? -1.0 : 1.0;
}

}  // namespace

MatrixXcd annihilator(int L, int x) {
  MatrixXcd a(2, 2);
  a << 0, 1, 0, 0;  // <0|a|1> = 1
  return kron_chain(L, x, a, true);
}

MatrixXcd creator(int L, int x) { return annihilator(L, x).adjoint(); }

MatrixXcd number_op(int L, int x) {
  MatrixXcd n(2, 2);
  n << 0, 0, 0, 1;
  return kron_chain(L, x, n, false);
}

MatrixXcd hamiltonian(const ModelParams& p) {
  const int dim = 1 << p.L;
  MatrixXcd H = MatrixXcd::Zero(dim, dim);
  const cd eip = std::polar(1.0, p.flux_phi);
  const MatrixXcd I = MatrixXcd::Identity(dim, dim);
  for (auto [x, y] : bonds(p)) {
    const double ws = wrap_sign(p, x);
    H += -0.5 * p.J_hop * ws *
         (eip * creator(p.L, x) * annihilator(p.L, y) +
          std::conj(eip) * creator(p.L, y) * annihilator(p.L, x));
    MatrixXcd nx = number_op(p.L, x) - 0.5 * I;
    MatrixXcd ny = number_op(p.L, y) - 0.5 * I;
    H += -p.lambda * nx * ny;
  }
  for (int x = 0; x < p.L; ++x)
    H += (-p.h_field + p.probe_sign * p.external_h) * (number_op(p.L, x) - 0.5 * I);
  for (const auto& vc : p.v_couplings)
    for (int x = 0; x < p.L; ++x) {
      int y = x + vc.range;
      if (y >= p.L) {
        if (p.boundary == Boundary::open) continue;
        y -= p.L;
      }
      H += -p.epsilon * 2.0 * vc.strength * (number_op(p.L, x) - 0.5 * I) *
           (number_op(p.L, y) - 0.5 * I);
    }
  return H;
}

MatrixXcd current(const ModelParams& p, int x) {
  const int y = (x + 1) % p.L;
  if (p.boundary == Boundary::open && x == p.L - 1)
    throw std::invalid_argument("no bond at the open edge");
  const cd eip = std::polar(1.0, p.flux_phi);
  const double ws = wrap_sign(p, x);
  return cd(0, 0.5) * p.J_hop * ws *
         (std::conj(eip) * creator(p.L, y) * annihilator(p.L, x) -
          eip * creator(p.L, x) * annihilator(p.L, y));
}

MatrixXcd current_fourier(const ModelParams& p, double mom) {
  const int dim = 1 << p.L;
  MatrixXcd J = MatrixXcd::Zero(dim, dim);
  for (int x = 0; x < p.L; ++x) {
    if (p.boundary == Boundary::open && x == p.L - 1) continue;
    J += std::polar(1.0, -mom * x) * current(p, x);
  }
  return J;
}

MatrixXcd density_fourier(const ModelParams& p, double mom) {
  const int dim = 1 << p.L;
  MatrixXcd R = MatrixXcd::Zero(dim, dim);
  for (int x = 0; x < p.L; ++x) R += std::polar(1.0, -mom * x) * number_op(p.L, x);
  return R;
}

MatrixXcd kinetic(const ModelParams& p) {
  const int dim = 1 << p.L;
  MatrixXcd K = MatrixXcd::Zero(dim, dim);
  const cd eip = std::polar(1.0, p.flux_phi);
  for (auto [x, y] : bonds(p)) {
    const double ws = wrap_sign(p, x);
    K += -0.5 * p.J_hop * ws *
         (eip * creator(p.L, x) * annihilator(p.L, y) +
          std::conj(eip) * creator(p.L, y) * annihilator(p.L, x));
  }
  return K;
}

MatrixXcd sector_block(const MatrixXcd& full, int L, int N) {
  std::vector<int> idx;
  for (int w = 0; w < (1 << L); ++w)
    if (std::popcount(static_cast<unsigned>(w)) == N) idx.push_back(w);
  MatrixXcd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = full(idx[i], idx[j]);
  return out;
}

cd gibbs_expectation(const MatrixXcd& H, const MatrixXcd& A, double beta) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  const double e0 = es.eigenvalues().minCoeff();
  MatrixXcd shifted = -beta * (H - e0 * MatrixXcd::Identity(H.rows(), H.cols()));
  MatrixXcd rho = shifted.exp();
  const cd Z = rho.trace();
  return (A * rho).trace() / Z;
}

cd realtime_commutator(const MatrixXcd& H, const MatrixXcd& A, const MatrixXcd& B, double beta,
                       double t, int L) {
  MatrixXcd U = (cd(0, 1) * t * H).exp();
  MatrixXcd At = U * A * U.adjoint();
  return gibbs_expectation(H, At * B - B * At, beta) / static_cast<double>(L);
}

cd imaginary_time_two_point(const MatrixXcd& H, const MatrixXcd& A, const MatrixXcd& B,
                            double beta, double x0, int L) {
  MatrixXcd Ep = (x0 * H).exp();
  MatrixXcd Em = (-x0 * H).exp();
  return gibbs_expectation(H, Ep * A * Em * B, beta) / static_cast<double>(L);
}

}  // namespace edlab::dense_ref
