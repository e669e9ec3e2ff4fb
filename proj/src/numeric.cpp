#include "edlab/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#ifdef EDLAB_HAVE_LAPACKE
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

namespace edlab {

namespace {
template <class T>
T pairwise_impl(std::span<const T> v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    T acc{};
    for (std::size_t i = lo; i < hi; ++i) acc += v[i];
    return acc;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_impl(v, lo, mid) + pairwise_impl(v, mid, hi);
}
}  // namespace

cd pairwise_sum(std::span<const cd> terms) {
  return terms.empty() ? cd{0, 0} : pairwise_impl(terms, 0, terms.size());
}

double pairwise_sum(std::span<const double> terms) {
  return terms.empty() ? 0.0 : pairwise_impl(terms, 0, terms.size());
}

void eigh(const MatrixXcd& H, VectorXd& evals, MatrixXcd& evecs) {
  const int n = static_cast<int>(H.rows());
  evecs = H;
  evals.resize(n);
  if (n == 0) return;
#ifdef EDLAB_HAVE_LAPACKE
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                            evecs.data(), n, evals.data());
  if (info == 0) return;
  // fall through to Eigen on LAPACK failure
#endif
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  evals = es.eigenvalues();
  evecs = es.eigenvectors();
}

VectorXd eigvalsh(const MatrixXcd& H) {
  const int n = static_cast<int>(H.rows());
  VectorXd evals(n);
  if (n == 0) return evals;
#ifdef EDLAB_HAVE_LAPACKE
  MatrixXcd scratch = H;
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, scratch.data(), n, evals.data());
  if (info == 0) return evals;
#endif
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  return es.eigenvalues();
}

Eigen::Vector3d fit_inverse_poly(std::span<const double> L, std::span<const double> y) {
  if (L.size() != y.size() || L.size() < 3) throw std::invalid_argument("need >= 3 points");
  Eigen::MatrixXd A(L.size(), 3);
  Eigen::VectorXd b(L.size());
  for (std::size_t i = 0; i < L.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = 1.0 / L[i];
    A(i, 2) = 1.0 / (L[i] * L[i]);
    b(i) = y[i];
  }
  return A.colPivHouseholderQr().solve(b);
}

std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw std::runtime_error("degenerate line fit");
  double slope = (n * sxy - sx * sy) / denom;
  double icpt = (sy - slope * sx) / n;
  return {icpt, slope};
}

cd exp_window_integral(double eta, double om, double T) {
  const cd a(eta, om);
  if (std::abs(a) * T < 1e-8) {
    // series of (1 - e^{-aT})/a
    return T * (1.0 - a * T / 2.0 + a * a * T * T / 6.0);
  }
  return (1.0 - std::exp(-a * T)) / a;
}

double closest_matsubara(double eta, double beta) {
  const double sp = 2.0 * kPi / beta;
  return sp * std::round(eta / sp);
}

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace edlab
