#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace edlab {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;

/// Pairwise (binary-tree) reduction. Deterministic for a fixed input order
/// regardless of how the partials were produced.
cd pairwise_sum(std::span<const cd> terms);
double pairwise_sum(std::span<const double> terms);

/// Eigendecomposition of a Hermitian matrix (ascending eigenvalues).
/// Backed by LAPACK zheevd when available, Eigen otherwise.
void eigh(const MatrixXcd& H, VectorXd& evals, MatrixXcd& evecs);
VectorXd eigvalsh(const MatrixXcd& H);

/// Least-squares fit of y ~ a + b/L + c/L^2; returns (a, b, c).
Eigen::Vector3d fit_inverse_poly(std::span<const double> L, std::span<const double> y);

/// Least-squares straight line y = a + b x; returns (a, b).
std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y);

/// closed form of \int_{-T}^0 e^{(eta + i om) t} dt with a stable small-|a|T branch
cd exp_window_integral(double eta, double om, double T);

/// closest element of (2 pi / beta) Z to eta
double closest_matsubara(double eta, double beta);

/// FNV-1a over raw bytes; used for reproducible parameter hashes
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// shortest-roundtrip-ish fixed formatting for reproducible records
std::string format_double(double v);

inline bool is_inf(double b) { return std::isinf(b); }

}  // namespace edlab
