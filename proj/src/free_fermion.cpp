#include "edlab/free_fermion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "edlab/spectra.hpp"
#include "edlab/transport.hpp"

namespace edlab::ff {

namespace {
constexpr double kShellTol = 1e-12;
}

std::vector<double> FreeSpectrum::momenta() const {
  std::vector<double> k(L);
  for (int j = 0; j < L; ++j) k[j] = 2.0 * kPi * (j + (antiperiodic ? 0.5 : 0.0)) / L;
  return k;
}

std::vector<double> FreeSpectrum::energies() const {
  std::vector<double> e(L);
  auto k = momenta();
  for (int j = 0; j < L; ++j) e[j] = -J * std::cos(k[j] + phi) - h;
  return e;
}

std::vector<double> FreeSpectrum::occupations_grand(double beta) const {
  auto e = energies();
  std::vector<double> f(L);
  for (int j = 0; j < L; ++j) {
    if (is_inf(beta)) {
      f[j] = e[j] < -kShellTol ? 1.0 : (e[j] > kShellTol ? 0.0 : 0.5);
    } else {
      // stable logistic
      f[j] = e[j] >= 0 ? std::exp(-beta * e[j]) / (1.0 + std::exp(-beta * e[j]))
                       : 1.0 / (1.0 + std::exp(beta * e[j]));
    }
  }
  return f;
}

std::vector<double> FreeSpectrum::occupations_filling(int N) const {
  if (N < 0 || N > L) throw std::invalid_argument("bad filling");
  auto e = energies();
  std::vector<int> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e[a] < e[b]; });
  if (N > 0 && N < L && e[order[N]] - e[order[N - 1]] < kShellTol)
    throw std::runtime_error("degenerate shell at the Fermi level, filling ensemble ill-defined");
  std::vector<double> f(L, 0.0);
  for (int i = 0; i < N; ++i) f[order[i]] = 1.0;
  return f;
}

double FreeSpectrum::ground_energy(int N) const {
  auto e = energies();
  std::sort(e.begin(), e.end());
  double E = 0;
  for (int i = 0; i < N; ++i) E += e[i];
  return E + h * L / 2.0;  // the -h sum (n - 1/2) constant
}

FFEnsemble grand_ensemble(const FreeSpectrum& s, double beta) {
  return {s, beta, s.occupations_grand(beta)};
}

FFEnsemble filling_ensemble(const FreeSpectrum& s, int N) {
  return {s, kBetaInf, s.occupations_filling(N)};
}

namespace {

// current vertex of j_p in the plane-wave basis: j_p = sum_k v(k) a+_k a_{k+p}
inline cd vertex_j(const FreeSpectrum& s, double k, double p) {
  const double kap = k + s.phi;
  return cd(0, 0.5) * s.J * (std::polar(1.0, -kap) - std::polar(1.0, kap + p));
}

struct Pair {
  cd vv;       // v_A(k) v_B(k+p)
  double fk, fkp, ek, ekp;
};

std::vector<Pair> bubble(const FFEnsemble& e, FFKind kind, double mom) {
  const int L = e.spec.L;
  momentum_index(mom, L);
  auto ks = e.spec.momenta();
  auto en = e.spec.energies();
  const int pidx = momentum_index(mom, L);
  std::vector<Pair> out(L);
  for (int j = 0; j < L; ++j) {
    const int jp = (j + pidx) % L;
    cd va, vb;
    switch (kind) {
      case FFKind::jj:
        va = vertex_j(e.spec, ks[j], mom);
        vb = vertex_j(e.spec, ks[jp], -mom);
        break;
      case FFKind::rhorho:
        va = vb = 1.0;
        break;
      case FFKind::jrho:
        va = vertex_j(e.spec, ks[j], mom);
        vb = 1.0;
        break;
      case FFKind::rhoj:
        va = 1.0;
        vb = vertex_j(e.spec, ks[jp], -mom);
        break;
    }
    out[j] = {va * vb, e.f[j], e.f[jp], en[j], en[jp]};
  }
  return out;
}

cd connected_mean(const FFEnsemble& e, FFKind kind, double mom) {
  // <A_p><B_-p> is nonzero only at p = 0
  if (momentum_index(mom, e.spec.L) != 0) return {0, 0};
  auto ks = e.spec.momenta();
  cd mA{0, 0}, mB{0, 0};
  for (int j = 0; j < e.spec.L; ++j) {
    cd va, vb;
    switch (kind) {
      case FFKind::jj: va = vb = vertex_j(e.spec, ks[j], 0.0); break;
      case FFKind::rhorho: va = vb = 1.0; break;
      case FFKind::jrho: va = vertex_j(e.spec, ks[j], 0.0); vb = 1.0; break;
      case FFKind::rhoj: va = 1.0; vb = vertex_j(e.spec, ks[j], 0.0); break;
    }
    mA += va * e.f[j];
    mB += vb * e.f[j];
  }
  return mA * mB;
}

}  // namespace

cd ff_matsubara(const FFEnsemble& e, FFKind kind, double mom, double p0, bool connected) {
  // the Wick bubble is the connected correlator; the disconnected part is
  // added back for the unconnected variant
  const double beta = e.beta;
  if (!is_inf(beta)) {
    const double sp = 2.0 * kPi / beta;
    if (std::abs(p0 - sp * std::round(p0 / sp)) > 1e-9)
      throw std::invalid_argument("p0 off the Matsubara grid");
  }
  cd acc{0, 0};
  for (const auto& b : bubble(e, kind, mom)) {
    const double om = b.ek - b.ekp;
    if (std::abs(om) <= 1e-12) {
      if (p0 == 0.0) {
        if (is_inf(beta)) {
          if (b.fk * (1.0 - b.fkp) * std::abs(b.vv) > 1e-300)
            throw std::overflow_error("zero-mode divergence");
          continue;
        }
        acc += b.vv * beta * b.fk * (1.0 - b.fkp);
      }
      continue;
    }
    acc += b.vv * (b.fkp - b.fk) / cd(om, -p0);
  }
  acc /= e.spec.L;
  if (!connected && p0 == 0.0) {
    if (is_inf(beta)) {
      if (std::abs(connected_mean(e, kind, mom)) > 1e-300)
        throw std::overflow_error("disconnected part diverges at beta = inf");
    } else {
      acc += beta * connected_mean(e, kind, mom) / static_cast<double>(e.spec.L);
    }
  }
  return acc;
}

cd ff_realtime_commutator(const FFEnsemble& e, FFKind kind, double mom, double t) {
  cd acc{0, 0};
  for (const auto& b : bubble(e, kind, mom))
    acc += b.vv * (b.fk - b.fkp) * std::polar(1.0, (b.ek - b.ekp) * t);
  return acc / static_cast<double>(e.spec.L);
}

cd ff_complex_time(const FFEnsemble& e, FFKind kind, double mom, cd z) {
  const double x0 = -z.imag();
  cd acc{0, 0};
  for (const auto& b : bubble(e, kind, mom)) {
    const double om = b.ek - b.ekp;
    acc += b.vv * b.fk * (1.0 - b.fkp) * std::exp(x0 * om) * std::polar(1.0, z.real() * om);
  }
  return acc / static_cast<double>(e.spec.L);
}

double ff_kinetic_per_site(const FFEnsemble& e) {
  auto ks = e.spec.momenta();
  double v = 0;
  for (int j = 0; j < e.spec.L; ++j) v += -e.spec.J * std::cos(ks[j] + e.spec.phi) * e.f[j];
  return v / e.spec.L;
}

cd ff_canonical_H(const FFEnsemble& e, double eta, double mom, double T) {
  if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
  cd acc{0, 0};
  for (const auto& b : bubble(e, FFKind::jj, mom)) {
    const double om = b.ek - b.ekp;
    acc += b.vv * (b.fk - b.fkp) * exp_window_integral(eta, om, T);
  }
  return cd(0, 1) * acc / static_cast<double>(e.spec.L) - ff_kinetic_per_site(e);
}

cd ff_canonical_K(const FFEnsemble& e, double eta, double mom, double T, bool damped_kernel) {
  if (!(eta > 0)) throw std::invalid_argument("eta must be positive");
  cd acc{0, 0};
  for (const auto& b : bubble(e, FFKind::rhorho, mom)) {
    const double om = b.ek - b.ekp;
    const cd integral = damped_kernel ? exp_window_integral(eta, om, T)
                                      : exp_window_integral(0.0, om - eta, T);
    acc += b.vv * (b.fk - b.fkp) * integral;
  }
  return cd(0, -1) * acc / static_cast<double>(e.spec.L);
}

cd ff_euclidean_H(const FFEnsemble& e, double p0, double mom) {
  return -ff_matsubara(e, FFKind::jj, mom, p0) - ff_kinetic_per_site(e);
}

cd ff_euclidean_K(const FFEnsemble& e, double p0, double mom) {
  return ff_matsubara(e, FFKind::rhorho, mom, p0);
}

double ff_kubo_JJ_per_site(const FFEnsemble& e) {
  // J = j_0 is diagonal in k, so only the beta-branch survives; the
  // disconnected part is retained
  if (is_inf(e.beta)) throw std::overflow_error("Kubo product diverges at beta = inf");
  auto ks = e.spec.momenta();
  double diag = 0, mean = 0;
  for (int j = 0; j < e.spec.L; ++j) {
    const double v = std::real(vertex_j(e.spec, ks[j], 0.0));
    diag += v * v * e.f[j] * (1.0 - e.f[j]);
    mean += v * e.f[j];
  }
  return e.beta * (diag + mean * mean) / e.spec.L;
}

cd ff_thermal_drude(const FFEnsemble& e, double eta) {
  // [H, J] = 0 in the free chain: the commutator integral vanishes identically
  (void)eta;
  return ff_kubo_JJ_per_site(e);
}

double ff_twist_drude(int L, int N, bool antiperiodic, double J, double phi) {
  FreeSpectrum s{L, J, 0.0, phi, antiperiodic};
  auto e = s.energies();
  auto k = s.momenta();
  std::vector<int> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e[a] < e[b]; });
  if (N > 0 && N < L && e[order[N]] - e[order[N - 1]] < kShellTol)
    throw std::runtime_error("level crossing at the Fermi shell; twist curvature undefined");
  double curv = 0;
  for (int i = 0; i < N; ++i) curv += J * std::cos(k[order[i]] + phi);
  return transport::kBetheHopNorm * curv / L;
}

double ff_field_susceptibility(int L, int N, bool antiperiodic, double J) {
  FreeSpectrum s{L, J, 0.0, 0.0, antiperiodic};
  const double d2 = s.ground_energy(N + 2) + s.ground_energy(N - 2) - 2.0 * s.ground_energy(N);
  if (d2 <= 0) throw std::runtime_error("non-convex sector energies");
  return (4.0 / (L * d2)) / transport::kBetheHopNorm;
}

}  // namespace edlab::ff
