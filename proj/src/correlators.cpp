#include "edlab/correlators.hpp"

#include <cmath>
#include <stdexcept>

namespace edlab {

namespace {

double matsubara_spacing_check(double p0, double beta) {
  if (is_inf(beta)) return p0;  // continuum at zero temperature
  const double sp = 2.0 * kPi / beta;
  const double r = std::round(p0 / sp);
  if (std::abs(p0 - r * sp) > 1e-9) throw std::invalid_argument("p0 off the Matsubara grid");
  return r * sp;
}

}  // namespace

double LehmannTable::adjoint_defect() const {
  double worst = 0;
  for (std::size_t s = 0; s < A.size(); ++s) {
    if (A[s].size() == 0) continue;
    worst = std::max(worst, (B[s] - A[s].adjoint()).cwiseAbs().maxCoeff());
  }
  return worst;
}

LehmannTable make_table(const SpectralData& spec, const BlockOperator& A, const BlockOperator& B,
                        double trunc_tol) {
  if (!A.number_conserving() || !B.number_conserving())
    throw std::invalid_argument("Lehmann tables need number-conserving operators");
  LehmannTable t;
  t.spec = &spec;
  t.trunc_tol = trunc_tol;
  std::vector<cd> ma, mb;
  for (const auto& s : spec.sectors) {
    if (s.evecs.size() == 0 && s.sector.dim() > 0)
      throw std::runtime_error("Lehmann table needs eigenvectors (values_only spectra)");
    const SparseCd* ba = A.diag_block(s.sector.N);
    const SparseCd* bb = B.diag_block(s.sector.N);
    MatrixXcd At = ba ? MatrixXcd(s.evecs.adjoint() * (*ba * s.evecs)) : MatrixXcd::Zero(s.sector.dim(), s.sector.dim());
    MatrixXcd Bt = bb ? MatrixXcd(s.evecs.adjoint() * (*bb * s.evecs)) : MatrixXcd::Zero(s.sector.dim(), s.sector.dim());
    for (int n = 0; n < At.rows(); ++n)
      if (s.weights[n] > 1e-300) {
        ma.push_back(s.weights[n] * At(n, n));
        mb.push_back(s.weights[n] * Bt(n, n));
      }
    t.A.push_back(std::move(At));
    t.B.push_back(std::move(Bt));
  }
  t.mean_A = pairwise_sum(ma);
  t.mean_B = pairwise_sum(mb);
  return t;
}

cd realtime_commutator(const LehmannTable& t, double time) {
  // <A(t) B> - <B A(t)> = sum (w_n - w_m) A_nm B_mn e^{i om t}
  const double L = t.spec->params.L;
  cd v = pair_sum(t, [time](double wn, double wm, double om) {
    return (wn - wm) * std::polar(1.0, om * time);
  });
  return v / L;
}

cd complex_time_correlator(const LehmannTable& t, cd z, bool allow_any_z) {
  // (1/L) sum w_n A_nm B_mn e^{i z om}; evaluated through the combined
  // exponent -(beta - x0)(E_n - E0) - x0 (E_m - E0) which never overflows for
  // x0 = -Im z in [0, beta]
  if (z.imag() > 1e-12 && !allow_any_z)
    throw std::invalid_argument("Im z must be <= 0 (pass allow_any_z for contour checks)");
  const double x0 = -z.imag();
  const double beta = t.spec->beta;
  if (!is_inf(beta) && (x0 < -1e-12 || x0 > beta + 1e-12) && !allow_any_z)
    throw std::invalid_argument("imaginary time outside [0, beta]");

  const double E0 = t.spec->ground_energy;
  const double re = z.real();
  std::vector<cd> rows;
  double Z = 0;
  for (const auto& s : t.spec->sectors) {
    if (is_inf(beta)) break;
    Z += (-(beta) * (s.evals.array() - E0)).exp().sum();
  }
  for (std::size_t si = 0; si < t.A.size(); ++si) {
    const auto& sec = t.spec->sectors[si];
    const auto& E = sec.evals;
    const int d = static_cast<int>(E.size());
    for (int n = 0; n < d; ++n) {
      double wexp;  // log of the weight numerator
      if (is_inf(beta)) {
        if (sec.weights[n] <= 0) continue;
        wexp = 0;
      } else {
        wexp = -beta * (E[n] - E0);
      }
      cd acc{0, 0};
      for (int m = 0; m < d; ++m) {
        const cd ab = t.A[si](n, m) * t.B[si](m, n);
        if (std::abs(ab) < t.trunc_tol) continue;
        const double om = E[n] - E[m];
        const double expo = wexp + x0 * om;
        if (expo > 700.0) throw std::overflow_error("complex-time exponent overflow");
        acc += std::exp(expo) * std::polar(1.0, re * om) * ab;
      }
      if (is_inf(beta)) acc *= sec.weights[n];
      rows.push_back(acc);
    }
  }
  cd v = pairwise_sum(rows);
  if (!is_inf(beta)) v /= Z;
  return v / static_cast<double>(t.spec->params.L);
}

namespace {

/// degenerate-pair mass sum_{|om| <= tol} w_n A_nm B_mn; it multiplies beta in
/// the p0 = 0 branch of the Euclidean integrals
cd degenerate_mass(const LehmannTable& t, double degtol) {
  return pair_sum(t, [degtol](double wn, double, double om) -> cd {
    return std::abs(om) <= degtol ? cd{wn, 0} : cd{0, 0};
  });
}

cd offdegenerate_sum(const LehmannTable& t, double p0, double degtol) {
  return pair_sum(t, [degtol, p0](double wn, double wm, double om) -> cd {
    if (std::abs(om) <= degtol) return {0, 0};
    return (wm - wn) / cd(om, -p0);
  });
}

}  // namespace

cd matsubara_correlator(const LehmannTable& t, double p0, bool connected) {
  const double beta = t.spec->beta;
  const double p0g = matsubara_spacing_check(p0, beta);
  const double L = t.spec->params.L;
  const double degtol = 1e-9 * t.spec->energy_scale;
  cd v = offdegenerate_sum(t, p0g, degtol) / L;
  if (p0g != 0.0) return v;
  const cd mass = degenerate_mass(t, degtol);
  const cd bracket = connected ? mass - t.mean_A * t.mean_B : mass;
  if (is_inf(beta)) {
    const double scale = std::abs(mass) + std::abs(t.mean_A * t.mean_B);
    if (std::abs(bracket) > 1e-10 * scale + 1e-14)
      throw std::overflow_error("static Euclidean correlator diverges at beta = inf");
    return v;
  }
  return v + beta * bracket / L;
}

cd kubo_inner(const LehmannTable& t) {
  // disconnected part retained, no 1/L
  const double beta = t.spec->beta;
  const double degtol = 1e-9 * t.spec->energy_scale;
  cd v = offdegenerate_sum(t, 0.0, degtol);
  cd mass = degenerate_mass(t, degtol);
  if (is_inf(beta)) {
    if (std::abs(mass) > 1e-12)
      throw std::overflow_error("Kubo scalar product diverges at beta = inf");
    return v;
  }
  return v + beta * mass;
}

LehmannTable jj_table(const SpectralData& spec, double mom) {
  auto secs = spec.sector_list();
  BlockOperator jp = build_current_fourier(spec.params, mom, secs);
  BlockOperator jm = build_current_fourier(spec.params, -mom, secs);
  return make_table(spec, jp, jm);
}

LehmannTable rho_rho_table(const SpectralData& spec, double mom) {
  auto secs = spec.sector_list();
  BlockOperator rp = build_density_fourier(spec.params, mom, secs);
  BlockOperator rm = build_density_fourier(spec.params, -mom, secs);
  return make_table(spec, rp, rm);
}

LehmannTable j_pair_table(const SpectralData& spec, int mu, int nu, double mom) {
  auto secs = spec.sector_list();
  BlockOperator a = build_j_fourier(spec.params, mu, mom, secs);
  BlockOperator b = build_j_fourier(spec.params, nu, -mom, secs);
  return make_table(spec, a, b);
}

}  // namespace edlab
