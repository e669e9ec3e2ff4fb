#include "edlab/model.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace edlab {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::periodic: return "periodic";
    case Boundary::antiperiodic: return "antiperiodic";
    case Boundary::open: return "open";
  }
  return "?";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "antiperiodic") return Boundary::antiperiodic;
  if (s == "open") return Boundary::open;
  throw std::invalid_argument("unknown boundary: " + s);
}

void ModelParams::validate() const {
  if (L < 4 || L % 2 != 0) throw std::invalid_argument("L must be even and >= 4");
  if (L > 30) throw std::invalid_argument("L too large for bit-encoded basis");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(J_hop) || !finite(lambda) || !finite(h_field) || !finite(epsilon) ||
      !finite(flux_phi) || !finite(external_h))
    throw std::invalid_argument("couplings must be finite");
  if (flux_phi < -kPi - 1e-12 || flux_phi >= kPi + 1e-12)
    throw std::invalid_argument("flux_phi must lie in [-pi, pi)");
  if (probe_sign != 1 && probe_sign != -1) throw std::invalid_argument("probe_sign must be +-1");
  for (const auto& v : v_couplings) {
    if (v.range < 2) throw std::invalid_argument("v_couplings ranges must be >= 2");
    if (v.range >= L / 2) throw std::invalid_argument("v_couplings range must be < L/2");
    if (!finite(v.strength)) throw std::invalid_argument("v coupling must be finite");
  }
}

std::uint64_t ModelParams::hash() const {
  std::uint64_t h = fnv1a(&J_hop, sizeof(J_hop));
  auto mix = [&h](const void* d, std::size_t n) { h = fnv1a(d, n, h); };
  mix(&lambda, sizeof(lambda));
  mix(&h_field, sizeof(h_field));
  mix(&epsilon, sizeof(epsilon));
  mix(&L, sizeof(L));
  mix(&flux_phi, sizeof(flux_phi));
  mix(&external_h, sizeof(external_h));
  mix(&probe_sign, sizeof(probe_sign));
  int b = static_cast<int>(boundary);
  mix(&b, sizeof(b));
  for (const auto& v : v_couplings) {
    mix(&v.range, sizeof(v.range));
    mix(&v.strength, sizeof(v.strength));
  }
  return h;
}

FockSector FockSector::build(int L, int N) {
  if (N < 0 || N > L) throw std::invalid_argument("bad particle number");
  FockSector s;
  s.L = L;
  s.N = N;
  const std::uint32_t top = 1u << L;
  for (std::uint32_t w = 0; w < top; ++w)
    if (std::popcount(w) == N) s.states.push_back(w);
  return s;  // iteration order is already ascending
}

int FockSector::index_of(std::uint32_t w) const {
  auto it = std::lower_bound(states.begin(), states.end(), w);
  if (it == states.end() || *it != w) return -1;
  return static_cast<int>(it - states.begin());
}

std::vector<FockSector> all_sectors(int L) {
  std::vector<FockSector> out;
  out.reserve(L + 1);
  for (int N = 0; N <= L; ++N) out.push_back(FockSector::build(L, N));
  return out;
}

// ---- BlockOperator ----

bool BlockOperator::number_conserving() const {
  for (const auto& [key, blk] : blocks)
    if (key.first != key.second && blk.nonZeros() > 0) return false;
  return true;
}

const SparseCd* BlockOperator::block(int n_in, int n_out) const {
  auto it = blocks.find({n_in, n_out});
  return it == blocks.end() ? nullptr : &it->second;
}

double BlockOperator::hermiticity_defect() const {
  double worst = 0;
  for (const auto& [key, blk] : blocks) {
    if (key.first != key.second) continue;
    MatrixXcd d = MatrixXcd(blk) - MatrixXcd(blk).adjoint();
    double nrm = MatrixXcd(blk).norm();
    if (nrm > 0) worst = std::max(worst, d.norm() / nrm);
  }
  return worst;
}

void BlockOperator::write_coo(std::ostream& os) const {
  os << "# " << name << "\n# sector_in sector_out row col re im\n";
  for (const auto& [key, blk] : blocks)
    for (int k = 0; k < blk.outerSize(); ++k)
      for (SparseCd::InnerIterator it(blk, k); it; ++it)
        os << key.first << ' ' << key.second << ' ' << it.row() << ' ' << it.col() << ' '
           << format_double(it.value().real()) << ' ' << format_double(it.value().imag()) << '\n';
}

BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
  BlockOperator out;
  out.name = a.name + "*" + b.name;
  for (const auto& [ka, ba] : a.blocks)
    for (const auto& [kb, bb] : b.blocks)
      if (ka.first == kb.second && ka.first == ka.second && kb.first == kb.second) {
        SparseCd prod = ba * bb;
        auto it = out.blocks.find({ka.first, ka.first});
        if (it == out.blocks.end())
          out.blocks[{ka.first, ka.first}] = prod;
        else
          it->second += prod;
      }
  return out;
}

BlockOperator commutator(const BlockOperator& a, const BlockOperator& b) {
  BlockOperator ab = a * b, ba = b * a;
  BlockOperator out;
  out.name = "[" + a.name + "," + b.name + "]";
  for (const auto& [k, blk] : ab.blocks) {
    SparseCd r = blk;
    auto it = ba.blocks.find(k);
    if (it != ba.blocks.end()) r = blk - it->second;
    out.blocks[k] = r;
  }
  for (const auto& [k, blk] : ba.blocks)
    if (!out.blocks.count(k)) out.blocks[k] = SparseCd(-blk);
  return out;
}

BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) {
  BlockOperator out = a;
  out.name = a.name + "+" + b.name;
  for (const auto& [k, blk] : b.blocks) {
    auto it = out.blocks.find(k);
    if (it == out.blocks.end())
      out.blocks[k] = blk;
    else
      it->second += blk;
  }
  return out;
}

BlockOperator operator*(cd s, const BlockOperator& a) {
  BlockOperator out = a;
  for (auto& [k, blk] : out.blocks) blk *= s;
  return out;
}

double operator_norm(const SparseCd& m) {
  if (m.rows() == 0) return 0;
  MatrixXcd d(m);
  Eigen::JacobiSVD<MatrixXcd> svd(d);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double operator_norm(const BlockOperator& a) {
  double worst = 0;
  for (const auto& [k, blk] : a.blocks) worst = std::max(worst, operator_norm(blk));
  return worst;
}

// ---- builders ----

namespace {

struct Bond {
  int x, y;        // y = x+1 (mod L)
  double wrap = 1;  // -1 on the seam for antiperiodic fermions
};

std::vector<Bond> chain_bonds(const ModelParams& p) {
  std::vector<Bond> out;
  for (int x = 0; x < p.L; ++x) {
    if (x == p.L - 1) {
      if (p.boundary == Boundary::open) continue;
      out.push_back({x, 0, p.boundary == Boundary::antiperiodic ? -1.0 : 1.0});
    } else {
      out.push_back({x, x + 1, 1.0});
    }
  }
  return out;
}

/// a+_i a-_j |s>; creation operators ordered by increasing site index, so the
/// sign is the parity of the occupied sites below j (annihilate) plus below i
/// (create). The seam bond picks up (-1)^{N-1} automatically.
inline bool apply_hop(std::uint32_t s, int i, int j, std::uint32_t& out, double& sign) {
  if (!((s >> j) & 1u)) return false;
  std::uint32_t s1 = s & ~(1u << j);
  int par = std::popcount(s & ((1u << j) - 1u));
  if ((s1 >> i) & 1u) return false;
  out = s1 | (1u << i);
  par += std::popcount(s1 & ((1u << i) - 1u));
  sign = (par & 1) ? -1.0 : 1.0;
  return true;
}

struct HopTerm {
  cd coef;
  int i, j;  // coef * a+_i a-_j, i != j
};

SparseCd assemble(const FockSector& sec, const std::vector<HopTerm>& hops,
                  const std::function<double(std::uint32_t)>& diag) {
  const int d = sec.dim();
  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(static_cast<std::size_t>(d) * (hops.size() + 1));
  for (int a = 0; a < d; ++a) {
    const std::uint32_t s = sec.states[a];
    if (diag) {
      double v = diag(s);
      if (v != 0.0) trip.emplace_back(a, a, cd(v, 0));
    }
    for (const auto& t : hops) {
      std::uint32_t s2;
      double sign;
      if (!apply_hop(s, t.i, t.j, s2, sign)) continue;
      int b = sec.index_of(s2);
      trip.emplace_back(b, a, t.coef * sign);
    }
  }
  SparseCd m(d, d);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

BlockOperator build_blocks(std::span<const FockSector> sectors,
                           const std::vector<HopTerm>& hops,
                           const std::function<double(std::uint32_t)>& diag,
                           const std::string& name, bool hermitian) {
  BlockOperator op;
  op.name = name;
  op.hermitian = hermitian;
  for (const auto& sec : sectors) op.blocks[{sec.N, sec.N}] = assemble(sec, hops, diag);
  return op;
}

std::vector<HopTerm> current_terms(const ModelParams& p, int x) {
  // j_x = (i J/2)(e^{-i phi} a+_{x+1} a-_x - e^{i phi} a+_x a-_{x+1});
  // with this dressing i[H, rho_x] + j_x - j_{x-1} = 0 at every flux
  auto bonds = chain_bonds(p);
  for (const auto& b : bonds)
    if (b.x == x) {
      const cd eip = std::polar(1.0, p.flux_phi);
      return {{cd(0, 0.5) * p.J_hop * std::conj(eip) * b.wrap, b.y, b.x},
              {cd(0, -0.5) * p.J_hop * eip * b.wrap, b.x, b.y}};
    }
  throw std::invalid_argument("no bond at site " + std::to_string(x));
}

std::vector<HopTerm> kinetic_terms(const ModelParams& p, int x) {
  auto bonds = chain_bonds(p);
  for (const auto& b : bonds)
    if (b.x == x) {
      const cd eip = std::polar(1.0, p.flux_phi);
      return {{cd(-0.5 * p.J_hop, 0) * eip * b.wrap, b.x, b.y},
              {cd(-0.5 * p.J_hop, 0) * std::conj(eip) * b.wrap, b.y, b.x}};
    }
  throw std::invalid_argument("no bond at site " + std::to_string(x));
}

}  // namespace

BlockOperator build_hamiltonian(const ModelParams& p, std::span<const FockSector> sectors) {
  p.validate();
  for (const auto& s : sectors)
    if (s.L != p.L) throw std::invalid_argument("sector/params size mismatch");

  std::vector<HopTerm> hops;
  const cd eip = std::polar(1.0, p.flux_phi);
  for (const auto& b : chain_bonds(p)) {
    hops.push_back({cd(-0.5 * p.J_hop, 0) * eip * b.wrap, b.x, b.y});
    hops.push_back({cd(-0.5 * p.J_hop, 0) * std::conj(eip) * b.wrap, b.y, b.x});
  }

  const auto bonds = chain_bonds(p);
  const int L = p.L;
  auto diag = [&, L](std::uint32_t s) {
    auto nb = [&s](int x) { return ((s >> x) & 1u) ? 0.5 : -0.5; };  // n_x - 1/2
    double v = 0;
    for (const auto& b : bonds) v += -p.lambda * nb(b.x) * nb(b.y);
    for (int x = 0; x < L; ++x) v += (-p.h_field + p.probe_sign * p.external_h) * nb(x);
    // symmetric double sum: each unordered pair at range r enters twice
    for (const auto& vc : p.v_couplings)
      for (int x = 0; x < L; ++x) {
        int y = x + vc.range;
        if (y >= L) {
          if (p.boundary == Boundary::open) continue;
          y -= L;
        }
        v += -p.epsilon * 2.0 * vc.strength * nb(x) * nb(y % L);
      }
    return v;
  };
  return build_blocks(sectors, hops, diag, "H", true);
}

BlockOperator build_hamiltonian(const ModelParams& p, const FockSector& sector) {
  return build_hamiltonian(p, std::span<const FockSector>(&sector, 1));
}

BlockOperator build_density(const ModelParams& p, int x, std::span<const FockSector> sectors) {
  if (x < 0 || x >= p.L) throw std::invalid_argument("site out of range");
  auto diag = [x](std::uint32_t s) { return ((s >> x) & 1u) ? 1.0 : 0.0; };
  return build_blocks(sectors, {}, diag, "rho_" + std::to_string(x), true);
}

int momentum_index(double mom, int L) {
  double idx = mom * L / (2 * kPi);
  double r = std::round(idx);
  if (std::abs(idx - r) > 1e-9) throw std::invalid_argument("momentum off the 2 pi/L grid");
  return (static_cast<int>(r) % L + L) % L;
}

BlockOperator build_density_fourier(const ModelParams& p, double mom,
                                    std::span<const FockSector> sectors) {
  momentum_index(mom, p.L);
  auto diag = [mom, L = p.L](std::uint32_t) { return 0.0; };
  (void)diag;
  BlockOperator op;
  op.name = "rho_p";
  op.hermitian = momentum_index(mom, p.L) == 0;
  for (const auto& sec : sectors) {
    const int d = sec.dim();
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(d);
    for (int a = 0; a < d; ++a) {
      cd v{0, 0};
      for (int x = 0; x < p.L; ++x)
        if ((sec.states[a] >> x) & 1u) v += std::polar(1.0, -mom * x);
      if (v != cd{0, 0}) trip.emplace_back(a, a, v);
    }
    SparseCd m(d, d);
    m.setFromTriplets(trip.begin(), trip.end());
    op.blocks[{sec.N, sec.N}] = m;
  }
  return op;
}

BlockOperator build_current(const ModelParams& p, int x, std::span<const FockSector> sectors) {
  return build_blocks(sectors, current_terms(p, x), nullptr, "j_" + std::to_string(x), true);
}

BlockOperator build_current_fourier(const ModelParams& p, double mom,
                                    std::span<const FockSector> sectors) {
  momentum_index(mom, p.L);
  std::vector<HopTerm> hops;
  for (const auto& b : chain_bonds(p)) {
    auto terms = current_terms(p, b.x);
    const cd phase = std::polar(1.0, -mom * b.x);
    for (auto t : terms) {
      t.coef *= phase;
      hops.push_back(t);
    }
  }
  return build_blocks(sectors, hops, nullptr, "j_p", false);
}

BlockOperator build_j_fourier(const ModelParams& p, int nu, double mom,
                              std::span<const FockSector> sectors) {
  if (nu == 0) return build_density_fourier(p, mom, sectors);
  if (nu == 1) return build_current_fourier(p, mom, sectors);
  throw std::invalid_argument("nu must be 0 or 1");
}

BlockOperator build_kinetic(const ModelParams& p, std::span<const FockSector> sectors) {
  std::vector<HopTerm> hops;
  for (const auto& b : chain_bonds(p)) {
    auto terms = kinetic_terms(p, b.x);
    hops.insert(hops.end(), terms.begin(), terms.end());
  }
  return build_blocks(sectors, hops, nullptr, "Delta", true);
}

BlockOperator build_kinetic_site(const ModelParams& p, int x, std::span<const FockSector> sectors) {
  return build_blocks(sectors, kinetic_terms(p, x), nullptr, "Delta_" + std::to_string(x), true);
}

BlockOperator build_number(const ModelParams& p, std::span<const FockSector> sectors) {
  auto diag = [L = p.L](std::uint32_t s) { return static_cast<double>(std::popcount(s)); };
  return build_blocks(sectors, {}, diag, "N", true);
}

BlockOperator build_position(const ModelParams& p, std::span<const FockSector> sectors) {
  if (p.boundary != Boundary::open)
    throw std::invalid_argument("position operator requires an open chain");
  auto diag = [L = p.L](std::uint32_t s) {
    double v = 0;
    for (int x = 0; x < L; ++x)
      if ((s >> x) & 1u) v += x;
    return v;
  };
  return build_blocks(sectors, {}, diag, "X", true);
}

std::optional<double> continuity_residual(const ModelParams& p,
                                          std::span<const FockSector> sectors, int x) {
  if (x < 0 || x >= p.L) throw std::invalid_argument("site out of range");
  const bool open = p.boundary == Boundary::open;
  if (open && (x == 0 || x == p.L - 1)) return std::nullopt;  // edge: not applicable

  BlockOperator H = build_hamiltonian(p, sectors);
  BlockOperator rho = build_density(p, x, sectors);
  BlockOperator jx = build_current(p, x, sectors);
  BlockOperator jxm = build_current(p, (x - 1 + p.L) % p.L, sectors);
  BlockOperator res = cd(0, 1) * commutator(H, rho) + jx + cd(-1, 0) * jxm;
  return operator_norm(res);
}

}  // namespace edlab
