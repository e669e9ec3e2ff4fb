#include "edlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace edlab {

namespace {

constexpr std::uint32_t kCacheVersion = 1;

std::filesystem::path cache_path(const ModelParams& p, int N) {
  const char* dir = std::getenv("EDLAB_CACHE_DIR");
  if (!dir || !*dir) return {};
  char name[64];
  std::snprintf(name, sizeof(name), "evals_%s_N%02d.bin", hex64(p.hash()).c_str(), N);
  return std::filesystem::path(dir) / name;
}

bool cache_load(const ModelParams& p, int N, VectorXd& evals) {
  auto path = cache_path(p, N);
  if (path.empty()) return false;
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint32_t magic = 0, ver = 0;
  std::uint64_t hash = 0;
  std::int64_t dim = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&ver), 4);
  in.read(reinterpret_cast<char*>(&hash), 8);
  in.read(reinterpret_cast<char*>(&dim), 8);
  if (!in || magic != 0x45444c42u || ver != kCacheVersion || hash != p.hash() || dim <= 0)
    return false;
  evals.resize(dim);
  in.read(reinterpret_cast<char*>(evals.data()), dim * sizeof(double));
  return static_cast<bool>(in);
}

void cache_store(const ModelParams& p, int N, const VectorXd& evals) {
  auto path = cache_path(p, N);
  if (path.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) return;
  std::uint32_t magic = 0x45444c42u, ver = kCacheVersion;
  std::uint64_t hash = p.hash();
  std::int64_t dim = evals.size();
  out.write(reinterpret_cast<const char*>(&magic), 4);
  out.write(reinterpret_cast<const char*>(&ver), 4);
  out.write(reinterpret_cast<const char*>(&hash), 8);
  out.write(reinterpret_cast<const char*>(&dim), 8);
  out.write(reinterpret_cast<const char*>(evals.data()), dim * sizeof(double));
}

void assign_weights(SpectralData& out) {
  std::size_t total = 0;
  for (const auto& s : out.sectors) total += s.evals.size();
  if (total == 0) throw std::runtime_error("no spectra retained");

  double emin = std::numeric_limits<double>::infinity();
  double escale = 0;
  for (const auto& s : out.sectors) {
    if (s.evals.size() == 0) continue;
    emin = std::min(emin, s.evals.minCoeff());
    escale = std::max(escale, std::max(std::abs(s.evals.minCoeff()), std::abs(s.evals.maxCoeff())));
  }
  out.ground_energy = emin;
  out.energy_scale = std::max(escale, 1e-300);
  out.deg_tol = std::max(1e-10, 1e-12 * out.energy_scale);

  int degeneracy = 0;
  int gsec = 0;
  for (const auto& s : out.sectors) {
    for (int i = 0; i < s.evals.size(); ++i)
      if (s.evals[i] - emin <= out.deg_tol) {
        ++degeneracy;
        gsec = s.sector.N;
      }
    if (s.evals.size() && s.evals.minCoeff() - emin <= out.deg_tol) gsec = s.sector.N;
  }
  // keep the lowest-N ground sector for reporting
  for (const auto& s : out.sectors)
    if (s.evals.size() && s.evals.minCoeff() - emin <= out.deg_tol) {
      gsec = s.sector.N;
      break;
    }
  out.ground_sector = gsec;
  out.ground_degeneracy = degeneracy;

  if (is_inf(out.beta)) {
    const double wv = 1.0 / degeneracy;
    for (auto& s : out.sectors) {
      s.weights = VectorXd::Zero(s.evals.size());
      for (int i = 0; i < s.evals.size(); ++i)
        if (s.evals[i] - emin <= out.deg_tol) s.weights[i] = wv;
    }
  } else {
    // global shift keeps the exponentials in range
    double Z = 0;
    for (auto& s : out.sectors) {
      s.weights = (-(out.beta) * (s.evals.array() - emin)).exp();
      Z += s.weights.sum();
    }
    for (auto& s : out.sectors) s.weights /= Z;
  }
}

}  // namespace

const SectorSpectrum* SpectralData::find(int N) const {
  for (const auto& s : sectors)
    if (s.sector.N == N) return &s;
  return nullptr;
}

std::vector<FockSector> SpectralData::sector_list() const {
  std::vector<FockSector> out;
  out.reserve(sectors.size());
  for (const auto& s : sectors) out.push_back(s.sector);
  return out;
}

SpectralData diagonalize(const ModelParams& p, double beta, const DiagOptions& opt) {
  p.validate();
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive (or infinite)");
  std::vector<int> Ns;
  if (opt.sectors)
    Ns = *opt.sectors;
  else
    for (int n = 0; n <= p.L; ++n) Ns.push_back(n);

  SpectralData out;
  out.params = p;
  out.beta = beta;
  out.sectors.resize(Ns.size());

  for (std::size_t i = 0; i < Ns.size(); ++i) {
    FockSector sec = FockSector::build(p.L, Ns[i]);
    if (sec.dim() > opt.dim_cap)
      throw std::runtime_error(
          "sector dimension " + std::to_string(sec.dim()) + " exceeds cap " +
          std::to_string(opt.dim_cap) + "; reduce L or restrict sectors");
    out.sectors[i].sector = std::move(sec);
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    auto& ss = out.sectors[i];
    if (opt.values_only && opt.use_cache && cache_load(p, ss.sector.N, ss.evals)) continue;
    BlockOperator H = build_hamiltonian(p, ss.sector);
    MatrixXcd dense(*H.diag_block(ss.sector.N));
    if (opt.values_only) {
      ss.evals = eigvalsh(dense);
      if (opt.use_cache) cache_store(p, ss.sector.N, ss.evals);
    } else {
      eigh(dense, ss.evals, ss.evecs);
    }
  }

  assign_weights(out);
  return out;
}

GroundStateInfo ground_state(const ModelParams& p, const DiagOptions& opt) {
  DiagOptions o = opt;
  o.values_only = true;
  SpectralData s = diagonalize(p, 1.0, o);
  return {s.ground_energy, s.ground_sector, s.ground_degeneracy};
}

double sector_ground_energy(const ModelParams& p, int N, const DiagOptions& opt) {
  DiagOptions o = opt;
  o.values_only = true;
  o.sectors = std::vector<int>{N};
  SpectralData s = diagonalize(p, 1.0, o);
  return s.ground_energy;
}

void set_beta(SpectralData& spec, double beta) {
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive (or infinite)");
  spec.beta = beta;
  assign_weights(spec);
}

cd thermal_expectation(const BlockOperator& A, const SpectralData& spec) {
  if (!A.number_conserving())
    throw std::invalid_argument("thermal_expectation: mixed-sector operators rejected");
  std::vector<cd> parts;
  for (const auto& s : spec.sectors) {
    if (s.evecs.size() == 0 && s.evals.size() > 0)
      throw std::runtime_error("thermal_expectation needs eigenvectors (values_only spectra)");
    const SparseCd* blk = A.diag_block(s.sector.N);
    if (!blk) continue;
    for (int n = 0; n < s.evals.size(); ++n) {
      if (s.weights[n] <= 1e-300) continue;
      const auto v = s.evecs.col(n);
      parts.push_back(s.weights[n] * (v.adjoint() * (*blk * v))(0, 0));
    }
  }
  return pairwise_sum(parts);
}

}  // namespace edlab
