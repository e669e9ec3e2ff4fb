#include "edlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "edlab/free_fermion.hpp"
#include "edlab/transport.hpp"
#include "edlab/verify.hpp"

namespace edlab::cli {

namespace {

namespace tr = edlab::transport;
namespace vf = edlab::verify;

struct Point {
  ModelParams params;
  double beta = 8.0;
  double eta = 0.5;
  double T = 40.0;
  int p_index = 1;
  int p0_index = 0;
};

void apply_axis(Point& pt, const std::string& name, double v) {
  if (name == "lambda") pt.params.lambda = v;
  else if (name == "epsilon") pt.params.epsilon = v;
  else if (name == "h_field") pt.params.h_field = v;
  else if (name == "J_hop") pt.params.J_hop = v;
  else if (name == "flux_phi") pt.params.flux_phi = v;
  else if (name == "external_h") pt.params.external_h = v;
  else if (name == "L") pt.params.L = static_cast<int>(std::lround(v));
  else if (name == "beta") pt.beta = v;
  else if (name == "eta") pt.eta = v;
  else if (name == "T") pt.T = v;
  else if (name == "p_index") pt.p_index = static_cast<int>(std::lround(v));
  else if (name == "p0_index") pt.p0_index = static_cast<int>(std::lround(v));
  else throw std::invalid_argument("unknown sweep axis: " + name);
}

json result_to_json(const tr::TransportResult& r) {
  json j;
  j["formulation"] = tr::to_string(r.formulation);
  j["value"] = r.value;
  j["im_residue"] = r.im_residue;
  j["L"] = r.L;
  j["beta"] = is_inf(r.beta) ? json("inf") : json(r.beta);
  j["eta"] = r.eta;
  j["T"] = r.T;
  j["p"] = r.p;
  j["p0"] = r.p0;
  j["method"] = r.method;
  j["dropped_mass"] = r.dropped_mass;
  if (!r.extra.empty()) {
    json e;
    for (const auto& [k, v] : r.extra) e[k] = v;
    j["extra"] = e;
  }
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

struct TaskContext {
  const Point& pt;
  SpectralData* spec = nullptr;  // lazily built full-vector spectra
  std::map<double, SpectralData>* spec_pool;

  SpectralData& spectra() {
    auto it = spec_pool->find(pt.beta);
    if (it == spec_pool->end()) {
      it = spec_pool->emplace(pt.beta, diagonalize(pt.params, pt.beta)).first;
    }
    return it->second;
  }
  double mom() const { return 2.0 * kPi * pt.p_index / pt.params.L; }
  double mats() const {
    return is_inf(pt.beta) ? 0.0 : 2.0 * kPi * pt.p0_index / pt.beta;
  }
};

json run_task(const std::string& task, TaskContext& ctx, bool& is_verify, bool& pass) {
  is_verify = false;
  pass = true;
  const Point& pt = ctx.pt;
  if (task == "canonical_H")
    return result_to_json(tr::canonical_H(ctx.spectra(), pt.eta, ctx.mom(), pt.T));
  if (task == "canonical_K")
    return result_to_json(tr::canonical_K(ctx.spectra(), pt.eta, ctx.mom(), pt.T));
  if (task == "euclidean_H")
    return result_to_json(tr::euclidean_H(ctx.spectra(), ctx.mats(), ctx.mom()));
  if (task == "euclidean_K")
    return result_to_json(tr::euclidean_K(ctx.spectra(), ctx.mats(), ctx.mom()));
  if (task == "thermal_D")
    return result_to_json(tr::thermal_drude_regularized(ctx.spectra(), pt.eta));
  if (task == "twist_D")
    return result_to_json(tr::twist_drude(pt.params, tr::CurvatureMethod::finite_difference));
  if (task == "field_kappa")
    return result_to_json(tr::field_susceptibility(pt.params, tr::CurvatureMethod::charge_step));
  if (task == "bethe_forms") {
    tr::BetheForms f = tr::bethe_closed_forms(pt.params.lambda, pt.params.J_hop);
    auto [r1, r2] = tr::haldane_residuals(f);
    json j;
    j["mu"] = f.mu;
    j["v"] = f.v;
    j["K"] = f.K_exp;
    j["D_B"] = f.D_B;
    j["kappa_B"] = f.kappa_B;
    j["haldane_r1"] = r1;
    j["haldane_r2"] = r2;
    return j;
  }
  if (task == "verify.continuity") {
    is_verify = true;
    auto secs = all_sectors(pt.params.L);
    BlockOperator H = build_hamiltonian(pt.params, secs);
    const double hnorm = operator_norm(H);
    double worst = 0;
    for (int x = 0; x < pt.params.L; ++x) {
      auto r = continuity_residual(pt.params, secs, x);
      if (r) worst = std::max(worst, *r);
    }
    pass = worst <= 1e-12 * hnorm;
    json j;
    j["max_residual"] = worst;
    j["h_norm"] = hnorm;
    j["pass"] = pass;
    return j;
  }
  if (task == "verify.ward") {
    is_verify = true;
    auto& spec = ctx.spectra();
    double worst_rel = 0;
    for (int nu : {0, 1}) {
      auto rep = vf::ward_residual(spec, ctx.mom(), ctx.mats(), nu);
      worst_rel = std::max(worst_rel, rep.residual / std::max(rep.scale, 1e-300));
      pass = pass && rep.pass(1e-9);
    }
    json j;
    j["worst_rel_residual"] = worst_rel;
    j["pass"] = pass;
    return j;
  }
  if (task == "verify.static_jj") {
    is_verify = true;
    auto rep = vf::static_jj_identity(ctx.spectra(), ctx.mom());
    pass = rep.pass(1e-9);
    json j;
    j["residual"] = rep.residual;
    j["scale"] = rep.scale;
    j["pass"] = pass;
    return j;
  }
  if (task == "verify.wick") {
    is_verify = true;
    auto w = vf::wick_decomposition(ctx.spectra(), pt.eta, ctx.mom(), pt.T);
    pass = w.pass();
    json j;
    j["residual"] = w.residual;
    j["scale"] = w.scale;
    j["eta_beta"] = w.eta_beta;
    j["err1_abs"] = std::abs(w.err1);
    j["err2_abs"] = std::abs(w.err2);
    j["pass"] = pass;
    return j;
  }
  if (task == "verify.limit_order") {
    is_verify = true;
    auto& spec = ctx.spectra();
    auto ch = tr::canonical_H(spec, pt.eta, ctx.mom(), pt.T);
    const double etab = closest_matsubara(pt.eta, pt.beta);
    auto eh = tr::euclidean_H(spec, etab, ctx.mom());
    json j;
    j["canonical"] = ch.value;
    j["euclidean_at_eta_beta"] = eh.value;
    j["abs_gap"] = std::abs(ch.value - eh.value);
    j["eta_beta"] = etab;
    return j;
  }
  if (task == "verify.error_scaling") {
    is_verify = true;
    auto grid = vf::ScalingGrid::standard(pt.params.L, pt.eta);
    auto fit = vf::error_scaling_sweep(pt.params, grid);
    pass = !fit.degenerate && std::abs(fit.beta_slope + 1.0) <= 0.15 &&
           std::abs(fit.T_rate - fit.T_rate_target) <= 0.10 * fit.T_rate_target;
    json j;
    j["beta_slope"] = fit.beta_slope;
    j["T_rate"] = fit.T_rate;
    j["eta_slope"] = fit.eta_slope;
    j["C_max"] = fit.C_max;
    j["C_median"] = fit.C_median;
    j["degenerate"] = fit.degenerate;
    j["pass"] = pass;
    return j;
  }
  if (task == "verify.complex_bound") {
    is_verify = true;
    std::vector<cd> samples;
    for (double t : {-2.0, -0.5, 0.0, 1.0, 2.5})
      for (double y : {0.0, -pt.beta / 4, -pt.beta / 2}) samples.push_back(cd(t, y));
    auto probes = vf::complex_bound_probe(ctx.spectra(), ctx.mom(), samples);
    double worst = 0;
    for (const auto& b : probes) {
      pass = pass && b.ok;
      worst = std::max(worst, b.modulus - b.bound);
    }
    json j;
    j["samples"] = probes.size();
    j["worst_excess"] = worst;
    j["pass"] = pass;
    return j;
  }
  if (task == "verify.adiabatic") {
    is_verify = true;
    vf::AdiabaticOptions o;
    o.eta = pt.eta;
    o.beta = pt.beta;
    auto rep = vf::adiabatic_response_sim(pt.params, o);
    pass = rep.central_bond_rel_dev <= std::max(3e-2, 10.0 * o.E_field);
    json j;
    j["central_bond_rel_dev"] = rep.central_bond_rel_dev;
    j["max_bulk_rel_dev"] = rep.max_bulk_rel_dev;
    j["pass"] = pass;
    return j;
  }
  if (task == "oracle.regression") {
    is_verify = true;
    auto reg = oracle_regression(std::min(pt.params.L, 12));
    pass = reg.pass;
    json j;
    j["checked"] = reg.checked;
    j["max_abs_dev"] = reg.max_abs_dev;
    j["pass"] = pass;
    return j;
  }
  throw std::invalid_argument("unknown task: " + task);
}

}  // namespace

RunSummary run(const RunConfig& cfg, std::ostream& os) {
  RunSummary sum;
  if (cfg.point_count() > static_cast<std::size_t>(cfg.budget))
    throw std::runtime_error("sweep has " + std::to_string(cfg.point_count()) +
                             " points, over budget " + std::to_string(cfg.budget));
#ifdef _OPENMP
  if (cfg.deterministic || cfg.threads == 1) {
    // row-partial tree reductions keep pair sums deterministic at any thread
    // count; the flag still pins the worker count for bytewise stability
    omp_set_num_threads(1);
  } else if (cfg.threads > 0) {
    omp_set_num_threads(cfg.threads);
  }
#endif

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "records.jsonl");
  if (!out) throw std::runtime_error("cannot open output dir: " + cfg.out_dir);

  const std::string cfg_hash = hex64(cfg.hash());

  // cartesian sweep in axis order
  std::vector<std::size_t> idx(cfg.sweep.size(), 0);
  bool done = cfg.tasks.empty();
  if (done) {
    os << "no tasks requested\n";
    return sum;
  }
  while (true) {
    Point pt;
    pt.params = cfg.model;
    json point_j;
    for (std::size_t a = 0; a < cfg.sweep.size(); ++a) {
      apply_axis(pt, cfg.sweep[a].first, cfg.sweep[a].second[idx[a]]);
      point_j[cfg.sweep[a].first] = cfg.sweep[a].second[idx[a]];
    }
    std::map<double, SpectralData> pool;
    for (const auto& task : cfg.tasks) {
      json rec;
      rec["schema_version"] = kRecordSchemaVersion;
      rec["task"] = task;
      rec["config_hash"] = cfg_hash;
      rec["seed"] = cfg.seed;
      rec["model"] = params_to_json(pt.params);
      rec["params_hash"] = hex64(pt.params.hash());
      rec["point"] = point_j;
      rec["beta"] = is_inf(pt.beta) ? json("inf") : json(pt.beta);
      bool is_verify = false, pass = true;
      try {
        TaskContext ctx{pt, nullptr, &pool};
        rec["result"] = run_task(task, ctx, is_verify, pass);
        if (is_verify) {
          ++(pass ? sum.verify_pass : sum.verify_fail);
        }
      } catch (const std::exception& e) {
        rec["error"] = e.what();
        ++sum.errors;
      }
      out << rec.dump() << '\n';
      ++sum.records;
    }
    // advance the cartesian index
    std::size_t a = 0;
    for (; a < idx.size(); ++a) {
      if (++idx[a] < cfg.sweep[a].second.size()) break;
      idx[a] = 0;
    }
    if (idx.empty() || a == idx.size()) break;
  }

  os << "records: " << sum.records << "  verify pass: " << sum.verify_pass
     << "  fail: " << sum.verify_fail << "  errors: " << sum.errors << '\n';
  return sum;
}

int report(const std::string& results_dir, std::ostream& os) {
  namespace fs = std::filesystem;
  const fs::path rec = fs::path(results_dir) / "records.jsonl";
  if (!fs::exists(rec)) {
    os << "no records found under " << results_dir << "\n";
    return 0;
  }
  std::ifstream in(rec);
  std::string line;
  // task -> rows
  std::map<std::string, std::vector<json>> by_task;
  int skipped = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      by_task[j.at("task").get<std::string>()].push_back(std::move(j));
    } catch (...) {
      ++skipped;
    }
  }
  if (skipped) os << "warning: skipped " << skipped << " corrupt records\n";

  fs::path csvdir = fs::path(results_dir) / "csv";
  fs::create_directories(csvdir);

  for (const auto& [task, rows] : by_task) {
    os << "== " << task << " (" << rows.size() << " records)\n";
    std::string csv_name = task;
    std::replace(csv_name.begin(), csv_name.end(), '.', '_');
    std::ofstream csv(csvdir / (csv_name + ".csv"));
    // header from the first record's point + scalar result fields
    std::vector<std::string> pcols, rcols;
    const json& first = rows.front();
    if (first.contains("point"))
      for (const auto& [k, v] : first.at("point").items()) pcols.push_back(k);
    if (first.contains("result"))
      for (const auto& [k, v] : first.at("result").items())
        if (v.is_number() || v.is_boolean()) rcols.push_back(k);
    for (const auto& c : pcols) csv << c << ',';
    for (std::size_t i = 0; i < rcols.size(); ++i) csv << rcols[i] << (i + 1 < rcols.size() ? ',' : '\n');
    if (rcols.empty()) csv << '\n';
    int pass = 0, fail = 0, errs = 0;
    for (const auto& r : rows) {
      if (r.contains("error")) { ++errs; continue; }
      for (const auto& c : pcols)
        csv << (r.at("point").contains(c) ? r.at("point").at(c).dump() : "") << ',';
      for (std::size_t i = 0; i < rcols.size(); ++i) {
        const auto& res = r.at("result");
        csv << (res.contains(rcols[i]) ? res.at(rcols[i]).dump() : "");
        csv << (i + 1 < rcols.size() ? "," : "\n");
      }
      if (rcols.empty()) csv << '\n';
      if (r.at("result").contains("pass")) {
        if (r.at("result").at("pass").get<bool>()) ++pass; else ++fail;
      }
    }
    if (pass + fail > 0) os << "   pass " << pass << " / fail " << fail << "\n";
    if (errs) os << "   errors " << errs << "\n";
    // small convergence table for scalar-valued tasks: value vs the last axis
    if (first.contains("result") && first.at("result").contains("value")) {
      os << "   value column written to csv/" << csv_name << ".csv\n";
    }
  }
  return 0;
}

OracleRegression oracle_regression(int Lmax, double tol) {
  OracleRegression reg;
  char buf[256];
  auto check = [&](const std::string& what, cd ed, cd oracle) {
    const double dev = std::abs(ed - oracle);
    reg.max_abs_dev = std::max(reg.max_abs_dev, dev);
    ++reg.checked;
    if (dev > tol) {
      reg.pass = false;
      std::snprintf(buf, sizeof(buf), "FAIL %s ed=(%.12g,%.12g) ff=(%.12g,%.12g) dev=%.3e",
                    what.c_str(), ed.real(), ed.imag(), oracle.real(), oracle.imag(), dev);
      reg.lines.push_back(buf);
    }
  };

  for (int L : {6, 8, 10, 12}) {
    if (L > Lmax) break;
    ModelParams p;
    p.L = L;
    SpectralData spec = diagonalize(p, 2.0);
    ff::FreeSpectrum fs{L, 1.0, 0.0, 0.0, false};
    for (double beta : {2.0, 8.0}) {
      set_beta(spec, beta);
      auto ens = ff::grand_ensemble(fs, beta);
      for (int pi : {1, 2}) {
        const double mom = 2.0 * kPi * pi / L;
        snprintf(buf, sizeof(buf), "L=%d beta=%g p=%d", L, beta, pi);
        const std::string tag = buf;
        for (double eta : {0.3, 0.7})
          for (double T : {15.0, 45.0}) {
            auto r = tr::canonical_H(spec, eta, mom, T);
            check(tag + " canonical_H", cd(r.value, r.im_residue), ff::ff_canonical_H(ens, eta, mom, T));
            auto rk = tr::canonical_K(spec, eta, mom, T);
            check(tag + " canonical_K", cd(rk.value, rk.im_residue),
                  ff::ff_canonical_K(ens, eta, mom, T));
          }
        for (int n0 : {0, 1, 2}) {
          const double p0 = 2.0 * kPi * n0 / beta;
          auto rh = tr::euclidean_H(spec, p0, mom);
          check(tag + " euclidean_H", cd(rh.value, rh.im_residue), ff::ff_euclidean_H(ens, p0, mom));
          auto rk = tr::euclidean_K(spec, p0, mom);
          check(tag + " euclidean_K", cd(rk.value, rk.im_residue), ff::ff_euclidean_K(ens, p0, mom));
        }
      }
      for (double eta : {0.3, 0.7}) {
        auto rt = tr::thermal_drude_regularized(spec, eta);
        check("thermal_D L=" + std::to_string(L), cd(rt.value, rt.im_residue),
              ff::ff_thermal_drude(ens, eta));
      }
    }
  }

  // beta = inf canonical formulation at half filling (shell-degenerate multiplet)
  {
    ModelParams p;
    p.L = 8;
    SpectralData spec = diagonalize(p, kBetaInf);
    ff::FreeSpectrum fs{8, 1.0, 0.0, 0.0, false};
    auto ens = ff::grand_ensemble(fs, kBetaInf);
    const double mom = 2.0 * kPi / 8;
    auto r = tr::canonical_H(spec, 0.1, mom, 200.0);
    check("beta=inf L=8 canonical_H", cd(r.value, r.im_residue),
          ff::ff_canonical_H(ens, 0.1, mom, 200.0));
  }

  // curvature formulations: closed-shell points, PT for the twist
  struct ShellPoint { int L; int N; bool apbc; };
  for (const ShellPoint sp : {ShellPoint{6, 3, false}, ShellPoint{8, 4, true},
                              ShellPoint{10, 5, false}, ShellPoint{12, 6, true},
                              ShellPoint{8, 2, true}}) {
    ModelParams p;
    p.L = sp.L;
    p.boundary = sp.apbc ? Boundary::antiperiodic : Boundary::periodic;
    tr::CurvatureOptions o;
    o.filling = sp.N;
    auto rt = tr::twist_drude(p, tr::CurvatureMethod::perturbation2, o);
    check("twist_D L=" + std::to_string(sp.L) + " N=" + std::to_string(sp.N), rt.value,
          ff::ff_twist_drude(sp.L, sp.N, sp.apbc));
    if (sp.N >= 2 && sp.N <= sp.L - 2) {
      auto rk = tr::field_susceptibility(p, tr::CurvatureMethod::charge_step, o);
      check("field_kappa L=" + std::to_string(sp.L) + " N=" + std::to_string(sp.N), rk.value,
            ff::ff_field_susceptibility(sp.L, sp.N, sp.apbc));
    }
  }
  return reg;
}

}  // namespace edlab::cli
