#include "edlab/config.hpp"

#include <fstream>
#include <stdexcept>

namespace edlab::cli {

const int kRecordSchemaVersion = 1;

json params_to_json(const ModelParams& p) {
  json j;
  j["J_hop"] = p.J_hop;
  j["lambda"] = p.lambda;
  j["h_field"] = p.h_field;
  j["epsilon"] = p.epsilon;
  json v = json::array();
  for (const auto& c : p.v_couplings) v.push_back({c.range, c.strength});
  j["v_couplings"] = v;
  j["L"] = p.L;
  j["flux_phi"] = p.flux_phi;
  j["external_h"] = p.external_h;
  j["probe_sign"] = p.probe_sign;
  j["boundary"] = to_string(p.boundary);
  return j;
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  try {
    if (j.contains("J_hop")) p.J_hop = j.at("J_hop").get<double>();
    if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
    if (j.contains("h_field")) p.h_field = j.at("h_field").get<double>();
    if (j.contains("epsilon")) p.epsilon = j.at("epsilon").get<double>();
    if (j.contains("L")) p.L = j.at("L").get<int>();
    if (j.contains("flux_phi")) p.flux_phi = j.at("flux_phi").get<double>();
    if (j.contains("external_h")) p.external_h = j.at("external_h").get<double>();
    if (j.contains("probe_sign")) p.probe_sign = j.at("probe_sign").get<int>();
    if (j.contains("boundary")) p.boundary = boundary_from_string(j.at("boundary").get<std::string>());
    if (j.contains("v_couplings"))
      for (const auto& c : j.at("v_couplings"))
        p.v_couplings.push_back({c.at(0).get<int>(), c.at(1).get<double>()});
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model block: ") + e.what());
  }
  p.validate();
  return p;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("model")) c.model = params_from_json(j.at("model"));
    if (j.contains("sweep"))
      for (const auto& [k, v] : j.at("sweep").items()) {
        std::vector<double> vals;
        if (v.is_object() && v.contains("geom")) {
          // {"geom": [start, factor, count]}
          const double start = v.at("geom").at(0).get<double>();
          const double factor = v.at("geom").at(1).get<double>();
          const int count = v.at("geom").at(2).get<int>();
          double x = start;
          for (int i = 0; i < count; ++i, x *= factor) vals.push_back(x);
        } else {
          vals = v.get<std::vector<double>>();
        }
        if (vals.empty()) throw std::invalid_argument("sweep axis '" + k + "' is empty");
        c.sweep.emplace_back(k, vals);
      }
    if (j.contains("tasks")) c.tasks = j.at("tasks").get<std::vector<std::string>>();
    if (j.contains("output")) {
      const auto& o = j.at("output");
      if (o.contains("dir")) c.out_dir = o.at("dir").get<std::string>();
      if (o.contains("csv")) c.write_csv = o.at("csv").get<bool>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("budget")) c.budget = j.at("budget").get<std::int64_t>();
    if (j.contains("deterministic")) c.deterministic = j.at("deterministic").get<bool>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config schema error: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = model.hash();
  auto mix = [&h](const void* d, std::size_t n) { h = fnv1a(d, n, h); };
  for (const auto& [k, vals] : sweep) {
    h = fnv1a(k.data(), k.size(), h);
    for (double v : vals) mix(&v, sizeof(v));
  }
  for (const auto& t : tasks) h = fnv1a(t.data(), t.size(), h);
  mix(&seed, sizeof(seed));
  return h;
}

std::size_t RunConfig::point_count() const {
  std::size_t n = 1;
  for (const auto& [k, vals] : sweep) n *= vals.size();
  return n;
}

}  // namespace edlab::cli
