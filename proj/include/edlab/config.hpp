#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "edlab/model.hpp"

namespace edlab::cli {

using json = nlohmann::ordered_json;

json params_to_json(const ModelParams& p);
ModelParams params_from_json(const json& j);

/// Batch run description: a model template, named sweep axes, a task list and
/// output options. Axis values override the matching ModelParams fields or the
/// task arguments (beta, eta, T, p_index, p0_index).
struct RunConfig {
  ModelParams model;
  std::vector<std::pair<std::string, std::vector<double>>> sweep;  // ordered axes
  std::vector<std::string> tasks;
  std::string out_dir = "out";
  bool write_csv = true;
  std::uint64_t seed = 1;
  int threads = 0;             // 0: library default
  std::int64_t budget = 100000;
  bool deterministic = true;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json(const json& j);
  std::uint64_t hash() const;
  std::size_t point_count() const;
};

extern const int kRecordSchemaVersion;

}  // namespace edlab::cli
