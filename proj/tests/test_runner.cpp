#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "edlab/runner.hpp"

using namespace edlab;
using namespace edlab::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json demo_config(const fs::path& out) {
  json j;
  j["model"] = {{"L", 8}, {"lambda", 0.0}};
  j["sweep"] = {{"lambda", {0.0, 0.3}}, {"beta", {6.0}}, {"p_index", {1}}, {"p0_index", {1}},
                {"eta", {0.5}}, {"T", {30.0}}};
  j["tasks"] = {"verify.ward", "verify.static_jj", "verify.wick", "euclidean_H"};
  j["output"] = {{"dir", out.string()}};
  j["seed"] = 7;
  j["deterministic"] = true;
  return j;
}

}  // namespace

TEST_CASE("empty task list runs cleanly with no records") {
  fs::path dir = fs::temp_directory_path() / "edlab_run_empty";
  fs::remove_all(dir);
  RunConfig cfg;
  cfg.model.L = 6;
  cfg.tasks = {};
  cfg.out_dir = dir.string();
  std::ostringstream os;
  auto sum = run(cfg, os);
  CHECK(sum.records == 0);
  CHECK(sum.exit_code() == 0);
}

TEST_CASE("demo sweep: verify tasks pass and records are well formed") {
  fs::path dir = fs::temp_directory_path() / "edlab_run_demo";
  fs::remove_all(dir);
  RunConfig cfg = RunConfig::from_json(demo_config(dir));
  std::ostringstream os;
  auto sum = run(cfg, os);
  CHECK(sum.verify_fail == 0);
  CHECK(sum.errors == 0);
  CHECK(sum.exit_code() == 0);
  CHECK(sum.records == 8);  // 2 sweep points x 4 tasks

  std::ifstream in(dir / "records.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    json j = json::parse(line);
    CHECK(j.at("schema_version").get<int>() == kRecordSchemaVersion);
    CHECK(j.contains("params_hash"));
    CHECK(j.contains("config_hash"));
    CHECK(j.contains("result"));
    ++n;
  }
  CHECK(n == 8);

  SUBCASE("report renders tables and csv") {
    std::ostringstream ros;
    CHECK(report(dir.string(), ros) == 0);
    CHECK(ros.str().find("verify.ward") != std::string::npos);
    CHECK(fs::exists(dir / "csv" / "euclidean_H.csv"));
  }
}

TEST_CASE("reruns are byte-identical in deterministic mode") {
  fs::path d1 = fs::temp_directory_path() / "edlab_det_1";
  fs::path d2 = fs::temp_directory_path() / "edlab_det_2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  RunConfig cfg = RunConfig::from_json(demo_config(d1));
  std::ostringstream os;
  run(cfg, os);
  cfg.out_dir = d2.string();
  run(cfg, os);
  CHECK(slurp(d1 / "records.jsonl") == slurp(d2 / "records.jsonl"));
}

TEST_CASE("budget refusal") {
  RunConfig cfg;
  cfg.model.L = 6;
  cfg.tasks = {"euclidean_H"};
  cfg.sweep = {{"lambda", std::vector<double>(100, 0.0)}, {"beta", std::vector<double>(100, 4.0)}};
  cfg.budget = 50;
  std::ostringstream os;
  CHECK_THROWS_AS(run(cfg, os), std::runtime_error);
}

TEST_CASE("malformed configs raise schema errors") {
  CHECK_THROWS_AS(RunConfig::from_json(json::parse(R"({"tasks": 7})")), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(json::parse(R"({"sweep": {"lambda": []}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_json(json::parse(R"({"model": {"L": 7}})")),
                  std::invalid_argument);
}

TEST_CASE("report on an empty directory succeeds") {
  fs::path dir = fs::temp_directory_path() / "edlab_report_empty";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ostringstream os;
  CHECK(report(dir.string(), os) == 0);
}

TEST_CASE("geometric sweep axes expand") {
  json j;
  j["model"] = {{"L", 6}};
  j["sweep"] = {{"beta", {{"geom", {4.0, 2.0, 3}}}}};
  j["tasks"] = json::array();
  RunConfig cfg = RunConfig::from_json(j);
  REQUIRE(cfg.sweep.size() == 1);
  CHECK(cfg.sweep[0].second == std::vector<double>{4.0, 8.0, 16.0});
}

TEST_CASE("free-fermion regression matrix (small)") {
  auto reg = edlab::cli::oracle_regression(8);
  for (const auto& l : reg.lines) MESSAGE(l);
  CHECK(reg.pass);
  CHECK(reg.checked > 50);
  CHECK(reg.max_abs_dev <= 1e-9);
}
