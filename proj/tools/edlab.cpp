#include <CLI11.hpp>
#include <iostream>

#include "edlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"edlab: exact-diagonalization transport laboratory for perturbed XXZ chains"};
  app.require_subcommand(1);

  std::string config_path, out_dir, results_dir;
  int threads = 0;
  long long budget = -1;
  bool deterministic = false;

  auto* run_cmd = app.add_subcommand("run", "execute a sweep described by a JSON config");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
  run_cmd->add_option("--threads", threads, "worker threads (0 = config value)");
  run_cmd->add_option("--budget", budget, "max sweep points (overrides config)");
  run_cmd->add_flag("--deterministic", deterministic, "single-threaded reproducible mode");

  auto* report_cmd = app.add_subcommand("report", "render tables from a results directory");
  report_cmd->add_option("results", results_dir, "directory with records.jsonl")->required();

  int oracle_Lmax = 12;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "free-fermion regression matrix");
  oracle_cmd->add_option("--Lmax", oracle_Lmax, "largest chain length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto cfg = edlab::cli::RunConfig::from_file(config_path);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (threads > 0) cfg.threads = threads;
      if (budget >= 0) cfg.budget = budget;
      if (deterministic) cfg.deterministic = true;
      auto sum = edlab::cli::run(cfg, std::cout);
      return sum.exit_code();
    }
    if (report_cmd->parsed()) {
      return edlab::cli::report(results_dir, std::cout);
    }
    if (oracle_cmd->parsed()) {
      auto reg = edlab::cli::oracle_regression(oracle_Lmax);
      std::cout << "oracle regression: " << reg.checked
                << " checks, max deviation " << reg.max_abs_dev << "\n";
      for (const auto& l : reg.lines) std::cout << l << "\n";
      std::cout << (reg.pass ? "PASS" : "FAIL") << "\n";
      return reg.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
