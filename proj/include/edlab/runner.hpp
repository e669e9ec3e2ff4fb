#pragma once

#include <iosfwd>

#include "edlab/config.hpp"

namespace edlab::cli {

struct RunSummary {
  int records = 0;
  int verify_pass = 0;
  int verify_fail = 0;
  int errors = 0;
  int exit_code() const { return (verify_fail > 0 || errors > 0) ? 1 : 0; }
};

/// executes the config, writing one JSON line per (task, point) to
/// <out_dir>/records.jsonl plus a summary table on os
RunSummary run(const RunConfig& cfg, std::ostream& os);

/// renders convergence / residual tables from a records directory; returns 0
/// on success (missing or corrupt records are skipped with warnings)
int report(const std::string& results_dir, std::ostream& os);

struct OracleRegression {
  int checked = 0;
  double max_abs_dev = 0;
  bool pass = true;
  std::vector<std::string> lines;
};

/// frozen free-fermion regression matrix: every transport formulation against
/// the closed-form oracle at lambda = epsilon = 0, L <= Lmax
OracleRegression oracle_regression(int Lmax = 12, double tol = 1e-9);

}  // namespace edlab::cli
