#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stochacc/config.hpp"

namespace stochacc {

/// One verification line: |estimate - oracle| compared against tolerance
/// (or a one-sided bound, see rule).
struct Check {
  std::string name;
  double oracle = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double tolerance = 0.0;
  std::string rule;  // "abs<=tol", "rel<=tol", "est>=tol", "est<=tol"
  bool passed = false;
  /// Designed to fail; counts as success for the exit code.
  bool expected_fail = false;
  std::string note;

  bool ok() const { return passed != expected_fail; }
};

struct Report {
  std::string command;
  std::string problem;
  std::string pipeline;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  std::size_t paths = 0;
  std::size_t failed_paths = 0;
  std::vector<std::string> failures;  // one line per failed path

  bool ok() const;
  void add(Check c);
};

/// Commands: run, run-example1, run-example2, run-counterexample,
/// build-basis, verify-fp, pair-dispersion, weak-order.
const std::vector<std::string>& commands();

/// Runs `command`, writes every artifact into out_dir (created if missing)
/// including report.json, and returns the report. Artifacts depend only on
/// the config and never on cfg.threads.
Report run_command(const std::string& command, const ExperimentConfig& cfg,
                   const std::filesystem::path& out_dir);

/// One line per check: verdict, name, oracle, estimate, se, tolerance.
std::string format_report(const Report& r);

}  // namespace stochacc
