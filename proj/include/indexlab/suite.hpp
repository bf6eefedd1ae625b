#pragma once

#include <string>
#include <vector>

#include "indexlab/experiments.hpp"

namespace indexlab::suite {

struct CriterionResult {
  int number = 0;
  std::string name;
  std::string anchor;
  bool pass = false;
  std::string detail;
  double wall_ms = 0.0;
};

struct SuiteReport {
  std::string suite;
  std::vector<CriterionResult> criteria;
  bool pass = false;
  double total_wall_ms = 0.0;

  experiments::json to_json() const;
  std::string to_markdown() const;
  std::string summary_lines() const;  // one pass/fail line per criterion
};

// The full acceptance battery; every threshold is pinned here. Writes
// report.json and report.md plus per-experiment artifacts under out_dir.
SuiteReport run_paper_acceptance(const std::string& out_dir, int jobs,
                                 const Tolerances& tol);

SuiteReport run_suite(const std::string& name, const std::string& out_dir,
                      int jobs, const Tolerances& tol);

}  // namespace indexlab::suite
