// Acceptance battery: runs every criterion at its pinned tolerance and
// prints one pass/fail line per criterion. Exit status 0 iff all pass.
#include <cstdio>

#include "indexlab/suite.hpp"

int main() {
  try {
    auto report = indexlab::suite::run_paper_acceptance(
        "acceptance-out", /*jobs=*/1, indexlab::Tolerances{});
    std::fputs(report.summary_lines().c_str(), stdout);
    return report.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance suite aborted: %s\n", e.what());
    return 2;
  }
}
