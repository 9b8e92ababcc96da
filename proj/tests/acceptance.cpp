// Acceptance gate: every criterion at its stated tolerance and runtime budget.
// Artifacts go to $SQG_ARTIFACT_DIR when set.

#include <cstdlib>
#include <iostream>

#include "sqg/verify.hpp"

int main() {
  sqg::VerifyOptions opts;
  opts.ctx = sqg::ParallelContext::machine();
  if (const char* dir = std::getenv("SQG_ARTIFACT_DIR"); dir && *dir) opts.artifact_dir = dir;

  int failed = 0;
  for (int id = 1; id <= 10; ++id) {
    const auto r = sqg::run_criterion(id, opts);
    std::cout << sqg::format_result(r) << std::endl;
    failed += !r.passed;
  }
  std::cout << (failed ? "FAILED: " : "all passed: ") << 10 - failed << "/10 criteria" << std::endl;
  return failed ? 1 : 0;
}
