#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sqg/parallel.hpp"

namespace sqg {

enum class Suite { tensor, solver, limits, commutators, all };

Suite suite_from_string(const std::string& s);
std::string to_string(Suite s);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values against their thresholds
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct VerifyOptions {
  ParallelContext ctx;
  /// When set, criteria that produce trajectories, sweeps or commutator
  /// data write their CSV/JSON artifacts here.
  std::optional<std::filesystem::path> artifact_dir;
};

/// Acceptance criteria by id (1..10). An exception inside a criterion marks
/// it failed with the error text; it does not propagate.
CriterionResult run_criterion(int id, const VerifyOptions& opts = {});

/// tensor: 1-2, solver: 3-5, limits: 6-9, commutators: 10, all: 1-10.
std::vector<int> suite_criteria(Suite s);
std::vector<CriterionResult> run_suite(Suite s, const VerifyOptions& opts = {});

/// "[PASS] 3 inviscid conservation (1.2 s): ..." style line.
std::string format_result(const CriterionResult& r);

}  // namespace sqg
