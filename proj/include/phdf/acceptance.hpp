#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace phdf {

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  unsigned workers = 1;
  /// Multiplies every numeric tolerance; 0 turns every check into an exact one.
  double tolerance_scale = 1.0;
  std::vector<int> only;  // criterion ids; empty runs all
  std::filesystem::path scratch = "acceptance_scratch";  // determinism outputs
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// "C<id> PASS|FAIL <name>: <detail> (<seconds> s)"
std::string format_result(const CriterionResult& r);

}  // namespace phdf
