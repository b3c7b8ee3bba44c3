#pragma once

#include <string>
#include <vector>

namespace drp {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Fast oracle suite behind `drp validate`: closed forms and cross-checks
/// that run in a few seconds.
std::vector<CheckResult> run_builtin_checks();

}  // namespace drp
