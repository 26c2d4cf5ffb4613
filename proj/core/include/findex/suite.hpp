#pragma once

#include <map>

#include "findex/scenario.hpp"

namespace findex {

struct CheckResult {
  std::string id;
  std::string status;  // pass | fail | skipped | infinite-index
  std::string detail;
  std::map<std::string, double> values;
};

struct SuiteReport {
  std::string scenario;
  std::vector<CheckResult> results;
  bool passed = true;  // true when no check failed (skips do not count)
  std::string to_json() const;
};

/// Run the scenario's checks (all known checks when none are listed).
SuiteReport run_suite(const Scenario& sc);

}  // namespace findex
