#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "twophase/parallel.hpp"

namespace twophase {

struct CriterionResult {
  int id = 0;
  std::string label;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  Execution execution{};
  /// Multiplies every Monte Carlo sample size (1 is the full budget).
  double budget = 1.0;
  /// Criteria to run; empty means all of 1..11.
  std::vector<int> only;
  /// Called as each criterion finishes.
  std::function<void(const CriterionResult&)> on_result;
};

constexpr int kCriterionCount = 11;

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

/// "PASS  3  onset law ...  (12.3 s)".
std::string format_result(const CriterionResult& r);

}  // namespace twophase
