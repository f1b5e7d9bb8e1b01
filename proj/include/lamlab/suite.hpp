#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lamlab/json_io.hpp"

namespace lamlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;  // one line of measured values against thresholds
  Json details;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0 when the criterion has no runtime bound
  bool interrupted = false;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  // Multiplies every trial count; 1 runs the battery at full size.
  double trial_scale = 1.0;
  // Criterion ids to run; empty runs all of them.
  std::vector<int> only;
};

std::vector<int> suite_criteria();
std::string criterion_name(int id);

CriterionResult run_criterion(int id, const SuiteOptions& opts);
std::vector<CriterionResult> run_suite(const SuiteOptions& opts);

Json to_json(const CriterionResult& r);

}  // namespace lamlab
