#pragma once

#include <string>
#include <vector>

#include "lalnet/gradcheck.hpp"

namespace lalnet {

/// One registered gradient check: every differentiable op and every network block,
/// checked in double precision w.r.t. all of its inputs and parameters.
struct GradCase {
  std::string name;
  std::string group;  // "op" or "block"
  GradClosure fn;
  std::vector<Tensor<double>> inputs;
};

std::vector<GradCase> gradient_cases(uint64_t seed = 11);
std::vector<std::string> gradient_case_names();

struct GradCaseResult {
  std::string name;
  std::string group;
  GradCheckResult check;
  double seconds = 0.0;
};

/// Runs the cases selected by `filter`: empty or "all", a group ("op", "block") or a case
/// name. Unknown filters throw std::invalid_argument listing the valid names.
std::vector<GradCaseResult> run_gradient_suite(const std::string& filter = "", const GradCheckOptions& options = {});

}  // namespace lalnet
