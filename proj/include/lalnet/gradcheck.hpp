#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lalnet/tape.hpp"

namespace lalnet {

/// Builds the op under test on a fresh tape from leaf inputs; any output shape.
using GradClosure = std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Inputs larger than this are checked on a seeded random subset of this many coordinates.
  int64_t max_coords_per_input = 96;
  uint64_t seed = 7;
  // Gradients smaller than this fraction of the largest checked gradient are compared
  // against that floor instead of their own magnitude; below it central differences
  // only resolve roundoff.
  double relative_floor = 1e-3;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  int64_t coords_checked = 0;
  std::string worst;  // "input i, coord j: analytic a vs numeric n"
};

/// Compares reverse-mode gradients of sum(R * f(inputs)), R a fixed random projection,
/// against central differences. Error per coordinate: |a - n| / max(|a|, |n|, floor),
/// floor = relative_floor * max |n| over all checked coordinates.
GradCheckResult grad_check(const GradClosure& fn, const std::vector<Tensor<double>>& inputs,
                           const GradCheckOptions& options = {});

}  // namespace lalnet
