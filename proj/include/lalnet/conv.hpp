#pragma once

#include <optional>

#include "lalnet/tape.hpp"

namespace lalnet {

enum class Padding {
  reflect,  // mirror without repeating the edge sample
  zero,
  valid,  // no padding; output shrinks by k-1
};

struct Conv2dOptions {
  int64_t groups = 1;
  int64_t stride = 1;
  Padding padding = Padding::reflect;
};

/// Mirror index into [0, n) without edge repetition; n == 1 always maps to 0.
int64_t reflect_index(int64_t i, int64_t n);

/// Cross-correlation of x [B,Cin,H,W] with w [Cout,Cin/groups,k,k], k odd.
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias, const Conv2dOptions& opt);

namespace ops {
template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const std::optional<Var<T>>& bias, const Conv2dOptions& opt = {});
}  // namespace ops

}  // namespace lalnet
