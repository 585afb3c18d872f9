#pragma once

#include "lalnet/tape.hpp"

namespace lalnet {

// One level of the orthonormal 2D Haar transform. For each 2x2 block [a b; c d]:
//   cA = (a+b+c+d)/2   cH = (a-b+c-d)/2   cV = (a+b-c-d)/2   cD = (a-b-c+d)/2
template <class T>
struct HaarBands {
  Tensor<T> cA, cH, cV, cD;
};

/// x: [B,C,H,W] with H, W even.
template <class T>
HaarBands<T> dwt2_haar(const Tensor<T>& x);
template <class T>
Tensor<T> idwt2_haar(const HaarBands<T>& bands);

namespace ops {
/// Bands stacked along channels: [B,4C,H/2,W/2] ordered cA, cH, cV, cD (C channels each).
template <class T>
Var<T> dwt2_haar(const Var<T>& x);
/// Inverse of the stacked form.
template <class T>
Var<T> idwt2_haar(const Var<T>& stacked);
}  // namespace ops

}  // namespace lalnet
