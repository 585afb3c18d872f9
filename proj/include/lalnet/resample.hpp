#pragma once

#include "lalnet/tape.hpp"

namespace lalnet {

enum class Resample { down, up };

/// down: 2x2 average pooling (even extents). up: 2x bilinear, half-pixel centres
/// (align-corners false), edge samples clamped.
template <class T>
Tensor<T> resample2x(const Tensor<T>& x, Resample direction);

namespace ops {
template <class T>
Var<T> resample2x(const Var<T>& x, Resample direction);
template <class T>
Var<T> downsample2x(const Var<T>& x) { return resample2x(x, Resample::down); }
template <class T>
Var<T> upsample2x(const Var<T>& x) { return resample2x(x, Resample::up); }
}  // namespace ops

}  // namespace lalnet
