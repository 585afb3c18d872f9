#pragma once

#include <vector>

#include "lalnet/tape.hpp"

// Differentiable tensor operations recorded on a Tape. Binary ops broadcast
// NumPy-style between operands of equal rank (an extent of 1 stretches).
namespace lalnet::ops {

template <class T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <class T> Var<T> mul(const Var<T>& a, const Var<T>& b);  // Hadamard
template <class T> Var<T> div(const Var<T>& a, const Var<T>& b);

template <class T> Var<T> scale(const Var<T>& a, T s);
template <class T> Var<T> add_scalar(const Var<T>& a, T s);

template <class T> Var<T> exp(const Var<T>& a);
template <class T> Var<T> abs(const Var<T>& a);  // d|x|/dx taken as 0 at 0
template <class T> Var<T> square(const Var<T>& a);
template <class T> Var<T> sigmoid(const Var<T>& a);
template <class T> Var<T> silu(const Var<T>& a);
template <class T> Var<T> softplus(const Var<T>& a);

template <class T> Var<T> reshape(const Var<T>& a, Shape shape);
template <class T> Var<T> concat(const std::vector<Var<T>>& parts, int axis);
template <class T> Var<T> slice(const Var<T>& a, int axis, int64_t start, int64_t length);
/// out[..., i] = a[..., index[i]] along the last axis.
template <class T> Var<T> gather_last(const Var<T>& a, const std::vector<int64_t>& index);

template <class T> Var<T> sum(const Var<T>& a);
template <class T> Var<T> mean(const Var<T>& a);
/// Mean over the listed axes, keeping them as extent 1.
template <class T> Var<T> mean_axes(const Var<T>& a, const std::vector<int>& axes);

/// LayerNorm over axis 1 of a [B,C,H,W] tensor with per-channel affine (gamma, beta: [C]).
template <class T> Var<T> layer_norm_channels(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                                              T eps = T(1e-6));
/// Softmax over `axis` (negative counts from the end).
template <class T> Var<T> softmax(const Var<T>& a, int axis = -1);
/// Batched matmul over rank-3 operands [G,M,K] x [G,K,N] with optional transposes.
template <class T> Var<T> matmul(const Var<T>& a, const Var<T>& b, bool trans_a = false, bool trans_b = false);

/// Broadcast output shape for two equal-rank shapes.
Shape broadcast_shape(const Shape& a, const Shape& b);

}  // namespace lalnet::ops
