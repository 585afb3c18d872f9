#pragma once

#include "lalnet/tape.hpp"

namespace lalnet::ops {

/// Selective state-space scan along the last axis.
///   u, delta: [B,D,L]   bmat, cmat: [B,N,L]   a: [D,N] (negative)   dskip: [D]
///   h_t[d,n] = exp(delta_t[d] * a[d,n]) * h_{t-1}[d,n] + delta_t[d] * bmat_t[n] * u_t[d]
///   y_t[d]   = sum_n cmat_t[n] * h_t[d,n] + dskip[d] * u_t[d]
template <class T>
Var<T> selective_scan(const Var<T>& u, const Var<T>& delta, const Var<T>& bmat, const Var<T>& cmat, const Var<T>& a,
                      const Var<T>& dskip);

}  // namespace lalnet::ops
