#include "lalnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lalnet::ops {

Shape broadcast_shape(const Shape& a, const Shape& b) {
  if (a.size() != b.size()) {
    throw ShapeError("broadcast requires equal rank: " + shape_str(a) + " vs " + shape_str(b));
  }
  Shape out(a.size());
  for (size_t d = 0; d < a.size(); ++d) {
    if (a[d] == b[d] || b[d] == 1) {
      out[d] = a[d];
    } else if (a[d] == 1) {
      out[d] = b[d];
    } else {
      throw ShapeError("cannot broadcast dimension " + std::to_string(d) + ": " + shape_str(a) + " vs " +
                       shape_str(b));
    }
  }
  return out;
}

namespace {

std::vector<int64_t> strides_of(const Shape& s) {
  std::vector<int64_t> st(s.size(), 1);
  for (int d = static_cast<int>(s.size()) - 2; d >= 0; --d) st[d] = st[d + 1] * s[d + 1];
  return st;
}

// Calls f(out_index, a_index, b_index) for every element of the broadcast output.
template <class F>
void for_each_broadcast(const Shape& out, const Shape& a, const Shape& b, F&& f) {
  const size_t r = out.size();
  const int64_t n = numel(out);
  if (a == out && b == out) {
    for (int64_t i = 0; i < n; ++i) f(i, i, i);
    return;
  }
  auto sa = strides_of(a), sb = strides_of(b);
  for (size_t d = 0; d < r; ++d) {
    if (a[d] == 1) sa[d] = 0;
    if (b[d] == 1) sb[d] = 0;
  }
  std::vector<int64_t> idx(r, 0);
  int64_t ia = 0, ib = 0;
  for (int64_t i = 0; i < n; ++i) {
    f(i, ia, ib);
    for (int d = static_cast<int>(r) - 1; d >= 0; --d) {
      if (++idx[d] < out[d]) {
        ia += sa[d];
        ib += sb[d];
        break;
      }
      ia -= sa[d] * (out[d] - 1);
      ib -= sb[d] * (out[d] - 1);
      idx[d] = 0;
    }
  }
}

template <class T, class Fwd, class DA, class DB>
Var<T> binary(const char* name, const Var<T>& a, const Var<T>& b, Fwd fwd, DA da, DB db) {
  const auto& av = a.value();
  const auto& bv = b.value();
  Shape os = broadcast_shape(av.shape(), bv.shape());
  Tensor<T> out(os);
  for_each_broadcast(os, av.shape(), bv.shape(),
                     [&](int64_t i, int64_t ia, int64_t ib) { out[i] = fwd(av[ia], bv[ib]); });
  NodeId ida = a.id(), idb = b.id();
  return a.tape().record(name, std::move(out), {a, b}, [ida, idb, da, db](Tape<T>& tp, NodeId self) {
    const auto& g = tp.grad_buffer(self);
    const auto& x = tp.value(ida);
    const auto& y = tp.value(idb);
    const Shape& os = tp.value(self).shape();
    if (tp.requires_grad(ida)) {
      auto& ga = tp.grad_buffer(ida);
      for_each_broadcast(os, x.shape(), y.shape(),
                         [&](int64_t i, int64_t ia, int64_t ib) { ga[ia] += g[i] * da(x[ia], y[ib]); });
    }
    if (tp.requires_grad(idb)) {
      auto& gb = tp.grad_buffer(idb);
      for_each_broadcast(os, x.shape(), y.shape(),
                         [&](int64_t i, int64_t ia, int64_t ib) { gb[ib] += g[i] * db(x[ia], y[ib]); });
    }
  });
}

// Elementwise op whose derivative is expressed through input x and output y.
template <class T, class Fwd, class Deriv>
Var<T> unary(const char* name, const Var<T>& a, Fwd fwd, Deriv deriv) {
  const auto& av = a.value();
  Tensor<T> out(av.shape());
  for (int64_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  NodeId ida = a.id();
  return a.tape().record(name, std::move(out), {a}, [ida, deriv](Tape<T>& tp, NodeId self) {
    const auto& g = tp.grad_buffer(self);
    const auto& x = tp.value(ida);
    const auto& y = tp.value(self);
    auto& ga = tp.grad_buffer(ida);
    for (int64_t i = 0; i < x.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
  });
}

int norm_axis(int axis, int rank, const char* op) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw ShapeError(std::string(op) + ": axis out of range for rank " + std::to_string(rank));
  }
  return axis;
}

}  // namespace

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  return binary<T>(
      "add", a, b, [](T x, T y) { return x + y; }, [](T, T) { return T(1); }, [](T, T) { return T(1); });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  return binary<T>(
      "sub", a, b, [](T x, T y) { return x - y; }, [](T, T) { return T(1); }, [](T, T) { return T(-1); });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  return binary<T>(
      "mul", a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; }, [](T x, T) { return x; });
}

template <class T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  return binary<T>(
      "div", a, b, [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
      [](T x, T y) { return -x / (y * y); });
}

template <class T>
Var<T> scale(const Var<T>& a, T s) {
  return unary<T>(
      "scale", a, [s](T x) { return x * s; }, [s](T, T) { return s; });
}

template <class T>
Var<T> add_scalar(const Var<T>& a, T s) {
  return unary<T>(
      "add_scalar", a, [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <class T>
Var<T> exp(const Var<T>& a) {
  return unary<T>(
      "exp", a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <class T>
Var<T> abs(const Var<T>& a) {
  return unary<T>(
      "abs", a, [](T x) { return std::abs(x); },
      [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <class T>
Var<T> square(const Var<T>& a) {
  return unary<T>(
      "square", a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <class T>
Var<T> sigmoid(const Var<T>& a) {
  return unary<T>(
      "sigmoid", a, [](T x) { return T(1) / (T(1) + std::exp(-x)); }, [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Var<T> silu(const Var<T>& a) {
  return unary<T>(
      "silu", a, [](T x) { return x / (T(1) + std::exp(-x)); },
      [](T x, T) {
        T s = T(1) / (T(1) + std::exp(-x));
        return s * (T(1) + x * (T(1) - s));
      });
}

template <class T>
Var<T> softplus(const Var<T>& a) {
  return unary<T>(
      "softplus", a,
      [](T x) { return x > T(20) ? x : std::log1p(std::exp(x)); },
      [](T x, T) { return T(1) / (T(1) + std::exp(-x)); });
}

template <class T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  Tensor<T> out = a.value().reshaped(std::move(shape));
  NodeId ida = a.id();
  return a.tape().record("reshape", std::move(out), {a}, [ida](Tape<T>& tp, NodeId self) {
    const auto& g = tp.grad_buffer(self);
    auto& ga = tp.grad_buffer(ida);
    for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

template <class T>
Var<T> concat(const std::vector<Var<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const Shape& s0 = parts[0].shape();
  axis = norm_axis(axis, static_cast<int>(s0.size()), "concat");
  Shape os = s0;
  os[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != s0.size()) throw ShapeError("concat rank mismatch");
    for (size_t d = 0; d < s.size(); ++d) {
      if (static_cast<int>(d) != axis && s[d] != s0[d]) {
        throw ShapeError("concat: dimension " + std::to_string(d) + " mismatch " + shape_str(s) + " vs " +
                         shape_str(s0));
      }
    }
    os[axis] += s[axis];
  }
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= os[d];
  for (size_t d = axis + 1; d < os.size(); ++d) inner *= os[d];
  Tensor<T> out(os);
  std::vector<int64_t> offsets;
  std::vector<NodeId> ids;
  int64_t off = 0;
  for (const auto& p : parts) {
    const auto& v = p.value();
    int64_t n = v.shape()[axis];
    for (int64_t o = 0; o < outer; ++o) {
      std::copy_n(v.data().begin() + o * n * inner, n * inner,
                  out.data().begin() + (o * os[axis] + off) * inner);
    }
    offsets.push_back(off);
    ids.push_back(p.id());
    off += n;
  }
  int64_t total = os[axis];
  return parts[0].tape().record(
      "concat", std::move(out), parts, [ids, offsets, outer, inner, total, axis](Tape<T>& tp, NodeId self) {
        const auto& g = tp.grad_buffer(self);
        for (size_t k = 0; k < ids.size(); ++k) {
          if (!tp.requires_grad(ids[k])) continue;
          auto& gp = tp.grad_buffer(ids[k]);
          int64_t n = tp.value(ids[k]).shape()[axis];
          for (int64_t o = 0; o < outer; ++o) {
            const T* src = g.data().data() + (o * total + offsets[k]) * inner;
            T* dst = gp.data().data() + o * n * inner;
            for (int64_t i = 0; i < n * inner; ++i) dst[i] += src[i];
          }
        }
      });
}

template <class T>
Var<T> slice(const Var<T>& a, int axis, int64_t start, int64_t length) {
  const Shape& s = a.shape();
  axis = norm_axis(axis, static_cast<int>(s.size()), "slice");
  if (start < 0 || length < 0 || start + length > s[axis]) {
    throw ShapeError("slice [" + std::to_string(start) + ", +" + std::to_string(length) + ") out of range on axis " +
                     std::to_string(axis) + " of " + shape_str(s));
  }
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= s[d];
  for (size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  Shape os = s;
  os[axis] = length;
  Tensor<T> out(os);
  const auto& v = a.value();
  int64_t full = s[axis];
  for (int64_t o = 0; o < outer; ++o) {
    std::copy_n(v.data().begin() + (o * full + start) * inner, length * inner,
                out.data().begin() + o * length * inner);
  }
  NodeId ida = a.id();
  return a.tape().record("slice", std::move(out), {a},
                         [ida, outer, inner, full, start, length](Tape<T>& tp, NodeId self) {
                           const auto& g = tp.grad_buffer(self);
                           auto& ga = tp.grad_buffer(ida);
                           for (int64_t o = 0; o < outer; ++o) {
                             const T* src = g.data().data() + o * length * inner;
                             T* dst = ga.data().data() + (o * full + start) * inner;
                             for (int64_t i = 0; i < length * inner; ++i) dst[i] += src[i];
                           }
                         });
}

template <class T>
Var<T> gather_last(const Var<T>& a, const std::vector<int64_t>& index) {
  const Shape& s = a.shape();
  if (s.empty()) throw ShapeError("gather_last on a scalar");
  int64_t n_in = s.back();
  for (auto i : index) {
    if (i < 0 || i >= n_in) throw ShapeError("gather_last index " + std::to_string(i) + " out of range");
  }
  int64_t n_out = static_cast<int64_t>(index.size());
  int64_t outer = numel(s) / std::max<int64_t>(n_in, 1);
  Shape os = s;
  os.back() = n_out;
  Tensor<T> out(os);
  const auto& v = a.value();
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t i = 0; i < n_out; ++i) out[o * n_out + i] = v[o * n_in + index[i]];
  }
  NodeId ida = a.id();
  return a.tape().record("gather_last", std::move(out), {a},
                         [ida, index, outer, n_in, n_out](Tape<T>& tp, NodeId self) {
                           const auto& g = tp.grad_buffer(self);
                           auto& ga = tp.grad_buffer(ida);
                           for (int64_t o = 0; o < outer; ++o) {
                             for (int64_t i = 0; i < n_out; ++i) ga[o * n_in + index[i]] += g[o * n_out + i];
                           }
                         });
}

template <class T>
Var<T> sum(const Var<T>& a) {
  const auto& v = a.value();
  T s = T(0);
  for (auto x : v.data()) s += x;
  NodeId ida = a.id();
  return a.tape().record("sum", Tensor<T>::scalar(s), {a}, [ida](Tape<T>& tp, NodeId self) {
    T g = tp.grad_buffer(self)[0];
    auto& ga = tp.grad_buffer(ida);
    for (auto& x : ga.data()) x += g;
  });
}

template <class T>
Var<T> mean(const Var<T>& a) {
  const auto& v = a.value();
  if (v.size() == 0) throw ShapeError("mean of an empty tensor");
  T s = T(0);
  for (auto x : v.data()) s += x;
  T inv = T(1) / static_cast<T>(v.size());
  NodeId ida = a.id();
  return a.tape().record("mean", Tensor<T>::scalar(s * inv), {a}, [ida, inv](Tape<T>& tp, NodeId self) {
    T g = tp.grad_buffer(self)[0] * inv;
    auto& ga = tp.grad_buffer(ida);
    for (auto& x : ga.data()) x += g;
  });
}

template <class T>
Var<T> mean_axes(const Var<T>& a, const std::vector<int>& axes) {
  const Shape& s = a.shape();
  Shape os = s;
  int64_t count = 1;
  for (int ax : axes) {
    int d = norm_axis(ax, static_cast<int>(s.size()), "mean_axes");
    count *= os[d];
    os[d] = 1;
  }
  Tensor<T> out(os);
  const auto& v = a.value();
  T inv = T(1) / static_cast<T>(count);
  for_each_broadcast(s, s, os, [&](int64_t i, int64_t, int64_t io) { out[io] += v[i]; });
  for (auto& x : out.data()) x *= inv;
  NodeId ida = a.id();
  return a.tape().record("mean_axes", std::move(out), {a}, [ida, inv](Tape<T>& tp, NodeId self) {
    const auto& g = tp.grad_buffer(self);
    auto& ga = tp.grad_buffer(ida);
    for_each_broadcast(ga.shape(), ga.shape(), g.shape(),
                       [&](int64_t i, int64_t, int64_t io) { ga[i] += g[io] * inv; });
  });
}

template <class T>
Var<T> layer_norm_channels(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw ShapeError("layer_norm_channels expects [B,C,H,W], got " + shape_str(s));
  const int64_t B = s[0], C = s[1], HW = s[2] * s[3];
  if (gamma.shape() != Shape{C} || beta.shape() != Shape{C}) {
    throw ShapeError("layer_norm_channels: affine params must be [" + std::to_string(C) + "]");
  }
  const auto& xv = x.value();
  const auto& gv = gamma.value();
  const auto& bv = beta.value();
  Tensor<T> out(s);
  Tensor<T> xhat(s);
  std::vector<T> inv_std(static_cast<size_t>(B * HW));
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t p = 0; p < HW; ++p) {
      const int64_t base = b * C * HW + p;
      T mu = T(0);
      for (int64_t c = 0; c < C; ++c) mu += xv[base + c * HW];
      mu /= static_cast<T>(C);
      T var = T(0);
      for (int64_t c = 0; c < C; ++c) {
        T d = xv[base + c * HW] - mu;
        var += d * d;
      }
      var /= static_cast<T>(C);
      T is = T(1) / std::sqrt(var + eps);
      inv_std[b * HW + p] = is;
      for (int64_t c = 0; c < C; ++c) {
        T h = (xv[base + c * HW] - mu) * is;
        xhat[base + c * HW] = h;
        out[base + c * HW] = gv[c] * h + bv[c];
      }
    }
  }
  NodeId idx = x.id(), idg = gamma.id(), idb = beta.id();
  return x.tape().record(
      "layer_norm", std::move(out), {x, gamma, beta},
      [idx, idg, idb, xhat = std::move(xhat), inv_std = std::move(inv_std), B, C, HW](Tape<T>& tp, NodeId self) {
        const auto& g = tp.grad_buffer(self);
        const auto& gv = tp.value(idg);
        const bool need_x = tp.requires_grad(idx);
        const bool need_g = tp.requires_grad(idg);
        const bool need_b = tp.requires_grad(idb);
        Tensor<T>* gx = need_x ? &tp.grad_buffer(idx) : nullptr;
        Tensor<T>* gg = need_g ? &tp.grad_buffer(idg) : nullptr;
        Tensor<T>* gb = need_b ? &tp.grad_buffer(idb) : nullptr;
        std::vector<T> dxh(static_cast<size_t>(C));
        for (int64_t b = 0; b < B; ++b) {
          for (int64_t p = 0; p < HW; ++p) {
            const int64_t base = b * C * HW + p;
            T m1 = T(0), m2 = T(0);
            for (int64_t c = 0; c < C; ++c) {
              const int64_t i = base + c * HW;
              if (gg) (*gg)[c] += g[i] * xhat[i];
              if (gb) (*gb)[c] += g[i];
              dxh[c] = g[i] * gv[c];
              m1 += dxh[c];
              m2 += dxh[c] * xhat[i];
            }
            if (!gx) continue;
            m1 /= static_cast<T>(C);
            m2 /= static_cast<T>(C);
            const T is = inv_std[b * HW + p];
            for (int64_t c = 0; c < C; ++c) {
              const int64_t i = base + c * HW;
              (*gx)[i] += is * (dxh[c] - m1 - xhat[i] * m2);
            }
          }
        }
      });
}

template <class T>
Var<T> softmax(const Var<T>& a, int axis) {
  const Shape& s = a.shape();
  axis = norm_axis(axis, static_cast<int>(s.size()), "softmax");
  int64_t outer = 1, inner = 1, n = s[axis];
  for (int d = 0; d < axis; ++d) outer *= s[d];
  for (size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  const auto& v = a.value();
  Tensor<T> out(s);
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t in = 0; in < inner; ++in) {
      const int64_t base = o * n * inner + in;
      T mx = v[base];
      for (int64_t k = 1; k < n; ++k) mx = std::max(mx, v[base + k * inner]);
      T z = T(0);
      for (int64_t k = 0; k < n; ++k) {
        T e = std::exp(v[base + k * inner] - mx);
        out[base + k * inner] = e;
        z += e;
      }
      for (int64_t k = 0; k < n; ++k) out[base + k * inner] /= z;
    }
  }
  NodeId ida = a.id();
  return a.tape().record("softmax", std::move(out), {a}, [ida, outer, inner, n](Tape<T>& tp, NodeId self) {
    const auto& g = tp.grad_buffer(self);
    const auto& y = tp.value(self);
    auto& ga = tp.grad_buffer(ida);
    for (int64_t o = 0; o < outer; ++o) {
      for (int64_t in = 0; in < inner; ++in) {
        const int64_t base = o * n * inner + in;
        T dot = T(0);
        for (int64_t k = 0; k < n; ++k) dot += g[base + k * inner] * y[base + k * inner];
        for (int64_t k = 0; k < n; ++k) {
          const int64_t i = base + k * inner;
          ga[i] += y[i] * (g[i] - dot);
        }
      }
    }
  });
}

namespace {

// C[g] (+)= op(A[g]) * op(B[g]) with explicit element strides, used by forward and backward.
template <class T>
void gemm_batched(int64_t G, int64_t M, int64_t N, int64_t K, const T* A, int64_t a_g, int64_t a_m, int64_t a_k,
                  const T* Bm, int64_t b_g, int64_t b_k, int64_t b_n, T* Cm, int64_t c_g, int64_t c_m,
                  int64_t c_n) {
  for (int64_t g = 0; g < G; ++g) {
    for (int64_t m = 0; m < M; ++m) {
      for (int64_t k = 0; k < K; ++k) {
        const T av = A[g * a_g + m * a_m + k * a_k];
        if (av == T(0)) continue;
        const T* brow = Bm + g * b_g + k * b_k;
        T* crow = Cm + g * c_g + m * c_m;
        for (int64_t n = 0; n < N; ++n) crow[n * c_n] += av * brow[n * b_n];
      }
    }
  }
}

}  // namespace

template <class T>
Var<T> matmul(const Var<T>& a, const Var<T>& b, bool trans_a, bool trans_b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 3 || sb.size() != 3) throw ShapeError("matmul expects rank-3 operands");
  if (sa[0] != sb[0]) throw ShapeError("matmul: batch dimension 0 mismatch " + shape_str(sa) + " vs " + shape_str(sb));
  const int64_t G = sa[0];
  const int64_t M = trans_a ? sa[2] : sa[1];
  const int64_t K = trans_a ? sa[1] : sa[2];
  const int64_t Kb = trans_b ? sb[2] : sb[1];
  const int64_t N = trans_b ? sb[1] : sb[2];
  if (K != Kb) throw ShapeError("matmul: inner dimension mismatch " + shape_str(sa) + " x " + shape_str(sb));
  // element strides of op(A) as [m,k] and op(B) as [k,n]
  const int64_t a_m = trans_a ? 1 : sa[2], a_k = trans_a ? sa[2] : 1;
  const int64_t b_k = trans_b ? 1 : sb[2], b_n = trans_b ? sb[2] : 1;
  const int64_t a_g = sa[1] * sa[2], b_g = sb[1] * sb[2];
  Tensor<T> out(Shape{G, M, N});
  gemm_batched<T>(G, M, N, K, a.value().data().data(), a_g, a_m, a_k, b.value().data().data(), b_g, b_k, b_n,
                  out.data().data(), M * N, N, 1);
  NodeId ida = a.id(), idb = b.id();
  return a.tape().record(
      "matmul", std::move(out), {a, b},
      [=](Tape<T>& tp, NodeId self) {
        const T* g = tp.grad_buffer(self).data().data();
        if (tp.requires_grad(ida)) {
          // dA[m,k] = sum_n G[m,n] B[k,n]; written through op(A)'s strides
          T* ga = tp.grad_buffer(ida).data().data();
          const T* bv = tp.value(idb).data().data();
          gemm_batched<T>(G, M, K, N, g, M * N, N, 1, bv, b_g, b_n, b_k, ga, a_g, a_m, a_k);
        }
        if (tp.requires_grad(idb)) {
          // dB[k,n] = sum_m A[m,k] G[m,n]
          T* gb = tp.grad_buffer(idb).data().data();
          const T* av = tp.value(ida).data().data();
          gemm_batched<T>(G, K, N, M, av, a_g, a_k, a_m, g, M * N, N, 1, gb, b_g, b_k, b_n);
        }
      });
}

#define LALNET_INSTANTIATE_OPS(T)                                                                \
  template Var<T> add(const Var<T>&, const Var<T>&);                                              \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                              \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                              \
  template Var<T> div(const Var<T>&, const Var<T>&);                                              \
  template Var<T> scale(const Var<T>&, T);                                                        \
  template Var<T> add_scalar(const Var<T>&, T);                                                   \
  template Var<T> exp(const Var<T>&);                                                             \
  template Var<T> abs(const Var<T>&);                                                             \
  template Var<T> square(const Var<T>&);                                                          \
  template Var<T> sigmoid(const Var<T>&);                                                         \
  template Var<T> silu(const Var<T>&);                                                            \
  template Var<T> softplus(const Var<T>&);                                                        \
  template Var<T> reshape(const Var<T>&, Shape);                                                  \
  template Var<T> concat(const std::vector<Var<T>>&, int);                                        \
  template Var<T> slice(const Var<T>&, int, int64_t, int64_t);                                    \
  template Var<T> gather_last(const Var<T>&, const std::vector<int64_t>&);                        \
  template Var<T> sum(const Var<T>&);                                                             \
  template Var<T> mean(const Var<T>&);                                                            \
  template Var<T> mean_axes(const Var<T>&, const std::vector<int>&);                              \
  template Var<T> layer_norm_channels(const Var<T>&, const Var<T>&, const Var<T>&, T);            \
  template Var<T> softmax(const Var<T>&, int);                                                    \
  template Var<T> matmul(const Var<T>&, const Var<T>&, bool, bool);

LALNET_INSTANTIATE_OPS(float)
LALNET_INSTANTIATE_OPS(double)

}  // namespace lalnet::ops
