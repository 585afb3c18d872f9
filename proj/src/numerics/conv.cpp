#include "lalnet/conv.hpp"

#include <string>

namespace lalnet {

int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

namespace {

struct ConvGeometry {
  int64_t B, Cin, H, W, Cout, k, groups, stride, pad, Hp, Wp, Hout, Wout, cin_g, cout_g;
};

ConvGeometry check_geometry(const Shape& xs, const Shape& ws, const Shape* bs, const Conv2dOptions& opt) {
  if (xs.size() != 4) throw ShapeError("conv2d: input must be [B,C,H,W], got " + shape_str(xs));
  if (ws.size() != 4) throw ShapeError("conv2d: weight must be [Cout,Cin/groups,k,k], got " + shape_str(ws));
  ConvGeometry g{};
  g.B = xs[0];
  g.Cin = xs[1];
  g.H = xs[2];
  g.W = xs[3];
  g.Cout = ws[0];
  g.k = ws[2];
  g.groups = opt.groups;
  g.stride = opt.stride;
  if (g.groups < 1) throw ShapeError("conv2d: groups must be >= 1");
  if (g.stride < 1 || g.stride > 2) throw ShapeError("conv2d: stride must be 1 or 2");
  if (ws[3] != g.k) throw ShapeError("conv2d: kernel dimension 3 (" + std::to_string(ws[3]) + ") differs from dimension 2");
  if (g.k % 2 == 0) throw ShapeError("conv2d: kernel size (weight dim 2) must be odd, got " + std::to_string(g.k));
  if (g.Cin % g.groups != 0) {
    throw ShapeError("conv2d: input channels (input dim 1) = " + std::to_string(g.Cin) + " not divisible by groups " +
                     std::to_string(g.groups));
  }
  if (g.Cout % g.groups != 0) {
    throw ShapeError("conv2d: output channels (weight dim 0) = " + std::to_string(g.Cout) +
                     " not divisible by groups " + std::to_string(g.groups));
  }
  g.cin_g = g.Cin / g.groups;
  g.cout_g = g.Cout / g.groups;
  if (ws[1] != g.cin_g) {
    throw ShapeError("conv2d: weight dim 1 = " + std::to_string(ws[1]) + " but input channels / groups = " +
                     std::to_string(g.cin_g));
  }
  if (bs && (*bs != Shape{g.Cout})) {
    throw ShapeError("conv2d: bias must be [" + std::to_string(g.Cout) + "], got " + shape_str(*bs));
  }
  g.pad = opt.padding == Padding::valid ? 0 : g.k / 2;
  g.Hp = g.H + 2 * g.pad;
  g.Wp = g.W + 2 * g.pad;
  if (g.Hp < g.k || g.Wp < g.k) {
    throw ShapeError("conv2d: spatial extent " + std::to_string(g.H) + "x" + std::to_string(g.W) +
                     " too small for valid kernel " + std::to_string(g.k));
  }
  g.Hout = (g.Hp - g.k) / g.stride + 1;
  g.Wout = (g.Wp - g.k) / g.stride + 1;
  return g;
}

// Padded copy of x as [B,Cin,Hp,Wp].
template <class T>
Tensor<T> pad_input(const Tensor<T>& x, const ConvGeometry& g, Padding mode) {
  if (g.pad == 0) return x;
  Tensor<T> xp(Shape{g.B, g.Cin, g.Hp, g.Wp});
  for (int64_t b = 0; b < g.B; ++b) {
    for (int64_t c = 0; c < g.Cin; ++c) {
      for (int64_t py = 0; py < g.Hp; ++py) {
        int64_t sy = py - g.pad;
        if (mode == Padding::zero && (sy < 0 || sy >= g.H)) continue;
        sy = reflect_index(sy, g.H);
        T* dst = &xp.at(b, c, py, 0);
        const T* src = &x.at(b, c, sy, 0);
        for (int64_t px = 0; px < g.Wp; ++px) {
          int64_t sx = px - g.pad;
          if (mode == Padding::zero && (sx < 0 || sx >= g.W)) continue;
          dst[px] = src[reflect_index(sx, g.W)];
        }
      }
    }
  }
  return xp;
}

template <class T>
Tensor<T> conv_padded(const Tensor<T>& xp, const Tensor<T>& w, const Tensor<T>* bias, const ConvGeometry& g) {
  Tensor<T> out(Shape{g.B, g.Cout, g.Hout, g.Wout});
  const int64_t k = g.k, s = g.stride;
  for (int64_t b = 0; b < g.B; ++b) {
    for (int64_t oc = 0; oc < g.Cout; ++oc) {
      const int64_t grp = oc / g.cout_g;
      T* o = &out.at(b, oc, 0, 0);
      if (bias) {
        const T bv = (*bias)[oc];
        for (int64_t i = 0; i < g.Hout * g.Wout; ++i) o[i] = bv;
      }
      for (int64_t icl = 0; icl < g.cin_g; ++icl) {
        const int64_t ic = grp * g.cin_g + icl;
        const T* wk = &w[((oc * g.cin_g) + icl) * k * k];
        for (int64_t ky = 0; ky < k; ++ky) {
          for (int64_t kx = 0; kx < k; ++kx) {
            const T wv = wk[ky * k + kx];
            if (wv == T(0)) continue;
            for (int64_t oy = 0; oy < g.Hout; ++oy) {
              const T* in = &xp.at(b, ic, oy * s + ky, kx);
              T* orow = o + oy * g.Wout;
              if (s == 1) {
                for (int64_t ox = 0; ox < g.Wout; ++ox) orow[ox] += wv * in[ox];
              } else {
                for (int64_t ox = 0; ox < g.Wout; ++ox) orow[ox] += wv * in[ox * s];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>* bias, const Conv2dOptions& opt) {
  ConvGeometry g = check_geometry(x.shape(), w.shape(), bias ? &bias->shape() : nullptr, opt);
  return conv_padded(pad_input(x, g, opt.padding), w, bias, g);
}

namespace ops {

template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const std::optional<Var<T>>& bias, const Conv2dOptions& opt) {
  const Tensor<T>* bv = bias ? &bias->value() : nullptr;
  ConvGeometry g = check_geometry(x.shape(), w.shape(), bv ? &bv->shape() : nullptr, opt);
  Tensor<T> xp = pad_input(x.value(), g, opt.padding);
  Tensor<T> out = conv_padded(xp, w.value(), bv, g);
  std::vector<Var<T>> inputs{x, w};
  if (bias) inputs.push_back(*bias);
  NodeId idx = x.id(), idw = w.id();
  NodeId idb = bias ? bias->id() : -1;
  const Padding mode = opt.padding;
  // Keep the padded input only when the weight gradient needs it.
  if (!w.requires_grad()) xp = Tensor<T>();
  return x.tape().record(
      "conv2d", std::move(out), inputs, [g, idx, idw, idb, mode, xp = std::move(xp)](Tape<T>& tp, NodeId self) {
        const auto& go = tp.grad_buffer(self);
        const auto& wv = tp.value(idw);
        const int64_t k = g.k, s = g.stride;
        if (idb >= 0 && tp.requires_grad(idb)) {
          auto& gb = tp.grad_buffer(idb);
          for (int64_t b = 0; b < g.B; ++b) {
            for (int64_t oc = 0; oc < g.Cout; ++oc) {
              const T* gr = &go.at(b, oc, 0, 0);
              T acc = T(0);
              for (int64_t i = 0; i < g.Hout * g.Wout; ++i) acc += gr[i];
              gb[oc] += acc;
            }
          }
        }
        if (tp.requires_grad(idw)) {
          auto& gw = tp.grad_buffer(idw);
          for (int64_t b = 0; b < g.B; ++b) {
            for (int64_t oc = 0; oc < g.Cout; ++oc) {
              const int64_t grp = oc / g.cout_g;
              const T* gr = &go.at(b, oc, 0, 0);
              for (int64_t icl = 0; icl < g.cin_g; ++icl) {
                const int64_t ic = grp * g.cin_g + icl;
                T* gk = &gw[((oc * g.cin_g) + icl) * k * k];
                for (int64_t ky = 0; ky < k; ++ky) {
                  for (int64_t kx = 0; kx < k; ++kx) {
                    T acc = T(0);
                    for (int64_t oy = 0; oy < g.Hout; ++oy) {
                      const T* in = &xp.at(b, ic, oy * s + ky, kx);
                      const T* grow = gr + oy * g.Wout;
                      if (s == 1) {
                        for (int64_t ox = 0; ox < g.Wout; ++ox) acc += grow[ox] * in[ox];
                      } else {
                        for (int64_t ox = 0; ox < g.Wout; ++ox) acc += grow[ox] * in[ox * s];
                      }
                    }
                    gk[ky * k + kx] += acc;
                  }
                }
              }
            }
          }
        }
        if (tp.requires_grad(idx)) {
          Tensor<T> gxp(Shape{g.B, g.Cin, g.Hp, g.Wp});
          for (int64_t b = 0; b < g.B; ++b) {
            for (int64_t oc = 0; oc < g.Cout; ++oc) {
              const int64_t grp = oc / g.cout_g;
              const T* gr = &go.at(b, oc, 0, 0);
              for (int64_t icl = 0; icl < g.cin_g; ++icl) {
                const int64_t ic = grp * g.cin_g + icl;
                const T* wk = &wv[((oc * g.cin_g) + icl) * k * k];
                for (int64_t ky = 0; ky < k; ++ky) {
                  for (int64_t kx = 0; kx < k; ++kx) {
                    const T w1 = wk[ky * k + kx];
                    if (w1 == T(0)) continue;
                    for (int64_t oy = 0; oy < g.Hout; ++oy) {
                      T* dst = &gxp.at(b, ic, oy * s + ky, kx);
                      const T* grow = gr + oy * g.Wout;
                      if (s == 1) {
                        for (int64_t ox = 0; ox < g.Wout; ++ox) dst[ox] += w1 * grow[ox];
                      } else {
                        for (int64_t ox = 0; ox < g.Wout; ++ox) dst[ox * s] += w1 * grow[ox];
                      }
                    }
                  }
                }
              }
            }
          }
          auto& gx = tp.grad_buffer(idx);
          if (g.pad == 0) {
            for (int64_t i = 0; i < gx.size(); ++i) gx[i] += gxp[i];
          } else {
            for (int64_t b = 0; b < g.B; ++b) {
              for (int64_t c = 0; c < g.Cin; ++c) {
                for (int64_t py = 0; py < g.Hp; ++py) {
                  int64_t sy = py - g.pad;
                  if (mode == Padding::zero && (sy < 0 || sy >= g.H)) continue;
                  sy = reflect_index(sy, g.H);
                  const T* src = &gxp.at(b, c, py, 0);
                  T* dst = &gx.at(b, c, sy, 0);
                  for (int64_t px = 0; px < g.Wp; ++px) {
                    int64_t sx = px - g.pad;
                    if (mode == Padding::zero && (sx < 0 || sx >= g.W)) continue;
                    dst[reflect_index(sx, g.W)] += src[px];
                  }
                }
              }
            }
          }
        }
      });
}

template Var<float> conv2d(const Var<float>&, const Var<float>&, const std::optional<Var<float>>&,
                           const Conv2dOptions&);
template Var<double> conv2d(const Var<double>&, const Var<double>&, const std::optional<Var<double>>&,
                            const Conv2dOptions&);

}  // namespace ops

template Tensor<float> conv2d_forward(const Tensor<float>&, const Tensor<float>&, const Tensor<float>*,
                                      const Conv2dOptions&);
template Tensor<double> conv2d_forward(const Tensor<double>&, const Tensor<double>&, const Tensor<double>*,
                                       const Conv2dOptions&);

}  // namespace lalnet
