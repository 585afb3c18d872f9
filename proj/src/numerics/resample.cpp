#include "lalnet/resample.hpp"

#include <algorithm>
#include <cmath>

namespace lalnet {

namespace {

struct Tap {
  int64_t i0, i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<Tap> up_taps(int64_t n_in) {
  std::vector<Tap> taps(static_cast<size_t>(2 * n_in));
  for (int64_t o = 0; o < 2 * n_in; ++o) {
    double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
    if (src < 0.0) src = 0.0;
    int64_t i0 = static_cast<int64_t>(std::floor(src));
    int64_t i1 = std::min(i0 + 1, n_in - 1);
    taps[o] = Tap{i0, i1, src - static_cast<double>(i0)};
  }
  return taps;
}

void check_rank4(const Shape& s, Resample dir) {
  if (s.size() != 4) throw ShapeError("resample2x: expected [B,C,H,W], got " + shape_str(s));
  if (dir == Resample::down) {
    if (s[2] % 2) throw ShapeError("resample2x down: height (dim 2) = " + std::to_string(s[2]) + " is odd");
    if (s[3] % 2) throw ShapeError("resample2x down: width (dim 3) = " + std::to_string(s[3]) + " is odd");
  }
}

template <class T>
Tensor<T> down(const Tensor<T>& x) {
  const int64_t B = x.dim(0), C = x.dim(1), h = x.dim(2) / 2, w = x.dim(3) / 2;
  Tensor<T> out(Shape{B, C, h, w});
  for (int64_t b = 0; b < B; ++b)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < w; ++j) {
          out.at(b, c, i, j) = (x.at(b, c, 2 * i, 2 * j) + x.at(b, c, 2 * i, 2 * j + 1) +
                                x.at(b, c, 2 * i + 1, 2 * j) + x.at(b, c, 2 * i + 1, 2 * j + 1)) *
                               T(0.25);
        }
  return out;
}

template <class T>
void down_backward(const Tensor<T>& g, Tensor<T>& gx) {
  const int64_t B = g.dim(0), C = g.dim(1), h = g.dim(2), w = g.dim(3);
  for (int64_t b = 0; b < B; ++b)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < w; ++j) {
          const T v = g.at(b, c, i, j) * T(0.25);
          gx.at(b, c, 2 * i, 2 * j) += v;
          gx.at(b, c, 2 * i, 2 * j + 1) += v;
          gx.at(b, c, 2 * i + 1, 2 * j) += v;
          gx.at(b, c, 2 * i + 1, 2 * j + 1) += v;
        }
}

template <class T>
Tensor<T> up(const Tensor<T>& x) {
  const int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const auto ty = up_taps(H), tx = up_taps(W);
  Tensor<T> out(Shape{B, C, 2 * H, 2 * W});
  for (int64_t b = 0; b < B; ++b)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t oy = 0; oy < 2 * H; ++oy) {
        const Tap& a = ty[oy];
        const T wy1 = static_cast<T>(a.w1), wy0 = T(1) - wy1;
        for (int64_t ox = 0; ox < 2 * W; ++ox) {
          const Tap& t = tx[ox];
          const T wx1 = static_cast<T>(t.w1), wx0 = T(1) - wx1;
          out.at(b, c, oy, ox) = wy0 * (wx0 * x.at(b, c, a.i0, t.i0) + wx1 * x.at(b, c, a.i0, t.i1)) +
                                 wy1 * (wx0 * x.at(b, c, a.i1, t.i0) + wx1 * x.at(b, c, a.i1, t.i1));
        }
      }
  return out;
}

template <class T>
void up_backward(const Tensor<T>& g, Tensor<T>& gx) {
  const int64_t B = gx.dim(0), C = gx.dim(1), H = gx.dim(2), W = gx.dim(3);
  const auto ty = up_taps(H), tx = up_taps(W);
  for (int64_t b = 0; b < B; ++b)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t oy = 0; oy < 2 * H; ++oy) {
        const Tap& a = ty[oy];
        const T wy1 = static_cast<T>(a.w1), wy0 = T(1) - wy1;
        for (int64_t ox = 0; ox < 2 * W; ++ox) {
          const Tap& t = tx[ox];
          const T wx1 = static_cast<T>(t.w1), wx0 = T(1) - wx1;
          const T v = g.at(b, c, oy, ox);
          gx.at(b, c, a.i0, t.i0) += v * wy0 * wx0;
          gx.at(b, c, a.i0, t.i1) += v * wy0 * wx1;
          gx.at(b, c, a.i1, t.i0) += v * wy1 * wx0;
          gx.at(b, c, a.i1, t.i1) += v * wy1 * wx1;
        }
      }
}

}  // namespace

template <class T>
Tensor<T> resample2x(const Tensor<T>& x, Resample direction) {
  check_rank4(x.shape(), direction);
  return direction == Resample::down ? down(x) : up(x);
}

namespace ops {

template <class T>
Var<T> resample2x(const Var<T>& x, Resample direction) {
  NodeId idx = x.id();
  Tensor<T> out = lalnet::resample2x(x.value(), direction);
  return x.tape().record(direction == Resample::down ? "downsample2x" : "upsample2x", std::move(out), {x},
                         [idx, direction](Tape<T>& tp, NodeId self) {
                           const auto& g = tp.grad_buffer(self);
                           auto& gx = tp.grad_buffer(idx);
                           if (direction == Resample::down) {
                             down_backward(g, gx);
                           } else {
                             up_backward(g, gx);
                           }
                         });
}

template Var<float> resample2x(const Var<float>&, Resample);
template Var<double> resample2x(const Var<double>&, Resample);

}  // namespace ops

template Tensor<float> resample2x(const Tensor<float>&, Resample);
template Tensor<double> resample2x(const Tensor<double>&, Resample);

}  // namespace lalnet
