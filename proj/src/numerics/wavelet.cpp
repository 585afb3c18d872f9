#include "lalnet/wavelet.hpp"

namespace lalnet {

namespace {

void check_even(const Shape& s) {
  if (s.size() != 4) throw ShapeError("dwt2_haar: expected [B,C,H,W], got " + shape_str(s));
  if (s[2] % 2 != 0) throw ShapeError("dwt2_haar: height (dim 2) = " + std::to_string(s[2]) + " is odd");
  if (s[3] % 2 != 0) throw ShapeError("dwt2_haar: width (dim 3) = " + std::to_string(s[3]) + " is odd");
}

// Stacked layout [B,4C,h,w]; band k of channel c lives at channel k*C + c.
template <class T>
Tensor<T> forward_stacked(const Tensor<T>& x) {
  check_even(x.shape());
  const int64_t B = x.dim(0), C = x.dim(1), h = x.dim(2) / 2, w = x.dim(3) / 2;
  Tensor<T> out(Shape{B, 4 * C, h, w});
  const T half = T(0.5);
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t c = 0; c < C; ++c) {
      for (int64_t i = 0; i < h; ++i) {
        for (int64_t j = 0; j < w; ++j) {
          const T a = x.at(b, c, 2 * i, 2 * j), bb = x.at(b, c, 2 * i, 2 * j + 1);
          const T cc = x.at(b, c, 2 * i + 1, 2 * j), d = x.at(b, c, 2 * i + 1, 2 * j + 1);
          out.at(b, c, i, j) = (a + bb + cc + d) * half;
          out.at(b, C + c, i, j) = (a - bb + cc - d) * half;
          out.at(b, 2 * C + c, i, j) = (a + bb - cc - d) * half;
          out.at(b, 3 * C + c, i, j) = (a - bb - cc + d) * half;
        }
      }
    }
  }
  return out;
}

template <class T>
Tensor<T> inverse_stacked(const Tensor<T>& s) {
  if (s.rank() != 4 || s.dim(1) % 4 != 0) {
    throw ShapeError("idwt2_haar: expected [B,4C,h,w], got " + shape_str(s.shape()));
  }
  const int64_t B = s.dim(0), C = s.dim(1) / 4, h = s.dim(2), w = s.dim(3);
  Tensor<T> out(Shape{B, C, 2 * h, 2 * w});
  const T half = T(0.5);
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t c = 0; c < C; ++c) {
      for (int64_t i = 0; i < h; ++i) {
        for (int64_t j = 0; j < w; ++j) {
          const T A = s.at(b, c, i, j), H = s.at(b, C + c, i, j);
          const T V = s.at(b, 2 * C + c, i, j), D = s.at(b, 3 * C + c, i, j);
          out.at(b, c, 2 * i, 2 * j) = (A + H + V + D) * half;
          out.at(b, c, 2 * i, 2 * j + 1) = (A - H + V - D) * half;
          out.at(b, c, 2 * i + 1, 2 * j) = (A + H - V - D) * half;
          out.at(b, c, 2 * i + 1, 2 * j + 1) = (A - H - V + D) * half;
        }
      }
    }
  }
  return out;
}

template <class T>
Tensor<T> band(const Tensor<T>& stacked, int64_t k) {
  const int64_t B = stacked.dim(0), C = stacked.dim(1) / 4, h = stacked.dim(2), w = stacked.dim(3);
  Tensor<T> out(Shape{B, C, h, w});
  for (int64_t b = 0; b < B; ++b) {
    std::copy_n(&stacked.at(b, k * C, 0, 0), C * h * w, &out.at(b, 0, 0, 0));
  }
  return out;
}

}  // namespace

template <class T>
HaarBands<T> dwt2_haar(const Tensor<T>& x) {
  Tensor<T> s = forward_stacked(x);
  return HaarBands<T>{band(s, 0), band(s, 1), band(s, 2), band(s, 3)};
}

template <class T>
Tensor<T> idwt2_haar(const HaarBands<T>& bands) {
  const Shape& s = bands.cA.shape();
  if (bands.cH.shape() != s || bands.cV.shape() != s || bands.cD.shape() != s) {
    throw ShapeError("idwt2_haar: band shapes differ");
  }
  const int64_t B = s[0], C = s[1], h = s[2], w = s[3];
  Tensor<T> stacked(Shape{B, 4 * C, h, w});
  const Tensor<T>* parts[4] = {&bands.cA, &bands.cH, &bands.cV, &bands.cD};
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t k = 0; k < 4; ++k) {
      std::copy_n(&parts[k]->at(b, 0, 0, 0), C * h * w, &stacked.at(b, k * C, 0, 0));
    }
  }
  return inverse_stacked(stacked);
}

namespace ops {

// The transform is orthogonal and symmetric per block, so each backward is the other direction.
template <class T>
Var<T> dwt2_haar(const Var<T>& x) {
  NodeId idx = x.id();
  return x.tape().record("dwt2_haar", forward_stacked(x.value()), {x}, [idx](Tape<T>& tp, NodeId self) {
    Tensor<T> g = inverse_stacked(tp.grad_buffer(self));
    tp.accumulate(idx, g);
  });
}

template <class T>
Var<T> idwt2_haar(const Var<T>& stacked) {
  NodeId ids = stacked.id();
  return stacked.tape().record("idwt2_haar", inverse_stacked(stacked.value()), {stacked},
                               [ids](Tape<T>& tp, NodeId self) {
                                 Tensor<T> g = forward_stacked(tp.grad_buffer(self));
                                 tp.accumulate(ids, g);
                               });
}

template Var<float> dwt2_haar(const Var<float>&);
template Var<double> dwt2_haar(const Var<double>&);
template Var<float> idwt2_haar(const Var<float>&);
template Var<double> idwt2_haar(const Var<double>&);

}  // namespace ops

template HaarBands<float> dwt2_haar(const Tensor<float>&);
template HaarBands<double> dwt2_haar(const Tensor<double>&);
template Tensor<float> idwt2_haar(const HaarBands<float>&);
template Tensor<double> idwt2_haar(const HaarBands<double>&);

}  // namespace lalnet
