#include "lalnet/fft.hpp"

#include <cmath>
#include <numbers>

namespace lalnet {

bool is_pow2(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

int64_t next_pow2(int64_t n) {
  int64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

template <class T>
void fft1d(std::complex<T>* data, int64_t n, bool inverse, int64_t stride) {
  if (!is_pow2(n)) throw ShapeError("fft: length " + std::to_string(n) + " is not a power of two");
  auto at = [&](int64_t i) -> std::complex<T>& { return data[i * stride]; };
  for (int64_t i = 1, j = 0; i < n; ++i) {
    int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(at(i), at(j));
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (int64_t len = 2; len <= n; len <<= 1) {
    const int64_t half = len / 2;
    for (int64_t k = 0; k < half; ++k) {
      // twiddles evaluated in double so the f32 path does not drift with length
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const std::complex<T> w(static_cast<T>(std::cos(ang)), static_cast<T>(std::sin(ang)));
      for (int64_t i = 0; i < n; i += len) {
        std::complex<T> u = at(i + k);
        std::complex<T> v = at(i + k + half) * w;
        at(i + k) = u + v;
        at(i + k + half) = u - v;
      }
    }
  }
}

namespace {

template <class T>
void check_plane_shape(const Shape& s) {
  if (s.size() < 2) throw ShapeError("fft2: need at least 2 dimensions, got " + shape_str(s));
  const int64_t H = s[s.size() - 2], W = s[s.size() - 1];
  if (!is_pow2(H)) throw ShapeError("fft2: height (dim -2) = " + std::to_string(H) + " is not a power of two");
  if (!is_pow2(W)) throw ShapeError("fft2: width (dim -1) = " + std::to_string(W) + " is not a power of two");
}

// 2D transform of every trailing [H,W] plane of a complex buffer.
template <class T>
void fft2_inplace(std::vector<std::complex<T>>& buf, const Shape& s, bool inverse) {
  const int64_t H = s[s.size() - 2], W = s[s.size() - 1];
  const int64_t planes = numel(s) / (H * W);
  for (int64_t p = 0; p < planes; ++p) {
    std::complex<T>* base = buf.data() + p * H * W;
    for (int64_t y = 0; y < H; ++y) fft1d(base + y * W, W, inverse, 1);
    for (int64_t x = 0; x < W; ++x) fft1d(base + x, H, inverse, W);
  }
}

template <class T>
std::vector<std::complex<T>> forward_of_real(const Tensor<T>& x) {
  check_plane_shape<T>(x.shape());
  std::vector<std::complex<T>> buf(static_cast<size_t>(x.size()));
  for (int64_t i = 0; i < x.size(); ++i) buf[i] = std::complex<T>(x[i], T(0));
  fft2_inplace(buf, x.shape(), false);
  return buf;
}

int64_t sym_index(int64_t i, int64_t n) {
  const int64_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

template <class T>
ComplexPlane<T> fft2(const Tensor<T>& x) {
  auto buf = forward_of_real(x);
  ComplexPlane<T> out{Tensor<T>(x.shape()), Tensor<T>(x.shape())};
  for (int64_t i = 0; i < x.size(); ++i) {
    out.real[i] = buf[i].real();
    out.imag[i] = buf[i].imag();
  }
  return out;
}

template <class T>
ComplexPlane<T> ifft2(const ComplexPlane<T>& s) {
  if (s.real.shape() != s.imag.shape()) {
    throw ShapeError("ifft2: real " + shape_str(s.real.shape()) + " vs imag " + shape_str(s.imag.shape()));
  }
  check_plane_shape<T>(s.real.shape());
  const Shape& sh = s.real.shape();
  std::vector<std::complex<T>> buf(static_cast<size_t>(s.real.size()));
  for (int64_t i = 0; i < s.real.size(); ++i) buf[i] = std::complex<T>(s.real[i], s.imag[i]);
  fft2_inplace(buf, sh, true);
  const T inv = T(1) / static_cast<T>(sh[sh.size() - 2] * sh[sh.size() - 1]);
  ComplexPlane<T> out{Tensor<T>(sh), Tensor<T>(sh)};
  for (int64_t i = 0; i < s.real.size(); ++i) {
    out.real[i] = buf[i].real() * inv;
    out.imag[i] = buf[i].imag() * inv;
  }
  return out;
}

template <class T>
Tensor<T> pad_symmetric(const Tensor<T>& x, int64_t height, int64_t width, PadOffsets* offsets) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("pad_symmetric: need at least 2 dimensions");
  const int64_t H = s[s.size() - 2], W = s[s.size() - 1];
  if (height < H || width < W) throw ShapeError("pad_symmetric: target smaller than input");
  const int64_t top = (height - H) / 2, left = (width - W) / 2;
  Shape os = s;
  os[os.size() - 2] = height;
  os[os.size() - 1] = width;
  Tensor<T> out(os);
  const int64_t planes = numel(s) / (H * W);
  for (int64_t p = 0; p < planes; ++p) {
    for (int64_t y = 0; y < height; ++y) {
      const int64_t sy = sym_index(y - top, H);
      for (int64_t x0 = 0; x0 < width; ++x0) {
        out[(p * height + y) * width + x0] = x[(p * H + sy) * W + sym_index(x0 - left, W)];
      }
    }
  }
  if (offsets) *offsets = PadOffsets{top, left, H, W};
  return out;
}

template <class T>
Tensor<T> pad_symmetric_pow2(const Tensor<T>& x, PadOffsets* offsets) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("pad_symmetric_pow2: need at least 2 dimensions");
  return pad_symmetric(x, next_pow2(s[s.size() - 2]), next_pow2(s[s.size() - 1]), offsets);
}

template <class T>
Tensor<T> crop2d(const Tensor<T>& x, int64_t top, int64_t left, int64_t height, int64_t width) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("crop2d: need at least 2 dimensions");
  const int64_t H = s[s.size() - 2], W = s[s.size() - 1];
  if (top < 0 || left < 0 || top + height > H || left + width > W) {
    throw ShapeError("crop2d: window exceeds extent " + shape_str(s));
  }
  Shape os = s;
  os[os.size() - 2] = height;
  os[os.size() - 1] = width;
  Tensor<T> out(os);
  const int64_t planes = numel(s) / (H * W);
  for (int64_t p = 0; p < planes; ++p) {
    for (int64_t y = 0; y < height; ++y) {
      for (int64_t x0 = 0; x0 < width; ++x0) {
        out[(p * height + y) * width + x0] = x[(p * H + top + y) * W + left + x0];
      }
    }
  }
  return out;
}

namespace ops {

template <class T>
std::pair<Var<T>, Var<T>> fft2(const Var<T>& x) {
  auto buf = forward_of_real(x.value());
  Tensor<T> re(x.shape()), im(x.shape());
  for (int64_t i = 0; i < re.size(); ++i) {
    re[i] = buf[i].real();
    im[i] = buf[i].imag();
  }
  NodeId idx = x.id();
  // The 2D DFT matrix is symmetric, so each part's vector-Jacobian product is
  // the matching part of the forward transform of the incoming gradient.
  auto vre = x.tape().record("fft2_real", std::move(re), {x}, [idx](Tape<T>& tp, NodeId self) {
    auto gf = forward_of_real(tp.grad_buffer(self));
    auto& gx = tp.grad_buffer(idx);
    for (int64_t i = 0; i < gx.size(); ++i) gx[i] += gf[i].real();
  });
  auto vim = x.tape().record("fft2_imag", std::move(im), {x}, [idx](Tape<T>& tp, NodeId self) {
    auto gf = forward_of_real(tp.grad_buffer(self));
    auto& gx = tp.grad_buffer(idx);
    for (int64_t i = 0; i < gx.size(); ++i) gx[i] += gf[i].imag();
  });
  return {vre, vim};
}

template <class T>
Var<T> ifft2_real(const Var<T>& re, const Var<T>& im) {
  auto planes = lalnet::ifft2(ComplexPlane<T>{re.value(), im.value()});
  const Shape& s = re.shape();
  const T inv = T(1) / static_cast<T>(s[s.size() - 2] * s[s.size() - 1]);
  NodeId idr = re.id(), idi = im.id();
  return re.tape().record("ifft2_real", std::move(planes.real), {re, im}, [idr, idi, inv](Tape<T>& tp, NodeId self) {
    auto gf = forward_of_real(tp.grad_buffer(self));
    if (tp.requires_grad(idr)) {
      auto& gr = tp.grad_buffer(idr);
      for (int64_t i = 0; i < gr.size(); ++i) gr[i] += gf[i].real() * inv;
    }
    if (tp.requires_grad(idi)) {
      auto& gi = tp.grad_buffer(idi);
      for (int64_t i = 0; i < gi.size(); ++i) gi[i] += gf[i].imag() * inv;
    }
  });
}

template std::pair<Var<float>, Var<float>> fft2(const Var<float>&);
template std::pair<Var<double>, Var<double>> fft2(const Var<double>&);
template Var<float> ifft2_real(const Var<float>&, const Var<float>&);
template Var<double> ifft2_real(const Var<double>&, const Var<double>&);

}  // namespace ops

#define LALNET_INSTANTIATE_FFT(T)                                                              \
  template void fft1d(std::complex<T>*, int64_t, bool, int64_t);                              \
  template ComplexPlane<T> fft2(const Tensor<T>&);                                            \
  template ComplexPlane<T> ifft2(const ComplexPlane<T>&);                                     \
  template Tensor<T> pad_symmetric(const Tensor<T>&, int64_t, int64_t, PadOffsets*);          \
  template Tensor<T> pad_symmetric_pow2(const Tensor<T>&, PadOffsets*);                       \
  template Tensor<T> crop2d(const Tensor<T>&, int64_t, int64_t, int64_t, int64_t);

LALNET_INSTANTIATE_FFT(float)
LALNET_INSTANTIATE_FFT(double)

}  // namespace lalnet
