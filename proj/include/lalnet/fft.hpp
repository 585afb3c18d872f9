#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "lalnet/tape.hpp"

namespace lalnet {

template <class T>
struct ComplexPlane {
  Tensor<T> real;
  Tensor<T> imag;
};

bool is_pow2(int64_t n);
int64_t next_pow2(int64_t n);

/// In-place iterative radix-2 FFT; unnormalized in both directions.
template <class T>
void fft1d(std::complex<T>* data, int64_t n, bool inverse, int64_t stride = 1);

/// Unnormalized forward 2D DFT over the last two axes of x (shape [..., H, W]).
/// H and W must be powers of two.
template <class T>
ComplexPlane<T> fft2(const Tensor<T>& x);
/// Inverse 2D DFT over the last two axes, scaled by 1/(H*W).
template <class T>
ComplexPlane<T> ifft2(const ComplexPlane<T>& s);

struct PadOffsets {
  int64_t top = 0, left = 0, height = 0, width = 0;  // placement of the original image
};

/// Half-sample symmetric padding of the last two axes up to powers of two,
/// centred on the original; the offsets allow the caller to crop back.
template <class T>
Tensor<T> pad_symmetric_pow2(const Tensor<T>& x, PadOffsets* offsets = nullptr);
/// Half-sample symmetric padding of the last two axes to an explicit size.
template <class T>
Tensor<T> pad_symmetric(const Tensor<T>& x, int64_t height, int64_t width, PadOffsets* offsets = nullptr);
/// Crop of the last two axes.
template <class T>
Tensor<T> crop2d(const Tensor<T>& x, int64_t top, int64_t left, int64_t height, int64_t width);

namespace ops {
/// Real and imaginary parts of fft2(x) as two taped values.
template <class T>
std::pair<Var<T>, Var<T>> fft2(const Var<T>& x);
/// Real part of ifft2(re + j*im).
template <class T>
Var<T> ifft2_real(const Var<T>& re, const Var<T>& im);
}  // namespace ops

}  // namespace lalnet
