#include <algorithm>
#include <cmath>

#include "lalnet/conv.hpp"
#include "lalnet/ops.hpp"
#include "lalnet/training.hpp"

namespace lalnet {

namespace {

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

void check_same(const Tensor<float>& a, const Tensor<float>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

template <class T>
Tensor<T> gaussian_window(int64_t channels, int64_t size) {
  const double sigma = 1.5;
  const int64_t r = size / 2;
  std::vector<double> g(static_cast<size_t>(size * size));
  double total = 0;
  for (int64_t i = 0; i < size; ++i) {
    for (int64_t j = 0; j < size; ++j) {
      const double d2 = static_cast<double>((i - r) * (i - r) + (j - r) * (j - r));
      g[static_cast<size_t>(i * size + j)] = std::exp(-d2 / (2 * sigma * sigma));
      total += g[static_cast<size_t>(i * size + j)];
    }
  }
  Tensor<T> w({channels, 1, size, size});
  for (int64_t c = 0; c < channels; ++c) {
    for (int64_t k = 0; k < size * size; ++k) w[c * size * size + k] = static_cast<T>(g[static_cast<size_t>(k)] / total);
  }
  return w;
}

// [C,H,W] or [B,C,H,W] -> [B,C,H,W]
Tensor<double> as_batch(const Tensor<float>& t) {
  Tensor<double> d = t.cast<double>();
  if (t.rank() == 3) return d.reshaped({1, t.dim(0), t.dim(1), t.dim(2)});
  if (t.rank() == 4) return d;
  throw ShapeError("expected [C,H,W] or [B,C,H,W], got " + shape_str(t.shape()));
}

}  // namespace

template <class T>
Var<T> ssim_var(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("ssim: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  if (a.shape().size() != 4) throw ShapeError("ssim expects [B,C,H,W], got " + shape_str(a.shape()));
  const int64_t C = a.dim(1);
  int64_t size = std::min<int64_t>({11, a.dim(2), a.dim(3)});
  if (size % 2 == 0) --size;
  Tape<T>& tape = a.tape();
  Var<T> w = tape.constant(gaussian_window<T>(C, size));
  const Conv2dOptions opt{C, 1, Padding::valid};
  auto blur = [&](const Var<T>& x) { return ops::conv2d<T>(x, w, std::nullopt, opt); };
  Var<T> mu_a = blur(a), mu_b = blur(b);
  Var<T> mu_aa = ops::mul(mu_a, mu_a), mu_bb = ops::mul(mu_b, mu_b), mu_ab = ops::mul(mu_a, mu_b);
  Var<T> var_a = ops::sub(blur(ops::mul(a, a)), mu_aa);
  Var<T> var_b = ops::sub(blur(ops::mul(b, b)), mu_bb);
  Var<T> cov = ops::sub(blur(ops::mul(a, b)), mu_ab);
  Var<T> num = ops::mul(ops::add_scalar(ops::scale(mu_ab, T(2)), T(kSsimC1)),
                        ops::add_scalar(ops::scale(cov, T(2)), T(kSsimC2)));
  Var<T> den = ops::mul(ops::add_scalar(ops::add(mu_aa, mu_bb), T(kSsimC1)),
                        ops::add_scalar(ops::add(var_a, var_b), T(kSsimC2)));
  return ops::mean(ops::div(num, den));
}

double psnr(const Tensor<float>& a, const Tensor<float>& b, double peak) {
  check_same(a, b, "psnr");
  double se = 0;
  for (int64_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.size());
  if (mse < 1e-10) return 100.0;
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor<float>& a, const Tensor<float>& b) {
  check_same(a, b, "ssim");
  Tape<double> tape;
  return ssim_var(tape.constant(as_batch(a)), tape.constant(as_batch(b))).value().item();
}

std::array<double, 3> srgb_to_lab(double r, double g, double b) {
  auto lin = [](double c) { return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4); };
  static const double M[3][3] = {{0.4124564, 0.3575761, 0.1804375},
                                 {0.2126729, 0.7151522, 0.0721750},
                                 {0.0193339, 0.1191920, 0.9503041}};
  const double rgb[3] = {lin(r), lin(g), lin(b)};
  double xyz[3], white[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = M[i][0] * rgb[0] + M[i][1] * rgb[1] + M[i][2] * rgb[2];
    white[i] = M[i][0] + M[i][1] + M[i][2];  // D65 white is the image of RGB (1,1,1)
  }
  constexpr double delta = 6.0 / 29.0;
  auto f = [&](double t) { return t > delta * delta * delta ? std::cbrt(t) : t / (3 * delta * delta) + 4.0 / 29.0; };
  const double fx = f(xyz[0] / white[0]), fy = f(xyz[1] / white[1]), fz = f(xyz[2] / white[2]);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double delta_e(const Tensor<float>& a, const Tensor<float>& b) {
  check_same(a, b, "delta_e");
  const Tensor<double> da = as_batch(a), db = as_batch(b);
  const int64_t B = da.dim(0), H = da.dim(2), W = da.dim(3);
  if (da.dim(1) != 3) throw ShapeError("delta_e expects 3 colour channels, got " + std::to_string(da.dim(1)));
  double total = 0;
  for (int64_t n = 0; n < B; ++n) {
    for (int64_t y = 0; y < H; ++y) {
      for (int64_t x = 0; x < W; ++x) {
        auto la = srgb_to_lab(da.at(n, 0, y, x), da.at(n, 1, y, x), da.at(n, 2, y, x));
        auto lb = srgb_to_lab(db.at(n, 0, y, x), db.at(n, 1, y, x), db.at(n, 2, y, x));
        total += std::sqrt((la[0] - lb[0]) * (la[0] - lb[0]) + (la[1] - lb[1]) * (la[1] - lb[1]) +
                           (la[2] - lb[2]) * (la[2] - lb[2]));
      }
    }
  }
  return total / static_cast<double>(B * H * W);
}

template Var<float> ssim_var(const Var<float>&, const Var<float>&);
template Var<double> ssim_var(const Var<double>&, const Var<double>&);

}  // namespace lalnet
