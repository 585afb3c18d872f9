#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "lalnet/conv.hpp"
#include "lalnet/fft.hpp"
#include "lalnet/grad_suite.hpp"
#include "lalnet/gradcheck.hpp"
#include "lalnet/ops.hpp"
#include "lalnet/resample.hpp"
#include "lalnet/scan.hpp"
#include "lalnet/wavelet.hpp"
#include "test_util.hpp"

namespace lalnet {
namespace {

using test::random_tensor;
using Vs = std::vector<Var<double>>;

TEST(Tensor, ShapeAndReshape) {
  Tensor<double> t({2, 3, 4});
  EXPECT_EQ(t.size(), 24);
  EXPECT_EQ(t.dim(-1), 4);
  EXPECT_EQ(t.reshaped({6, 4}).shape(), (Shape{6, 4}));
  EXPECT_THROW(t.reshaped({5, 5}), ShapeError);
  EXPECT_THROW(Tensor<double>({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Ops, BroadcastAddGradientSumsOverBroadcastAxes) {
  Tape<double> tape;
  auto a = tape.parameter(Tensor<double>({2, 3, 1, 1}, 1.0));
  auto b = tape.parameter(Tensor<double>({1, 3, 4, 5}, 2.0));
  auto y = ops::sum(ops::add(a, b));
  EXPECT_DOUBLE_EQ(y.value().item(), 2 * 3 * 4 * 5 * 3.0);
  tape.backward(y);
  const auto ga = a.grad(), gb = b.grad();
  for (double g : ga.data()) EXPECT_DOUBLE_EQ(g, 20.0);
  for (double g : gb.data()) EXPECT_DOUBLE_EQ(g, 2.0);
}

TEST(Ops, SquareBackwardIsTwiceInput) {
  std::mt19937_64 rng(1);
  Tape<double> tape;
  const auto x0 = random_tensor({7}, rng);
  auto x = tape.parameter(x0);
  tape.backward(ops::sum(ops::mul(x, x)));
  for (int64_t i = 0; i < 7; ++i) EXPECT_NEAR(x.grad()[i], 2 * x0[i], 1e-15);
}

TEST(Ops, SoftmaxRowsMatchDirectFormula) {
  std::mt19937_64 rng(2);
  Tape<double> tape;
  const auto x0 = random_tensor({3, 5}, rng, -4, 4);
  const auto y = ops::softmax(tape.constant(x0)).value();
  for (int r = 0; r < 3; ++r) {
    double z = 0, sum = 0;
    for (int c = 0; c < 5; ++c) z += std::exp(x0[r * 5 + c]);
    for (int c = 0; c < 5; ++c) {
      EXPECT_NEAR(y[r * 5 + c], std::exp(x0[r * 5 + c]) / z, 1e-14);
      sum += y[r * 5 + c];
    }
    EXPECT_NEAR(sum, 1.0, 1e-14);
  }
}

TEST(Ops, LayerNormMatchesDirectFormula) {
  std::mt19937_64 rng(3);
  Tape<double> tape;
  const auto x0 = random_tensor({2, 4, 3, 3}, rng);
  const auto g0 = random_tensor({4}, rng), b0 = random_tensor({4}, rng);
  const auto y = ops::layer_norm_channels(tape.constant(x0), tape.constant(g0), tape.constant(b0)).value();
  for (int64_t b = 0; b < 2; ++b) {
    for (int64_t i = 0; i < 3; ++i) {
      for (int64_t j = 0; j < 3; ++j) {
        double mu = 0, var = 0;
        for (int64_t c = 0; c < 4; ++c) mu += x0.at(b, c, i, j) / 4;
        for (int64_t c = 0; c < 4; ++c) var += (x0.at(b, c, i, j) - mu) * (x0.at(b, c, i, j) - mu) / 4;
        for (int64_t c = 0; c < 4; ++c) {
          const double want = (x0.at(b, c, i, j) - mu) / std::sqrt(var + 1e-6) * g0[c] + b0[c];
          EXPECT_NEAR(y.at(b, c, i, j), want, 1e-12);
        }
      }
    }
  }
}

TEST(Ops, MatmulMatchesTripleLoop) {
  std::mt19937_64 rng(4);
  Tape<double> tape;
  const auto a = random_tensor({2, 3, 4}, rng), b = random_tensor({2, 5, 4}, rng);
  const auto y = ops::matmul(tape.constant(a), tape.constant(b), false, true).value();
  ASSERT_EQ(y.shape(), (Shape{2, 3, 5}));
  for (int g = 0; g < 2; ++g)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 5; ++j) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += a[(g * 3 + i) * 4 + k] * b[(g * 5 + j) * 4 + k];
        EXPECT_NEAR(y[(g * 3 + i) * 5 + j], s, 1e-14);
      }
}

// Direct nested-loop convolution with explicit padding.
Tensor<double> conv_oracle(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>* bias,
                           const Conv2dOptions& opt) {
  const int64_t B = x.dim(0), H = x.dim(2), W = x.dim(3);
  const int64_t Cout = w.dim(0), cin_g = w.dim(1), k = w.dim(2);
  const int64_t pad = opt.padding == Padding::valid ? 0 : k / 2;
  const int64_t Hout = (H + 2 * pad - k) / opt.stride + 1, Wout = (W + 2 * pad - k) / opt.stride + 1;
  const int64_t cout_g = Cout / opt.groups;
  auto sample = [&](int64_t b, int64_t c, int64_t i, int64_t j) -> double {
    if (opt.padding == Padding::reflect) {
      if (i < 0) i = -i;
      if (i >= H) i = 2 * (H - 1) - i;
      if (j < 0) j = -j;
      if (j >= W) j = 2 * (W - 1) - j;
    } else if (i < 0 || i >= H || j < 0 || j >= W) {
      return 0.0;
    }
    return x.at(b, c, i, j);
  };
  Tensor<double> out({B, Cout, Hout, Wout});
  for (int64_t b = 0; b < B; ++b)
    for (int64_t o = 0; o < Cout; ++o) {
      const int64_t g = o / cout_g;
      for (int64_t i = 0; i < Hout; ++i)
        for (int64_t j = 0; j < Wout; ++j) {
          double s = bias ? (*bias)[o] : 0.0;
          for (int64_t ci = 0; ci < cin_g; ++ci)
            for (int64_t di = 0; di < k; ++di)
              for (int64_t dj = 0; dj < k; ++dj)
                s += w.at(o, ci, di, dj) *
                     sample(b, g * cin_g + ci, i * opt.stride + di - pad, j * opt.stride + dj - pad);
          out.at(b, o, i, j) = s;
        }
    }
  return out;
}

TEST(Conv, MatchesNestedLoopOracle) {
  std::mt19937_64 rng(5);
  struct Case {
    Conv2dOptions opt;
    int64_t cin, cout, k;
  };
  const Case cases[] = {{{1, 1, Padding::reflect}, 3, 4, 3}, {{1, 1, Padding::zero}, 2, 3, 3},
                        {{1, 1, Padding::valid}, 3, 2, 3}, {{3, 1, Padding::reflect}, 6, 9, 3},
                        {{1, 2, Padding::reflect}, 2, 2, 3}, {{2, 1, Padding::reflect}, 4, 4, 1}};
  for (const auto& c : cases) {
    const auto x = random_tensor({2, c.cin, 5, 6}, rng);
    const auto w = random_tensor({c.cout, c.cin / c.opt.groups, c.k, c.k}, rng);
    const auto bias = random_tensor({c.cout}, rng);
    const auto got = conv2d_forward(x, w, &bias, c.opt);
    const auto want = conv_oracle(x, w, &bias, c.opt);
    ASSERT_EQ(got.shape(), want.shape());
    EXPECT_LT(max_abs_diff(got, want), 1e-13);
  }
}

TEST(Conv, ReflectIndexMirrorsWithoutRepeatingEdge) {
  EXPECT_EQ(reflect_index(-1, 5), 1);
  EXPECT_EQ(reflect_index(-2, 5), 2);
  EXPECT_EQ(reflect_index(5, 5), 3);
  EXPECT_EQ(reflect_index(6, 5), 2);
  EXPECT_EQ(reflect_index(3, 1), 0);
}

TEST(Conv, RejectsMismatchedGroups) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({1, 4, 3, 3}));
  auto w = tape.constant(Tensor<double>({3, 2, 3, 3}));
  EXPECT_THROW(ops::conv2d<double>(x, w, std::nullopt, {3, 1, Padding::reflect}), ShapeError);
}

TEST(Conv, GroupedJacobianHasNoCrossGroupEntries) {
  std::mt19937_64 rng(6);
  const auto x0 = random_tensor({1, 6, 4, 4}, rng);
  const auto w0 = random_tensor({6, 2, 3, 3}, rng);
  for (int g = 0; g < 3; ++g) {
    Tape<double> tape;
    auto x = tape.parameter(x0);
    auto y = ops::conv2d<double>(x, tape.constant(w0), std::nullopt, {3, 1, Padding::reflect});
    Tensor<double> seed(y.shape());
    for (int64_t c = 2 * g; c < 2 * g + 2; ++c)
      for (int64_t i = 0; i < 16; ++i) seed[c * 16 + i] = 1.0 + static_cast<double>(i);
    tape.backward(y, seed);
    const auto gx = x.grad();
    for (int64_t c = 0; c < 6; ++c)
      for (int64_t i = 0; i < 16; ++i) {
        if (c / 2 != g) {
          EXPECT_EQ(gx[c * 16 + i], 0.0);
        }
      }
  }
}

TEST(Fft, MatchesNaiveDft) {
  std::mt19937_64 rng(7);
  const int64_t H = 4, W = 8;
  const auto x = random_tensor({2, H, W}, rng);
  const auto s = fft2(x);
  for (int64_t b = 0; b < 2; ++b)
    for (int64_t u = 0; u < H; ++u)
      for (int64_t v = 0; v < W; ++v) {
        std::complex<double> acc = 0;
        for (int64_t i = 0; i < H; ++i)
          for (int64_t j = 0; j < W; ++j) {
            const double ang = -2 * std::numbers::pi * (double(u * i) / H + double(v * j) / W);
            acc += x[(b * H + i) * W + j] * std::polar(1.0, ang);
          }
        const int64_t k = (b * H + u) * W + v;
        EXPECT_NEAR(s.real[k], acc.real(), 1e-12);
        EXPECT_NEAR(s.imag[k], acc.imag(), 1e-12);
      }
}

TEST(Fft, RoundTripAndParseval) {
  std::mt19937_64 rng(8);
  const auto x = random_tensor({3, 16, 8}, rng);
  const auto s = fft2(x);
  const auto back = ifft2(s);
  EXPECT_LT(max_abs_diff(back.real, x), 1e-12);
  double ex = 0, es = 0;
  for (double v : x.data()) ex += v * v;
  for (int64_t i = 0; i < s.real.size(); ++i) es += s.real[i] * s.real[i] + s.imag[i] * s.imag[i];
  EXPECT_NEAR(es / (16 * 8), ex, 1e-10 * ex);
}

TEST(Fft, RejectsNonPowerOfTwo) {
  EXPECT_THROW(fft2(Tensor<double>({6, 8})), ShapeError);
  EXPECT_TRUE(is_pow2(1));
  EXPECT_FALSE(is_pow2(12));
  EXPECT_EQ(next_pow2(9), 16);
}

TEST(Fft, SymmetricPadCropsBack) {
  std::mt19937_64 rng(9);
  const auto x = random_tensor({2, 5, 7}, rng);
  PadOffsets off;
  const auto p = pad_symmetric_pow2(x, &off);
  EXPECT_EQ(p.shape(), (Shape{2, 8, 8}));
  EXPECT_EQ(crop2d(p, off.top, off.left, 5, 7), x);
}

TEST(Haar, BlockFormulaRoundTripAndEnergy) {
  std::mt19937_64 rng(10);
  const auto x = random_tensor({1, 2, 4, 6}, rng);
  const auto bands = dwt2_haar(x);
  const double a = x.at(0, 1, 2, 4), b = x.at(0, 1, 2, 5), c = x.at(0, 1, 3, 4), d = x.at(0, 1, 3, 5);
  EXPECT_NEAR(bands.cA.at(0, 1, 1, 2), (a + b + c + d) / 2, 1e-15);
  EXPECT_NEAR(bands.cH.at(0, 1, 1, 2), (a - b + c - d) / 2, 1e-15);
  EXPECT_NEAR(bands.cV.at(0, 1, 1, 2), (a + b - c - d) / 2, 1e-15);
  EXPECT_NEAR(bands.cD.at(0, 1, 1, 2), (a - b - c + d) / 2, 1e-15);
  EXPECT_LT(max_abs_diff(idwt2_haar(bands), x), 1e-14);
  double ex = 0, eb = 0;
  for (double v : x.data()) ex += v * v;
  for (const auto* t : {&bands.cA, &bands.cH, &bands.cV, &bands.cD})
    for (double v : t->data()) eb += v * v;
  EXPECT_NEAR(eb, ex, 1e-12);
}

TEST(Resample, DownIsBlockMeanUpIsHalfPixelBilinear) {
  Tape<double> tape;
  auto x = tape.constant(Tensor<double>({1, 1, 2, 2}, {1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(ops::downsample2x(x).value().item(), 2.5);
  auto row = tape.constant(Tensor<double>({1, 1, 1, 2}, {0, 4}));
  const auto up = ops::upsample2x(row).value();
  ASSERT_EQ(up.shape(), (Shape{1, 1, 2, 4}));
  const double want[4] = {0, 1, 3, 4};
  for (int r = 0; r < 2; ++r)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(up.at(0, 0, r, j), want[j], 1e-15);
}

TEST(Resample, UpsamplePreservesConstants) {
  Tape<double> tape;
  const auto up = ops::upsample2x(tape.constant(Tensor<double>({1, 2, 3, 5}, 0.7))).value();
  for (double v : up.data()) EXPECT_NEAR(v, 0.7, 1e-15);
}

TEST(Scan, MatchesSequentialRecurrence) {
  std::mt19937_64 rng(11);
  const int64_t B = 2, D = 3, N = 4, L = 7;
  const auto u = random_tensor({B, D, L}, rng), delta = random_tensor({B, D, L}, rng, 0.01, 1.0);
  const auto bm = random_tensor({B, N, L}, rng), cm = random_tensor({B, N, L}, rng);
  const auto a = random_tensor({D, N}, rng, -3, -0.1), skip = random_tensor({D}, rng);
  Tape<double> tape;
  const auto y = ops::selective_scan(tape.constant(u), tape.constant(delta), tape.constant(bm), tape.constant(cm),
                                     tape.constant(a), tape.constant(skip))
                     .value();
  for (int64_t b = 0; b < B; ++b)
    for (int64_t d = 0; d < D; ++d) {
      std::vector<double> h(N, 0.0);
      for (int64_t t = 0; t < L; ++t) {
        const double dt = delta[(b * D + d) * L + t], ut = u[(b * D + d) * L + t];
        double out = skip[d] * ut;
        for (int64_t n = 0; n < N; ++n) {
          h[n] = std::exp(dt * a[d * N + n]) * h[n] + dt * bm[(b * N + n) * L + t] * ut;
          out += cm[(b * N + n) * L + t] * h[n];
        }
        EXPECT_NEAR(y[(b * D + d) * L + t], out, 1e-13);
      }
    }
}

TEST(GradCheck, LinearOpPasses) {
  std::mt19937_64 rng(12);
  const auto r = grad_check([](Tape<double>&, const Vs& v) { return ops::scale(ops::add(v[0], v[1]), 3.0); },
                            {random_tensor({4, 5}, rng), random_tensor({4, 5}, rng)});
  EXPECT_LT(r.max_rel_error, 1e-8);
  EXPECT_EQ(r.coords_checked, 40);
}

TEST(GradCheck, DetectsCorruptedBackward) {
  std::mt19937_64 rng(13);
  // y = x^2 with a backward that returns x instead of 2x
  auto broken = [](Tape<double>& tape, const Vs& v) {
    Tensor<double> y = v[0].value();
    for (auto& e : y.data()) e = e * e;
    const auto id = v[0].id();
    return tape.record("broken_square", y, {v[0]}, [id](Tape<double>& t, NodeId self) {
      Tensor<double> g = t.grad(self);
      const auto& x = t.value(id);
      for (int64_t i = 0; i < g.size(); ++i) g[i] *= x[i];
      t.accumulate(id, g);
    });
  };
  const auto r = grad_check(broken, {random_tensor({6}, rng, 0.5, 1.5)});
  EXPECT_GT(r.max_rel_error, 0.3);
  EXPECT_FALSE(r.worst.empty());
}

TEST(GradCheck, EveryRegisteredOpPasses) {
  for (const auto& r : run_gradient_suite("op")) {
    EXPECT_LT(r.check.max_rel_error, 1e-4) << r.name << ": " << r.check.worst;
  }
}

TEST(GradCheck, UnknownCaseIsRejected) { EXPECT_THROW(run_gradient_suite("no_such_case"), std::invalid_argument); }

}  // namespace
}  // namespace lalnet
