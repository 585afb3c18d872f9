#pragma once

// Independent reference implementations used by the unit and acceptance tests. They are
// written from the block definitions with plain loops and share no code with the library
// beyond the tensor container and parameter store.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lalnet/config.hpp"
#include "lalnet/params.hpp"

namespace lalnet::oracle {

inline int64_t conv_params(int64_t cout, int64_t cin, int64_t k, int64_t groups = 1, bool bias = true) {
  return cout * (cin / groups) * k * k + (bias ? cout : 0);
}

inline int64_t ss2d_params(int64_t d, int64_t n) {
  // per direction: delta 1x1 conv with bias, B and C projections, A (d x n), skip (d)
  return 4 * (conv_params(d, d, 1) + 2 * n * d + d * n + d);
}

/// Parameter count of the network, summed from the per-block layer list.
inline int64_t param_count(const ModelConfig& c) {
  const int64_t C = c.base_channels, F = c.detail_channels, E = C * c.expansion, N = c.state_dim;
  const int64_t L = c.pyramid_levels;
  int64_t n = 0;
  n += L * (conv_params(F, 3, 3) + conv_params(3, F, 3));  // pyramid refinement
  if (c.use_ddcm) {
    n += 2 * conv_params(C, 3, 3, 3) + conv_params(c.cab_hidden(), C, 1) + conv_params(C, c.cab_hidden(), 1);
  } else {
    n += conv_params(C, 3, 3, 3);
  }
  n += conv_params(C, C, 3, c.gconv_separated ? 3 : 1);
  n += c.use_mcm ? conv_params(C, 3, 3) + conv_params(C, 4 * C, 3) : conv_params(C, 3, 3) + conv_params(C, C, 3);
  for (int b = 0; b < c.lssm_blocks; ++b) {
    if (!c.use_lssm) {
      n += 2 * conv_params(C, C, 3);
      continue;
    }
    n += conv_params(2 * C, C, 1) + conv_params(E, C, 1) + conv_params(E, E, 3, E);
    n += c.use_ss2d ? ss2d_params(E, N) : 2 * conv_params(E, E, 3);
    n += 2 * E + conv_params(C, E, 1);
    n += c.use_ss2d ? ss2d_params(C, N) : 2 * conv_params(C, C, 3);
    n += 2 * C + conv_params(C * c.mlp_ratio, C, 1) + conv_params(C, C * c.mlp_ratio, 1);
  }
  if (c.use_lga) {
    n += conv_params(2 * C, C, 1) + conv_params(2 * C, 2 * C, 3, 2 * C) + conv_params(C, C, 3, c.gconv_separated ? 3 : 1) +
         conv_params(C, C, 1) + conv_params(C, C, 3, C) + c.heads + conv_params(C, C, 1);
  }
  n += conv_params(3, C, 3);                                                                   // head
  n += L * (conv_params(F, 6, 3) + 2 * conv_params(F, F, 3) + conv_params(3, F, 3));        // detail masks
  return n;
}

inline double softplus(double x) { return x > 20 ? x : std::log1p(std::exp(x)); }

/// Sequential four-direction selective scan of x [1,D,H,W] with the parameters stored under
/// `prefix.dir{k}.*`, evaluated one pixel at a time in each direction's visiting order.
inline std::vector<double> ss2d_reference(const ParamStore<double>& p, const std::string& prefix,
                                          const Tensor<double>& x) {
  const int64_t D = x.dim(1), H = x.dim(2), W = x.dim(3);
  std::vector<double> out(static_cast<size_t>(D * H * W), 0.0);
  for (int k = 0; k < 4; ++k) {
    const std::string d = prefix + ".dir" + std::to_string(k);
    const auto& wd = p.at(d + ".delta.weight");
    const auto& bd = p.at(d + ".delta.bias");
    const auto& wb = p.at(d + ".b_proj.weight");
    const auto& wc = p.at(d + ".c_proj.weight");
    const auto& alog = p.at(d + ".a_log");
    const auto& skip = p.at(d + ".skip");
    const int64_t N = alog.dim(1);
    // visiting order: rows then columns for k = 0, 1; columns then rows for k = 2, 3
    std::vector<std::pair<int64_t, int64_t>> order;
    if (k < 2) {
      for (int64_t i = 0; i < H; ++i)
        for (int64_t j = 0; j < W; ++j) order.emplace_back(i, j);
    } else {
      for (int64_t j = 0; j < W; ++j)
        for (int64_t i = 0; i < H; ++i) order.emplace_back(i, j);
    }
    if (k % 2 == 1) std::reverse(order.begin(), order.end());
    std::vector<double> h(static_cast<size_t>(D * N), 0.0);
    for (const auto& [i, j] : order) {
      std::vector<double> u(static_cast<size_t>(D));
      for (int64_t c = 0; c < D; ++c) u[c] = x.at(0, c, i, j);
      std::vector<double> bvec(N, 0.0), cvec(N, 0.0);
      for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < D; ++c) {
          bvec[n] += wb[n * D + c] * u[c];
          cvec[n] += wc[n * D + c] * u[c];
        }
      for (int64_t c = 0; c < D; ++c) {
        double pre = bd[c];
        for (int64_t e = 0; e < D; ++e) pre += wd[c * D + e] * u[e];
        const double dt = softplus(pre);
        double y = skip[c] * u[c];
        for (int64_t n = 0; n < N; ++n) {
          const double a = -std::exp(alog[c * N + n]);
          double& state = h[static_cast<size_t>(c * N + n)];
          state = std::exp(dt * a) * state + dt * bvec[n] * u[c];
          y += cvec[n] * state;
        }
        out[static_cast<size_t>((c * H + i) * W + j)] += y;
      }
    }
  }
  return out;
}

/// Mean SSIM of two [C,H,W] images with an 11x11 (or smaller odd) Gaussian window of
/// sigma 1.5, K1 0.01, K2 0.03, over valid window positions, averaged over channels.
inline double ssim_reference(const Tensor<float>& a, const Tensor<float>& b) {
  const int64_t C = a.dim(0), H = a.dim(1), W = a.dim(2);
  int64_t k = std::min<int64_t>({11, H, W});
  if (k % 2 == 0) --k;
  std::vector<double> g(static_cast<size_t>(k * k));
  double norm = 0;
  for (int64_t i = 0; i < k; ++i)
    for (int64_t j = 0; j < k; ++j) {
      const double di = static_cast<double>(i - k / 2), dj = static_cast<double>(j - k / 2);
      norm += g[static_cast<size_t>(i * k + j)] = std::exp(-(di * di + dj * dj) / 4.5);
    }
  for (auto& v : g) v /= norm;
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0;
  int64_t count = 0;
  for (int64_t c = 0; c < C; ++c)
    for (int64_t y = 0; y + k <= H; ++y)
      for (int64_t x = 0; x + k <= W; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int64_t i = 0; i < k; ++i)
          for (int64_t j = 0; j < k; ++j) {
            const double w = g[static_cast<size_t>(i * k + j)];
            const double va = a[(c * H + y + i) * W + x + j], vb = b[(c * H + y + i) * W + x + j];
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        total += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
  return total / static_cast<double>(count);
}

/// sRGB in [0,1] to CIE L*a*b* with the tabulated D65 white point.
inline std::array<double, 3> srgb_to_lab_reference(double r, double g, double b) {
  auto lin = [](double v) { return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4); };
  const double R = lin(r), G = lin(g), B = lin(b);
  const double X = 0.4124564 * R + 0.3575761 * G + 0.1804375 * B;
  const double Y = 0.2126729 * R + 0.7151522 * G + 0.0721750 * B;
  const double Z = 0.0193339 * R + 0.1191920 * G + 0.9503041 * B;
  auto f = [](double t) { return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0; };
  const double fx = f(X / 0.95047), fy = f(Y / 1.0), fz = f(Z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

}  // namespace lalnet::oracle
