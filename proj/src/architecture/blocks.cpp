#include "lalnet/blocks.hpp"

#include <algorithm>
#include <cmath>

#include "lalnet/conv.hpp"
#include "lalnet/fft.hpp"
#include "lalnet/ops.hpp"
#include "lalnet/resample.hpp"
#include "lalnet/scan.hpp"
#include "lalnet/wavelet.hpp"

namespace lalnet::arch {

namespace {

ParamSpec& find_spec(Specs& s, const std::string& name) {
  for (auto& spec : s) {
    if (spec.name == name) return spec;
  }
  throw ConfigError("no parameter spec named " + name);
}

// Turns a conv's weight and bias into constants (used for zero-initialised tails).
void make_constant(Specs& s, const std::string& conv_name, double weight, double bias) {
  auto& w = find_spec(s, conv_name + ".weight");
  w.init = InitKind::constant;
  w.value = weight;
  auto& b = find_spec(s, conv_name + ".bias");
  b.init = InitKind::constant;
  b.value = bias;
}

void affine_specs(Specs& s, const std::string& prefix, int64_t channels) {
  s.push_back({prefix + ".gamma", {channels}, InitKind::constant, 1.0});
  s.push_back({prefix + ".beta", {channels}, InitKind::constant, 0.0});
}

template <class T>
Var<T> norm(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  return ops::layer_norm_channels(x, p(prefix + ".gamma"), p(prefix + ".beta"));
}

}  // namespace

void conv_specs(Specs& s, const std::string& name, int64_t cout, int64_t cin, int64_t k, int64_t groups, bool bias) {
  const int64_t cin_g = cin / groups;
  s.push_back({name + ".weight", {cout, cin_g, k, k}, InitKind::fan_in_uniform, 0.0, cin_g * k * k});
  if (bias) s.push_back({name + ".bias", {cout}, InitKind::constant, 0.0});
}

template <class T>
Var<T> conv(ParamBinding<T>& p, const std::string& name, const Var<T>& x, int64_t groups, bool bias) {
  std::optional<Var<T>> b;
  if (bias) b = p(name + ".bias");
  return ops::conv2d(x, p(name + ".weight"), b, Conv2dOptions{groups, 1, Padding::reflect});
}

void resblock_specs(Specs& s, const std::string& prefix, int64_t channels) {
  conv_specs(s, prefix + ".conv1", channels, channels, 3);
  conv_specs(s, prefix + ".conv2", channels, channels, 3);
}

template <class T>
Var<T> resblock(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  return ops::add(x, conv(p, prefix + ".conv2", ops::silu(conv(p, prefix + ".conv1", x))));
}

void cab_specs(Specs& s, const std::string& prefix, int64_t channels, int64_t hidden) {
  conv_specs(s, prefix + ".squeeze", hidden, channels, 1);
  conv_specs(s, prefix + ".expand", channels, hidden, 1);
}

template <class T>
Var<T> cab(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  Var<T> pooled = ops::mean_axes(x, {2, 3});
  Var<T> gate = ops::sigmoid(conv(p, prefix + ".expand", ops::silu(conv(p, prefix + ".squeeze", pooled))));
  return ops::mul(x, gate);
}

void ddcm_specs(Specs& s, const std::string& prefix, const ModelConfig& c) {
  conv_specs(s, prefix + ".real", c.base_channels, 3, 3, 3);
  conv_specs(s, prefix + ".imag", c.base_channels, 3, 3, 3);
  cab_specs(s, prefix + ".cab", c.base_channels, c.cab_hidden());
}

template <class T>
Var<T> ddcm_pre_cab(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  if (x.shape().size() != 4 || x.dim(1) != 3) throw ShapeError("ddcm expects [B,3,h,w], got " + shape_str(x.shape()));
  auto [re, im] = ops::fft2(x);
  return ops::ifft2_real(conv(p, prefix + ".real", re, 3), conv(p, prefix + ".imag", im, 3));
}

template <class T>
Var<T> ddcm(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  return cab(p, prefix + ".cab", ddcm_pre_cab(p, prefix, x));
}

void mcm_specs(Specs& s, const std::string& prefix, const ModelConfig& c) {
  conv_specs(s, prefix + ".conv_in", c.base_channels, 3, 3);
  conv_specs(s, prefix + ".conv_out", c.base_channels, 4 * c.base_channels, 3);
}

template <class T>
Var<T> mcm(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  Var<T> bands = ops::dwt2_haar(conv(p, prefix + ".conv_in", x));
  return ops::upsample2x(conv(p, prefix + ".conv_out", bands));
}

void ss2d_specs(Specs& s, const std::string& prefix, int64_t channels, int64_t state_dim) {
  for (int k = 0; k < 4; ++k) {
    const std::string d = prefix + ".dir" + std::to_string(k);
    conv_specs(s, d + ".delta", channels, channels, 1);
    find_spec(s, d + ".delta.bias").init = InitKind::dt_bias;
    conv_specs(s, d + ".b_proj", state_dim, channels, 1, 1, false);
    conv_specs(s, d + ".c_proj", state_dim, channels, 1, 1, false);
    s.push_back({d + ".a_log", {channels, state_dim}, InitKind::a_log});
    s.push_back({d + ".skip", {channels}, InitKind::constant, 1.0});
  }
}

std::vector<int64_t> scan_order(int direction, int64_t height, int64_t width) {
  if (direction < 0 || direction > 3) throw std::invalid_argument("scan direction must be 0..3");
  const int64_t n = height * width;
  std::vector<int64_t> order(static_cast<size_t>(n));
  for (int64_t t = 0; t < n; ++t) {
    if (direction < 2) {
      order[static_cast<size_t>(t)] = t;
    } else {
      const int64_t col = t / height, row = t % height;
      order[static_cast<size_t>(t)] = row * width + col;
    }
  }
  if (direction == 1 || direction == 3) std::reverse(order.begin(), order.end());
  return order;
}

template <class T>
std::array<Var<T>, 4> ss2d_directions(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw ShapeError("ss2d expects [B,D,H,W], got " + shape_str(s));
  const int64_t B = s[0], D = s[1], H = s[2], W = s[3], L = H * W;
  Var<T> flat = ops::reshape(x, {B, D, L});
  std::array<Var<T>, 4> out;
  for (int k = 0; k < 4; ++k) {
    const std::string d = prefix + ".dir" + std::to_string(k);
    const auto order = scan_order(k, H, W);
    std::vector<int64_t> inverse(order.size());
    for (size_t t = 0; t < order.size(); ++t) inverse[static_cast<size_t>(order[t])] = static_cast<int64_t>(t);

    Var<T> seq = k == 0 ? flat : ops::gather_last(flat, order);
    Var<T> seq4 = ops::reshape(seq, {B, D, 1, L});
    Var<T> delta = ops::reshape(ops::softplus(conv(p, d + ".delta", seq4)), {B, D, L});
    const int64_t N = p(d + ".a_log").dim(1);
    Var<T> bmat = ops::reshape(conv(p, d + ".b_proj", seq4, 1, false), {B, N, L});
    Var<T> cmat = ops::reshape(conv(p, d + ".c_proj", seq4, 1, false), {B, N, L});
    Var<T> a = ops::scale(ops::exp(p(d + ".a_log")), T(-1));
    Var<T> y = ops::selective_scan(seq, delta, bmat, cmat, a, p(d + ".skip"));
    if (k != 0) y = ops::gather_last(y, inverse);
    out[static_cast<size_t>(k)] = ops::reshape(y, {B, D, H, W});
  }
  return out;
}

template <class T>
Var<T> ss2d(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x) {
  auto dirs = ss2d_directions(p, prefix, x);
  return ops::add(ops::add(dirs[0], dirs[1]), ops::add(dirs[2], dirs[3]));
}

void lssm_specs(Specs& s, const std::string& prefix, const ModelConfig& c) {
  const int64_t C = c.base_channels;
  if (!c.use_lssm) {
    resblock_specs(s, prefix + ".replace", C);
    return;
  }
  const int64_t E = C * c.expansion;
  conv_specs(s, prefix + ".in_proj", 2 * C, C, 1);
  conv_specs(s, prefix + ".expand", E, C, 1);
  conv_specs(s, prefix + ".dwconv", E, E, 3, E);
  if (c.use_ss2d) {
    ss2d_specs(s, prefix + ".ss2d_main", E, c.state_dim);
  } else {
    resblock_specs(s, prefix + ".res_main", E);
  }
  affine_specs(s, prefix + ".norm_main", E);
  conv_specs(s, prefix + ".proj", C, E, 1);
  if (c.use_ss2d) {
    ss2d_specs(s, prefix + ".ss2d_guide", C, c.state_dim);
  } else {
    resblock_specs(s, prefix + ".res_guide", C);
  }
  affine_specs(s, prefix + ".norm_out", C);
  conv_specs(s, prefix + ".mlp.fc1", C * c.mlp_ratio, C, 1);
  conv_specs(s, prefix + ".mlp.fc2", C, C * c.mlp_ratio, 1);
}

template <class T>
Var<T> lssm_branch(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& f_cm,
                   const Var<T>& f_cs) {
  if (f_cm.shape() != f_cs.shape()) {
    throw ShapeError("lssm: colour-mixed " + shape_str(f_cm.shape()) + " vs colour-separated " +
                     shape_str(f_cs.shape()));
  }
  Var<T> s = ops::add(f_cm, f_cs);
  if (!c.use_lssm) {
    return conv(p, prefix + ".replace.conv2", ops::silu(conv(p, prefix + ".replace.conv1", s)));
  }
  const int64_t C = f_cm.dim(1);
  Var<T> z = conv(p, prefix + ".in_proj", s);
  Var<T> f1 = ops::slice(z, 1, 0, C);
  Var<T> f2 = ops::slice(z, 1, C, C);

  Var<T> e = conv(p, prefix + ".expand", f1);
  e = ops::silu(conv(p, prefix + ".dwconv", e, e.dim(1)));
  e = c.use_ss2d ? ss2d(p, prefix + ".ss2d_main", e) : resblock(p, prefix + ".res_main", e);
  Var<T> s1 = conv(p, prefix + ".proj", norm(p, prefix + ".norm_main", e));
  Var<T> s2 = c.use_ss2d ? ss2d(p, prefix + ".ss2d_guide", f_cs) : resblock(p, prefix + ".res_guide", f_cs);

  Var<T> gated = ops::mul(ops::add(s1, s2), ops::silu(f2));
  Var<T> h = norm(p, prefix + ".norm_out", gated);
  return conv(p, prefix + ".mlp.fc2", ops::silu(conv(p, prefix + ".mlp.fc1", h)));
}

template <class T>
Var<T> lssm(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& f_cm,
            const Var<T>& f_cs) {
  return ops::add(f_cm, lssm_branch(p, prefix, c, f_cm, f_cs));
}

void lga_specs(Specs& s, const std::string& prefix, const ModelConfig& c) {
  const int64_t C = c.base_channels;
  const int64_t qg = c.gconv_separated ? 3 : 1;
  conv_specs(s, prefix + ".kv", 2 * C, C, 1);
  conv_specs(s, prefix + ".kv_dw", 2 * C, 2 * C, 3, 2 * C);
  conv_specs(s, prefix + ".q_gconv", C, C, 3, qg);
  conv_specs(s, prefix + ".q_pw", C, C, 1);
  conv_specs(s, prefix + ".q_dw", C, C, 3, C);
  s.push_back({prefix + ".tau", {c.heads}, InitKind::constant, c.tau_init});
  conv_specs(s, prefix + ".proj", C, C, 1);
}

template <class T>
Var<T> lga(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& f_cm,
           const Var<T>& f_cs, AttentionTrace<T>* trace) {
  if (f_cm.shape() != f_cs.shape()) {
    throw ShapeError("lga: colour-mixed " + shape_str(f_cm.shape()) + " vs colour-separated " +
                     shape_str(f_cs.shape()));
  }
  const Shape& s = f_cm.shape();
  const int64_t B = s[0], C = s[1], H = s[2], W = s[3];
  const int64_t heads = c.heads;
  if (C % heads != 0) {
    throw ConfigError("lga: channels " + std::to_string(C) + " not divisible by heads " + std::to_string(heads));
  }
  const int64_t ch = C / heads, hw = H * W;

  Var<T> kv = conv(p, prefix + ".kv_dw", conv(p, prefix + ".kv", f_cm), 2 * C);
  Var<T> k = ops::slice(kv, 1, 0, C);
  Var<T> v = ops::slice(kv, 1, C, C);
  Var<T> q = conv(p, prefix + ".q_gconv", f_cs, c.gconv_separated ? 3 : 1);
  q = conv(p, prefix + ".q_dw", conv(p, prefix + ".q_pw", q), C);

  const Shape grouped{B * heads, ch, hw};
  Var<T> logits = ops::matmul(ops::reshape(q, grouped), ops::reshape(k, grouped), false, true);
  logits = ops::mul(ops::reshape(logits, {B, heads, ch, ch}), ops::reshape(p(prefix + ".tau"), {1, heads, 1, 1}));
  logits = ops::scale(logits, T(1) / std::sqrt(static_cast<T>(hw)));
  Var<T> attn = ops::softmax(ops::reshape(logits, {B * heads, ch, ch}), -1);
  Var<T> mixed = ops::reshape(ops::matmul(attn, ops::reshape(v, grouped)), {B, C, H, W});
  if (trace) {
    trace->attention = attn;
    trace->mixed = mixed;
  }
  return ops::add(f_cm, conv(p, prefix + ".proj", mixed));
}

void ldp_specs(Specs& s, const std::string& prefix, const ModelConfig& c) {
  for (int l = 0; l < c.pyramid_levels; ++l) {
    const std::string lv = prefix + "." + std::to_string(l);
    conv_specs(s, lv + ".conv1", c.detail_channels, 3, 3);
    conv_specs(s, lv + ".conv2", 3, c.detail_channels, 3);
    make_constant(s, lv + ".conv2", 0.0, 0.0);
  }
}

template <class T>
Pyramid<T> ldp_decompose(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& x) {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != 3) throw ShapeError("ldp expects [B,3,H,W], got " + shape_str(s));
  const int64_t unit = int64_t{1} << c.pyramid_levels;
  if (s[2] % unit != 0 || s[3] % unit != 0) {
    throw ShapeError("ldp: extents " + std::to_string(s[2]) + "x" + std::to_string(s[3]) + " not divisible by 2^" +
                     std::to_string(c.pyramid_levels));
  }
  Pyramid<T> out;
  Var<T> level = x;
  for (int l = 0; l < c.pyramid_levels; ++l) {
    const std::string lv = prefix + "." + std::to_string(l);
    Var<T> down = ops::downsample2x(level);
    Var<T> base = ops::sub(level, ops::upsample2x(down));
    Var<T> refine = conv(p, lv + ".conv2", ops::silu(conv(p, lv + ".conv1", base)));
    out.hf.push_back(ops::add(base, refine));
    level = down;
  }
  out.lf = level;
  return out;
}

void ide_specs(Specs& s, const std::string& prefix, const ModelConfig& c) {
  const int64_t F = c.detail_channels;
  for (int l = 0; l < c.pyramid_levels; ++l) {
    const std::string lv = prefix + "." + std::to_string(l);
    conv_specs(s, lv + ".conv_in", F, 6, 3);
    resblock_specs(s, lv + ".res", F);
    conv_specs(s, lv + ".conv_out", 3, F, 3);
    make_constant(s, lv + ".conv_out", 0.0, 1.0);
  }
}

template <class T>
Var<T> ide_refine(ParamBinding<T>& p, const std::string& prefix, const Var<T>& y_lf, const Pyramid<T>& pyramid,
                  std::vector<Var<T>>* masks) {
  if (y_lf.shape() != pyramid.lf.shape()) {
    throw ShapeError("ide: low-frequency output " + shape_str(y_lf.shape()) + " vs pyramid " +
                     shape_str(pyramid.lf.shape()));
  }
  Var<T> y = y_lf;
  for (int l = static_cast<int>(pyramid.hf.size()) - 1; l >= 0; --l) {
    const std::string lv = prefix + "." + std::to_string(l);
    const Var<T>& hf = pyramid.hf[static_cast<size_t>(l)];
    Var<T> up = ops::upsample2x(y);
    if (up.shape() != hf.shape()) {
      throw ShapeError("ide: level " + std::to_string(l) + " upsampled " + shape_str(up.shape()) + " vs detail " +
                       shape_str(hf.shape()));
    }
    Var<T> h = resblock(p, lv + ".res", conv(p, lv + ".conv_in", ops::concat<T>({up, hf}, 1)));
    Var<T> mask = conv(p, lv + ".conv_out", ops::silu(h));
    if (masks) masks->push_back(mask);
    y = ops::add(up, ops::mul(hf, mask));
  }
  return y;
}

#define LALNET_INSTANTIATE_BLOCKS(T)                                                                              \
  template Var<T> conv(ParamBinding<T>&, const std::string&, const Var<T>&, int64_t, bool);                       \
  template Var<T> resblock(ParamBinding<T>&, const std::string&, const Var<T>&);                                  \
  template Var<T> cab(ParamBinding<T>&, const std::string&, const Var<T>&);                                       \
  template Var<T> ddcm_pre_cab(ParamBinding<T>&, const std::string&, const Var<T>&);                              \
  template Var<T> ddcm(ParamBinding<T>&, const std::string&, const Var<T>&);                                      \
  template Var<T> mcm(ParamBinding<T>&, const std::string&, const Var<T>&);                                       \
  template std::array<Var<T>, 4> ss2d_directions(ParamBinding<T>&, const std::string&, const Var<T>&);            \
  template Var<T> ss2d(ParamBinding<T>&, const std::string&, const Var<T>&);                                      \
  template Var<T> lssm_branch(ParamBinding<T>&, const std::string&, const ModelConfig&, const Var<T>&,            \
                              const Var<T>&);                                                                     \
  template Var<T> lssm(ParamBinding<T>&, const std::string&, const ModelConfig&, const Var<T>&, const Var<T>&);   \
  template Var<T> lga(ParamBinding<T>&, const std::string&, const ModelConfig&, const Var<T>&, const Var<T>&,     \
                      AttentionTrace<T>*);                                                                        \
  template Pyramid<T> ldp_decompose(ParamBinding<T>&, const std::string&, const ModelConfig&, const Var<T>&);     \
  template Var<T> ide_refine(ParamBinding<T>&, const std::string&, const Var<T>&, const Pyramid<T>&,              \
                             std::vector<Var<T>>*);

LALNET_INSTANTIATE_BLOCKS(float)
LALNET_INSTANTIATE_BLOCKS(double)

}  // namespace lalnet::arch
