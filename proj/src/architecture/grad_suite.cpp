#include "lalnet/grad_suite.hpp"

#include <chrono>
#include <memory>
#include <random>
#include <stdexcept>

#include "lalnet/blocks.hpp"
#include "lalnet/conv.hpp"
#include "lalnet/fft.hpp"
#include "lalnet/model.hpp"
#include "lalnet/ops.hpp"
#include "lalnet/resample.hpp"
#include "lalnet/scan.hpp"
#include "lalnet/training.hpp"
#include "lalnet/wavelet.hpp"

namespace lalnet {

namespace {

using V = Var<double>;
using Vs = std::vector<V>;
using T = Tensor<double>;

class Gen {
 public:
  explicit Gen(uint64_t seed) : rng_(seed) {}

  T uniform(Shape shape, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    T t(std::move(shape));
    for (auto& v : t.data()) v = d(rng_);
    return t;
  }
  // Values bounded away from zero, for ops with a kink or pole at 0.
  T away_from_zero(Shape shape, double lo, double hi) {
    T t = uniform(std::move(shape), lo, hi);
    std::bernoulli_distribution flip(0.5);
    for (auto& v : t.data()) v = flip(rng_) ? -v : v;
    return t;
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

V flat(const V& v) { return ops::reshape(v, Shape{v.value().size()}); }

V flat_concat(const Vs& parts) {
  Vs f;
  for (const auto& p : parts) f.push_back(flat(p));
  return ops::concat(f, 0);
}

ModelConfig small_config() {
  ModelConfig c;
  c.base_channels = 6;
  c.heads = 3;
  c.state_dim = 4;
  c.expansion = 2;
  c.mlp_ratio = 2;
  c.detail_channels = 4;
  c.pyramid_levels = 2;
  c.lssm_blocks = 1;
  c.validate();
  return c;
}

using BlockBody = std::function<V(ParamBinding<double>&, const Vs&)>;

// Parameters start from their initializer; constant-initialised tensors (zero heads, unit
// gains, mask biases) are jittered so no gradient path is trivially zero.
GradCase block_case(const std::string& name, const arch::Specs& specs, std::vector<T> data, BlockBody body, Gen& gen) {
  auto store = std::make_shared<ParamStore<double>>(init_from_specs<double>(specs, gen.rng()()));
  std::vector<std::string> names;
  for (const auto& s : specs) {
    T& t = store->at(s.name);
    if (s.init == InitKind::constant) {
      const T jitter = gen.uniform(t.shape(), -0.3, 0.3);
      for (int64_t i = 0; i < t.size(); ++i) t[i] += jitter[i];
    }
    names.push_back(s.name);
  }
  const size_t n_data = data.size();
  std::vector<T> inputs = std::move(data);
  for (const auto& n : names) inputs.push_back(store->at(n));
  GradClosure fn = [store, names, n_data, body](Tape<double>& tape, const Vs& vars) {
    ParamBinding<double> p(tape, *store);
    for (size_t i = 0; i < names.size(); ++i) p.bind(names[i], vars[n_data + i]);
    return body(p, Vs(vars.begin(), vars.begin() + static_cast<std::ptrdiff_t>(n_data)));
  };
  return {name, "block", fn, std::move(inputs)};
}

void add_op_cases(std::vector<GradCase>& out, Gen& g) {
  auto op = [&](const std::string& name, GradClosure fn, std::vector<T> inputs) {
    out.push_back({name, "op", std::move(fn), std::move(inputs)});
  };
  const Shape s4{2, 3, 4, 4};
  op("add", [](Tape<double>&, const Vs& v) { return ops::add(v[0], v[1]); }, {g.uniform(s4), g.uniform(s4)});
  op("add_broadcast", [](Tape<double>&, const Vs& v) { return ops::add(v[0], v[1]); },
     {g.uniform(s4), g.uniform({1, 3, 1, 1})});
  op("sub", [](Tape<double>&, const Vs& v) { return ops::sub(v[0], v[1]); }, {g.uniform(s4), g.uniform({2, 1, 4, 4})});
  op("mul", [](Tape<double>&, const Vs& v) { return ops::mul(v[0], v[1]); }, {g.uniform(s4), g.uniform({2, 3, 1, 1})});
  op("div", [](Tape<double>&, const Vs& v) { return ops::div(v[0], v[1]); },
     {g.uniform(s4), g.away_from_zero(s4, 0.5, 1.5)});
  op("scale", [](Tape<double>&, const Vs& v) { return ops::scale(v[0], -1.7); }, {g.uniform(s4)});
  op("add_scalar", [](Tape<double>&, const Vs& v) { return ops::add_scalar(v[0], 0.3); }, {g.uniform(s4)});
  op("exp", [](Tape<double>&, const Vs& v) { return ops::exp(v[0]); }, {g.uniform(s4)});
  op("abs", [](Tape<double>&, const Vs& v) { return ops::abs(v[0]); }, {g.away_from_zero(s4, 0.1, 1.0)});
  op("square", [](Tape<double>&, const Vs& v) { return ops::square(v[0]); }, {g.uniform(s4)});
  op("sigmoid", [](Tape<double>&, const Vs& v) { return ops::sigmoid(v[0]); }, {g.uniform(s4, -3, 3)});
  op("silu", [](Tape<double>&, const Vs& v) { return ops::silu(v[0]); }, {g.uniform(s4, -3, 3)});
  op("softplus", [](Tape<double>&, const Vs& v) { return ops::softplus(v[0]); }, {g.uniform(s4, -3, 3)});
  op("reshape", [](Tape<double>&, const Vs& v) { return ops::reshape(v[0], Shape{6, 16}); }, {g.uniform(s4)});
  op("concat", [](Tape<double>&, const Vs& v) { return ops::concat(Vs{v[0], v[1]}, 1); },
     {g.uniform(s4), g.uniform({2, 2, 4, 4})});
  op("slice", [](Tape<double>&, const Vs& v) { return ops::slice(v[0], 2, 1, 2); }, {g.uniform(s4)});
  op("gather_last", [](Tape<double>&, const Vs& v) { return ops::gather_last(v[0], {3, 0, 0, 2, 1}); },
     {g.uniform({2, 3, 4})});
  op("sum", [](Tape<double>&, const Vs& v) { return ops::sum(v[0]); }, {g.uniform(s4)});
  op("mean", [](Tape<double>&, const Vs& v) { return ops::mean(v[0]); }, {g.uniform(s4)});
  op("mean_axes", [](Tape<double>&, const Vs& v) { return ops::mean_axes(v[0], {2, 3}); }, {g.uniform(s4)});
  op("layer_norm_channels", [](Tape<double>&, const Vs& v) { return ops::layer_norm_channels(v[0], v[1], v[2]); },
     {g.uniform(s4), g.uniform({3}, 0.5, 1.5), g.uniform({3})});
  op("softmax", [](Tape<double>&, const Vs& v) { return ops::softmax(v[0], -1); }, {g.uniform({3, 4, 5}, -2, 2)});
  op("softmax_axis1", [](Tape<double>&, const Vs& v) { return ops::softmax(v[0], 1); }, {g.uniform({3, 4, 5}, -2, 2)});
  op("matmul", [](Tape<double>&, const Vs& v) { return ops::matmul(v[0], v[1]); },
     {g.uniform({2, 3, 4}), g.uniform({2, 4, 5})});
  op("matmul_transposed", [](Tape<double>&, const Vs& v) { return ops::matmul(v[0], v[1], true, true); },
     {g.uniform({2, 4, 3}), g.uniform({2, 5, 4})});

  auto conv_case = [&](const std::string& name, Conv2dOptions opt, int64_t cin, int64_t cout, int64_t k, bool bias) {
    std::vector<T> in{g.uniform({2, cin, 5, 6}), g.uniform({cout, cin / opt.groups, k, k})};
    if (bias) in.push_back(g.uniform({cout}));
    op(name,
       [opt, bias](Tape<double>&, const Vs& v) {
         return ops::conv2d<double>(v[0], v[1], bias ? std::optional<V>(v[2]) : std::nullopt, opt);
       },
       std::move(in));
  };
  conv_case("conv2d_reflect", {1, 1, Padding::reflect}, 3, 4, 3, true);
  conv_case("conv2d_zero", {1, 1, Padding::zero}, 3, 4, 3, false);
  conv_case("conv2d_valid", {1, 1, Padding::valid}, 3, 2, 3, true);
  conv_case("conv2d_grouped", {3, 1, Padding::reflect}, 6, 6, 3, true);
  conv_case("conv2d_strided", {1, 2, Padding::reflect}, 3, 2, 3, true);
  conv_case("conv2d_pointwise", {1, 1, Padding::reflect}, 4, 5, 1, true);

  op("fft2",
     [](Tape<double>&, const Vs& v) {
       auto [re, im] = ops::fft2(v[0]);
       return ops::concat(Vs{re, im}, 1);
     },
     {g.uniform({1, 2, 4, 8})});
  op("ifft2_real", [](Tape<double>&, const Vs& v) { return ops::ifft2_real(v[0], v[1]); },
     {g.uniform({1, 2, 8, 4}), g.uniform({1, 2, 8, 4})});
  op("dwt2_haar", [](Tape<double>&, const Vs& v) { return ops::dwt2_haar(v[0]); }, {g.uniform({1, 2, 4, 6})});
  op("idwt2_haar", [](Tape<double>&, const Vs& v) { return ops::idwt2_haar(v[0]); }, {g.uniform({1, 8, 2, 3})});
  op("downsample2x", [](Tape<double>&, const Vs& v) { return ops::downsample2x(v[0]); }, {g.uniform({1, 2, 8, 6})});
  op("upsample2x", [](Tape<double>&, const Vs& v) { return ops::upsample2x(v[0]); }, {g.uniform({1, 2, 3, 4})});
  {
    const int64_t B = 1, D = 3, N = 4, L = 6;
    T a = g.uniform({D, N}, -2.0, -0.2);
    op("selective_scan",
       [](Tape<double>&, const Vs& v) { return ops::selective_scan(v[0], v[1], v[2], v[3], v[4], v[5]); },
       {g.uniform({B, D, L}), g.uniform({B, D, L}, 0.05, 0.8), g.uniform({B, N, L}), g.uniform({B, N, L}), a,
        g.uniform({D})});
  }
  op("ssim", [](Tape<double>&, const Vs& v) { return ssim_var(v[0], v[1]); },
     {g.uniform({1, 3, 12, 12}, 0, 1), g.uniform({1, 3, 12, 12}, 0, 1)});
  op("laplacian_levels", [](Tape<double>&, const Vs& v) { return flat_concat(laplacian_levels(v[0], 2)); },
     {g.uniform({1, 3, 8, 8})});
  op("loss_total",
     [](Tape<double>&, const Vs& v) {
       return loss_total(v[0], v[1], laplacian_levels(v[0], 2), laplacian_levels(v[1], 2), LossWeights{}).total;
     },
     {g.uniform({1, 3, 8, 8}, 0, 1), g.uniform({1, 3, 8, 8}, 0, 1)});
}

void add_block_cases(std::vector<GradCase>& out, Gen& g) {
  const ModelConfig c = small_config();
  const int64_t C = c.base_channels;
  arch::Specs s;

  s.clear();
  arch::conv_specs(s, "conv", C, 3, 3, 3);
  out.push_back(block_case("block_conv", s, {g.uniform({1, 3, 4, 4})},
                           [](ParamBinding<double>& p, const Vs& x) { return arch::conv(p, "conv", x[0], 3); }, g));
  s.clear();
  arch::resblock_specs(s, "res", C);
  out.push_back(block_case("block_resblock", s, {g.uniform({1, C, 4, 4})},
                           [](ParamBinding<double>& p, const Vs& x) { return arch::resblock(p, "res", x[0]); }, g));
  s.clear();
  arch::cab_specs(s, "cab", C, c.cab_hidden());
  out.push_back(block_case("block_cab", s, {g.uniform({1, C, 4, 4})},
                           [](ParamBinding<double>& p, const Vs& x) { return arch::cab(p, "cab", x[0]); }, g));
  s.clear();
  arch::ddcm_specs(s, "ddcm", c);
  out.push_back(block_case("block_ddcm", s, {g.uniform({1, 3, 4, 4})},
                           [](ParamBinding<double>& p, const Vs& x) { return arch::ddcm(p, "ddcm", x[0]); }, g));
  s.clear();
  arch::mcm_specs(s, "mcm", c);
  out.push_back(block_case("block_mcm", s, {g.uniform({1, 3, 4, 4})},
                           [](ParamBinding<double>& p, const Vs& x) { return arch::mcm(p, "mcm", x[0]); }, g));
  s.clear();
  arch::ss2d_specs(s, "ss2d", 4, c.state_dim);
  out.push_back(block_case("block_ss2d", s, {g.uniform({1, 4, 3, 4})},
                           [](ParamBinding<double>& p, const Vs& x) { return arch::ss2d(p, "ss2d", x[0]); }, g));
  s.clear();
  arch::lssm_specs(s, "lssm", c);
  out.push_back(block_case(
      "block_lssm", s, {g.uniform({1, C, 4, 4}), g.uniform({1, C, 4, 4})},
      [c](ParamBinding<double>& p, const Vs& x) { return arch::lssm(p, "lssm", c, x[0], x[1]); }, g));
  s.clear();
  arch::lga_specs(s, "lga", c);
  out.push_back(block_case(
      "block_lga", s, {g.uniform({1, C, 4, 4}), g.uniform({1, C, 4, 4})},
      [c](ParamBinding<double>& p, const Vs& x) { return arch::lga(p, "lga", c, x[0], x[1]); }, g));
  s.clear();
  arch::ldp_specs(s, "ldp", c);
  out.push_back(block_case(
      "block_ldp", s, {g.uniform({1, 3, 8, 8})},
      [c](ParamBinding<double>& p, const Vs& x) {
        auto pyr = arch::ldp_decompose(p, "ldp", c, x[0]);
        Vs parts = pyr.hf;
        parts.push_back(pyr.lf);
        return flat_concat(parts);
      },
      g));
  s.clear();
  arch::ide_specs(s, "ide", c);
  out.push_back(block_case(
      "block_ide", s, {g.uniform({1, 3, 2, 2}), g.uniform({1, 3, 8, 8}), g.uniform({1, 3, 4, 4}), g.uniform({1, 3, 2, 2})},
      [](ParamBinding<double>& p, const Vs& x) {
        arch::Pyramid<double> pyr{{x[1], x[2]}, x[3]};
        return arch::ide_refine(p, "ide", x[0], pyr);
      },
      g));
  out.push_back(block_case(
      "block_network", param_specs(c), {g.uniform({1, 3, 8, 8}, 0, 1)},
      [c](ParamBinding<double>& p, const Vs& x) { return lalnet_forward(p, c, x[0]); }, g));
}

}  // namespace

std::vector<GradCase> gradient_cases(uint64_t seed) {
  Gen g(seed);
  std::vector<GradCase> out;
  add_op_cases(out, g);
  add_block_cases(out, g);
  return out;
}

std::vector<std::string> gradient_case_names() {
  std::vector<std::string> names;
  for (const auto& c : gradient_cases()) names.push_back(c.name);
  return names;
}

std::vector<GradCaseResult> run_gradient_suite(const std::string& filter, const GradCheckOptions& options) {
  std::vector<GradCaseResult> results;
  const bool all = filter.empty() || filter == "all";
  for (const auto& c : gradient_cases()) {
    if (!all && filter != c.group && filter != c.name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    GradCaseResult r{c.name, c.group, grad_check(c.fn, c.inputs, options), 0.0};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(std::move(r));
  }
  if (results.empty()) {
    std::string valid = "all, op, block";
    for (const auto& n : gradient_case_names()) valid += ", " + n;
    throw std::invalid_argument("unknown gradient case '" + filter + "' (valid: " + valid + ")");
  }
  return results;
}

}  // namespace lalnet
