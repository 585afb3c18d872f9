#include "lalnet/model.hpp"

#include "lalnet/conv.hpp"
#include "lalnet/fft.hpp"
#include "lalnet/ops.hpp"

namespace lalnet {

using arch::conv_specs;

std::vector<ParamSpec> param_specs(const ModelConfig& c) {
  c.validate();
  const int64_t C = c.base_channels;
  arch::Specs s;
  arch::ldp_specs(s, "ldp", c);
  if (c.use_ddcm) {
    arch::ddcm_specs(s, "ddcm", c);
  } else {
    conv_specs(s, "ddcm_replace", C, 3, 3, 3);
  }
  conv_specs(s, "cs_gconv", C, C, 3, c.gconv_separated ? 3 : 1);
  if (c.use_mcm) {
    arch::mcm_specs(s, "mcm", c);
  } else {
    conv_specs(s, "mcm_replace.conv1", C, 3, 3);
    conv_specs(s, "mcm_replace.conv2", C, C, 3);
  }
  for (int i = 0; i < c.lssm_blocks; ++i) arch::lssm_specs(s, "lssm" + std::to_string(i), c);
  if (c.use_lga) arch::lga_specs(s, "lga", c);
  conv_specs(s, "head", 3, C, 3);
  for (auto& spec : s) {
    if (spec.name.rfind("head.", 0) == 0) {
      spec.init = InitKind::constant;
      spec.value = 0.0;
    }
  }
  arch::ide_specs(s, "ide", c);
  return s;
}

int64_t param_count(const ModelConfig& config) { return count_specs(param_specs(config)); }

template <class T>
ParamStore<T> init_params(const ModelConfig& config, uint64_t seed) {
  return init_from_specs<T>(param_specs(config), seed);
}

namespace {

void check_extents(const ModelConfig& c, const Shape& s) {
  if (s.size() != 4 || s[1] != 3) throw ShapeError("lalnet_forward expects [B,3,H,W], got " + shape_str(s));
  const int64_t unit = int64_t{1} << c.pyramid_levels;
  for (int axis : {2, 3}) {
    const int64_t n = s[static_cast<size_t>(axis)];
    const char* name = axis == 2 ? "height" : "width";
    if (n % unit != 0) {
      throw ShapeError(std::string("lalnet_forward: ") + name + " " + std::to_string(n) + " not divisible by 2^" +
                       std::to_string(c.pyramid_levels));
    }
    const int64_t low = n / unit;
    if (c.use_ddcm && !is_pow2(low)) {
      throw ShapeError(std::string("lalnet_forward: low-frequency ") + name + " " + std::to_string(low) +
                       " is not a power of two");
    }
    if (c.use_mcm && low % 2 != 0) {
      throw ShapeError(std::string("lalnet_forward: low-frequency ") + name + " " + std::to_string(low) +
                       " must be even for the wavelet branch");
    }
  }
}

}  // namespace

template <class T>
Var<T> lalnet_forward(ParamBinding<T>& p, const ModelConfig& c, const Var<T>& x, ForwardTrace<T>* trace) {
  check_extents(c, x.shape());
  arch::Pyramid<T> pyr = arch::ldp_decompose(p, "ldp", c, x);
  const Var<T>& low = pyr.lf;

  Var<T> f_cs = c.use_ddcm ? arch::ddcm(p, "ddcm", low) : arch::conv(p, "ddcm_replace", low, 3);
  f_cs = arch::conv(p, "cs_gconv", f_cs, c.gconv_separated ? 3 : 1);

  Var<T> f_cm = c.use_mcm ? arch::mcm(p, "mcm", low)
                          : arch::conv(p, "mcm_replace.conv2", ops::silu(arch::conv(p, "mcm_replace.conv1", low)));
  for (int i = 0; i < c.lssm_blocks; ++i) f_cm = arch::lssm(p, "lssm" + std::to_string(i), c, f_cm, f_cs);

  arch::AttentionTrace<T> attention;
  Var<T> f_la = c.use_lga ? arch::lga(p, "lga", c, f_cm, f_cs, &attention) : ops::add(f_cm, f_cs);
  Var<T> y_lf = ops::add(low, arch::conv(p, "head", f_la));

  std::vector<Var<T>> masks;
  Var<T> y = arch::ide_refine(p, "ide", y_lf, pyr, &masks);
  if (trace) {
    trace->pyramid = pyr;
    trace->masks = std::move(masks);
    trace->f_cs = f_cs;
    trace->f_cm = f_cm;
    trace->f_la = f_la;
    trace->y_lf = y_lf;
    trace->attention = attention;
  }
  return y;
}

int64_t padded_extent(const ModelConfig& c, int64_t extent) {
  const int64_t unit = int64_t{1} << c.pyramid_levels;
  int64_t low = (extent + unit - 1) / unit;
  if (c.use_ddcm) low = next_pow2(low);
  if (c.use_mcm) low = std::max<int64_t>(2, low + (low % 2));
  return low * unit;
}

template <class T>
Tensor<T> enhance_image(const ParamStore<T>& store, const ModelConfig& config, const Tensor<T>& image) {
  if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("enhance expects [3,H,W], got " + shape_str(image.shape()));
  const int64_t H = image.dim(1), W = image.dim(2);
  PadOffsets off;
  Tensor<T> padded = pad_symmetric(image, padded_extent(config, H), padded_extent(config, W), &off);
  const Shape ps = padded.shape();
  Tape<T> tape;
  ParamBinding<T> binding(tape, store, false);
  Var<T> x = tape.constant(padded.reshaped({1, 3, ps[1], ps[2]}));
  Tensor<T> y = lalnet_forward(binding, config, x).value().reshaped(ps);
  return crop2d(y, off.top, off.left, H, W);
}

template ParamStore<float> init_params<float>(const ModelConfig&, uint64_t);
template ParamStore<double> init_params<double>(const ModelConfig&, uint64_t);
template Var<float> lalnet_forward(ParamBinding<float>&, const ModelConfig&, const Var<float>&, ForwardTrace<float>*);
template Var<double> lalnet_forward(ParamBinding<double>&, const ModelConfig&, const Var<double>&,
                                    ForwardTrace<double>*);
template Tensor<float> enhance_image(const ParamStore<float>&, const ModelConfig&, const Tensor<float>&);
template Tensor<double> enhance_image(const ParamStore<double>&, const ModelConfig&, const Tensor<double>&);

}  // namespace lalnet
