#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lalnet/blocks.hpp"
#include "lalnet/config.hpp"
#include "lalnet/params.hpp"

namespace lalnet {

/// Every learnable tensor of the configured network, in a fixed order.
std::vector<ParamSpec> param_specs(const ModelConfig& config);
int64_t param_count(const ModelConfig& config);

template <class T>
ParamStore<T> init_params(const ModelConfig& config, uint64_t seed);

template <class T>
struct ForwardTrace {
  arch::Pyramid<T> pyramid;
  std::vector<Var<T>> masks;  // coarsest level first
  Var<T> f_cs;                // colour-separated features after the grouped conv
  Var<T> f_cm;                // colour-mixed features after the last LSSM block
  Var<T> f_la;
  Var<T> y_lf;
  arch::AttentionTrace<T> attention;
};

/// Full network on [B,3,H,W]. H and W must be divisible by 2^L and, with the dual-domain
/// branch active, H/2^L and W/2^L must be powers of two (at least 2 with the wavelet branch).
template <class T>
Var<T> lalnet_forward(ParamBinding<T>& params, const ModelConfig& config, const Var<T>& x,
                      ForwardTrace<T>* trace = nullptr);

/// Input extents accepted by lalnet_forward that are closest to (and not below) the given size.
int64_t padded_extent(const ModelConfig& config, int64_t extent);

/// Inference on one image [3,H,W] of any size: symmetric pad, forward, crop.
template <class T>
Tensor<T> enhance_image(const ParamStore<T>& store, const ModelConfig& config, const Tensor<T>& image);

}  // namespace lalnet
