#pragma once

// Building blocks of the enhancement network. Each block comes as a pair: a `*_specs`
// function appending the parameters it owns under a name prefix, and a forward
// function reading those same names from a ParamBinding.

#include <array>
#include <string>
#include <vector>

#include "lalnet/config.hpp"
#include "lalnet/params.hpp"

namespace lalnet::arch {

using Specs = std::vector<ParamSpec>;

// Convolution with optional bias; weight [cout, cin/groups, k, k], reflect padding.
void conv_specs(Specs& s, const std::string& name, int64_t cout, int64_t cin, int64_t k, int64_t groups = 1,
                bool bias = true);
template <class T>
Var<T> conv(ParamBinding<T>& p, const std::string& name, const Var<T>& x, int64_t groups = 1, bool bias = true);

// conv3x3 -> SiLU -> conv3x3 with identity skip
void resblock_specs(Specs& s, const std::string& prefix, int64_t channels);
template <class T>
Var<T> resblock(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x);

// Channel attention: global average pool, 1x1 reduce (r=4), SiLU, 1x1 expand, sigmoid gate.
void cab_specs(Specs& s, const std::string& prefix, int64_t channels, int64_t hidden);
template <class T>
Var<T> cab(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x);

// Dual-domain colour-separated features: per-colour FFT, grouped 3x3 convs on the real
// and imaginary planes, inverse FFT (real part). `ddcm` adds the channel attention.
void ddcm_specs(Specs& s, const std::string& prefix, const ModelConfig& c);
template <class T>
Var<T> ddcm_pre_cab(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x);
template <class T>
Var<T> ddcm(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x);

// Mixed-colour features: conv3x3 -> Haar DWT -> conv3x3 over the stacked bands -> 2x upsample.
void mcm_specs(Specs& s, const std::string& prefix, const ModelConfig& c);
template <class T>
Var<T> mcm(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x);

// Four-direction selective scan over [B,D,H,W]. Direction order: row-major forward,
// row-major backward, column-major forward, column-major backward.
void ss2d_specs(Specs& s, const std::string& prefix, int64_t channels, int64_t state_dim);
std::vector<int64_t> scan_order(int direction, int64_t height, int64_t width);
template <class T>
std::array<Var<T>, 4> ss2d_directions(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x);
template <class T>
Var<T> ss2d(ParamBinding<T>& p, const std::string& prefix, const Var<T>& x);

// State-space block. Returns the updated colour-mixed features (residual included).
void lssm_specs(Specs& s, const std::string& prefix, const ModelConfig& c);
template <class T>
Var<T> lssm_branch(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& f_cm,
                   const Var<T>& f_cs);
template <class T>
Var<T> lssm(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& f_cm,
            const Var<T>& f_cs);

template <class T>
struct AttentionTrace {
  Var<T> attention;  // [B*heads, C/heads, C/heads], row-stochastic
  Var<T> mixed;      // attention applied to V, before the output projection, [B,C,h,w]
};

// Guided attention: queries from colour-separated features, keys/values from colour-mixed
// features, attention across channels within each head.
void lga_specs(Specs& s, const std::string& prefix, const ModelConfig& c);
template <class T>
Var<T> lga(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& f_cm,
           const Var<T>& f_cs, AttentionTrace<T>* trace = nullptr);

template <class T>
struct Pyramid {
  std::vector<Var<T>> hf;  // hf[l] at H/2^l x W/2^l, l = 0..L-1
  Var<T> lf;               // H/2^L x W/2^L
};

// Laplacian differences refined by a zero-initialised conv residual per level.
void ldp_specs(Specs& s, const std::string& prefix, const ModelConfig& c);
template <class T>
Pyramid<T> ldp_decompose(ParamBinding<T>& p, const std::string& prefix, const ModelConfig& c, const Var<T>& x);

// Coarse-to-fine reconstruction: Y = Up(Y) + HF * M with a mask head per level (bias 1 at init).
void ide_specs(Specs& s, const std::string& prefix, const ModelConfig& c);
template <class T>
Var<T> ide_refine(ParamBinding<T>& p, const std::string& prefix, const Var<T>& y_lf, const Pyramid<T>& pyramid,
                  std::vector<Var<T>>* masks = nullptr);

}  // namespace lalnet::arch
