#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lalnet/config.hpp"
#include "lalnet/data.hpp"
#include "lalnet/model.hpp"

namespace lalnet {

// ---- metrics ---------------------------------------------------------------

/// 10 log10(peak^2 / MSE), 100 dB when MSE < 1e-10.
double psnr(const Tensor<float>& a, const Tensor<float>& b, double peak = 1.0);
/// Mean SSIM over channels: Gaussian window 11x11, sigma 1.5, K1 0.01, K2 0.03, valid
/// positions only. Images smaller than 11 use the largest odd window that fits.
double ssim(const Tensor<float>& a, const Tensor<float>& b);
/// Mean CIE76 colour difference after sRGB -> linear -> XYZ (D65) -> L*a*b*.
double delta_e(const Tensor<float>& a, const Tensor<float>& b);

std::array<double, 3> srgb_to_lab(double r, double g, double b);

/// Differentiable SSIM over [B,C,H,W] (mean of the SSIM map), shared by the loss and the metric.
template <class T>
Var<T> ssim_var(const Var<T>& a, const Var<T>& b);

// ---- loss ------------------------------------------------------------------

struct LossWeights {
  double alpha = 1.0;    // L1 reconstruction
  double beta = 0.5;     // 1 - SSIM
  double gamma_w = 0.5;  // L1 on high-frequency pyramid levels
  double eta_w = 0.0;    // perceptual; unsupported, must stay 0

  void validate() const;
  static LossWeights from(const TrainConfig& c) { return {c.alpha, c.beta, c.gamma_w, c.eta_w}; }
};

/// Fixed (non-learned) Laplacian levels x - Up(Down(x)) used by the high-frequency loss.
template <class T>
std::vector<Var<T>> laplacian_levels(const Var<T>& x, int levels);

template <class T>
struct LossTerms {
  Var<T> total;
  double reconstruction = 0.0;
  double structure = 0.0;  // 1 - SSIM
  double high_frequency = 0.0;
};

template <class T>
LossTerms<T> loss_total(const Var<T>& pred, const Var<T>& target, const std::vector<Var<T>>& pred_hf,
                        const std::vector<Var<T>>& target_hf, const LossWeights& weights);

// ---- optimizer ---------------------------------------------------------------

/// One bias-corrected Adam update of every store entry; increments the step counter once.
template <class T>
void adam_step(ParamStore<T>& store, const std::map<std::string, Tensor<T>>& grads, const TrainConfig& config,
               double lr);

double scheduled_lr(const TrainConfig& config, int iteration);

// ---- training / evaluation -------------------------------------------------

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int iteration, const std::string& what) : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

struct EvalRow {
  std::string name;
  double psnr = 0, ssim = 0, delta_e = 0;
};

struct EvalSummary {
  double psnr = 0, ssim = 0, delta_e = 0;
  std::vector<EvalRow> rows;
};

/// Enhanced output vs clean for every pair.
EvalSummary evaluate(const ParamStore<float>& store, const ModelConfig& config, const std::vector<ImagePair>& pairs);
/// Degraded input vs clean (the do-nothing baseline).
EvalSummary evaluate_baseline(const std::vector<ImagePair>& pairs);

struct CurveRow {
  int iter = 0;
  double loss = 0, psnr = 0, ssim = 0, delta_e = 0;
};

struct TrainOptions {
  // Draw a fresh random degradation of the clean patch every time it is sampled
  // (synthetic corpora); otherwise train on the stored degraded images.
  bool resample_degradations = false;
  std::optional<ParamStore<float>> initial;  // resume from these weights and Adam state
  std::function<void(const CurveRow&)> on_eval;
};

struct TrainResult {
  ParamStore<float> store;
  std::vector<CurveRow> curve;
  EvalSummary final_eval;
  EvalSummary baseline;
};

/// Per-sample tapes are evaluated in parallel and their gradients summed in sample order,
/// so results do not depend on the thread count. Throws TrainingDiverged on a non-finite loss.
TrainResult train(const ModelConfig& model, const TrainConfig& config, const std::vector<ImagePair>& train_set,
                  const std::vector<ImagePair>& holdout, const TrainOptions& options = {});

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve);
void write_eval_csv(const std::string& path, const EvalSummary& summary);

/// Training and held-out splits of the synthetic toy corpus for a train config.
std::vector<ImagePair> toy_train_set(const TrainConfig& config);
std::vector<ImagePair> toy_holdout_set(const TrainConfig& config);

/// Holds out the last min(holdout, n/4) pairs (at least one when n >= 2). A single pair is
/// used for both training and evaluation.
std::pair<std::vector<ImagePair>, std::vector<ImagePair>> split_corpus(std::vector<ImagePair> pairs, int holdout);

// ---- ablation ----------------------------------------------------------------

struct AblationVariant {
  std::string id;           // e.g. "#4", "levels=2", "tconv", "resblock"
  std::string description;
  ModelConfig config;
};

/// Expands a comma-separated selection: "#1".."#6", "components", "levels" (n = 2,3,4),
/// "levels=N", "gconv", "tconv", "conv", "ss2d", "resblock", "scan", "all".
std::vector<AblationVariant> ablation_variants(const std::string& selection, const ModelConfig& base);

struct AblationRow {
  std::string id;
  std::string description;
  int64_t params = 0;
  double psnr = 0, ssim = 0, delta_e = 0;  // NaN if the variant diverged
  bool is_full = false;                    // configuration equals the unablated base model
  double full_minus_psnr = 0;              // full-model PSNR minus this row's; NaN without a full row
  std::string note;
};

/// Variants with identical configurations are trained once (training is deterministic).
std::vector<AblationRow> run_ablation(const std::vector<AblationVariant>& variants, const TrainConfig& config,
                                      const std::vector<ImagePair>& train_set, const std::vector<ImagePair>& holdout,
                                      bool resample_degradations, const ModelConfig& base);
void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows);
/// One line per ablated row stating whether the full model scored at least as well.
std::vector<std::string> ablation_directionality(const std::vector<AblationRow>& rows);

}  // namespace lalnet
