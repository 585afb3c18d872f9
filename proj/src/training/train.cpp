#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "lalnet/ops.hpp"
#include "lalnet/parallel.hpp"
#include "lalnet/resample.hpp"
#include "lalnet/training.hpp"

namespace lalnet {

void LossWeights::validate() const {
  if (alpha < 0 || beta < 0 || gamma_w < 0 || eta_w < 0) throw ConfigError("loss weights must be >= 0");
  if (eta_w > 0) throw ConfigError("perceptual loss (eta_w > 0) is not supported");
}

template <class T>
std::vector<Var<T>> laplacian_levels(const Var<T>& x, int levels) {
  std::vector<Var<T>> out;
  Var<T> level = x;
  for (int l = 0; l < levels; ++l) {
    Var<T> down = ops::downsample2x(level);
    out.push_back(ops::sub(level, ops::upsample2x(down)));
    level = down;
  }
  return out;
}

template <class T>
LossTerms<T> loss_total(const Var<T>& pred, const Var<T>& target, const std::vector<Var<T>>& pred_hf,
                        const std::vector<Var<T>>& target_hf, const LossWeights& w) {
  w.validate();
  if (pred.shape() != target.shape()) {
    throw ShapeError("loss: prediction " + shape_str(pred.shape()) + " vs target " + shape_str(target.shape()));
  }
  if (pred_hf.size() != target_hf.size()) {
    throw ShapeError("loss: " + std::to_string(pred_hf.size()) + " predicted detail levels vs " +
                     std::to_string(target_hf.size()) + " target levels");
  }
  Var<T> rec = ops::mean(ops::abs(ops::sub(pred, target)));
  Var<T> structure = ops::add_scalar(ops::scale(ssim_var(pred, target), T(-1)), T(1));
  Var<T> total = ops::add(ops::scale(rec, T(w.alpha)), ops::scale(structure, T(w.beta)));
  double hf_value = 0.0;
  if (!pred_hf.empty()) {
    Var<T> hf;
    for (size_t l = 0; l < pred_hf.size(); ++l) {
      if (pred_hf[l].shape() != target_hf[l].shape()) {
        throw ShapeError("loss: detail level " + std::to_string(l) + " shape mismatch");
      }
      Var<T> term = ops::mean(ops::abs(ops::sub(pred_hf[l], target_hf[l])));
      hf = hf.valid() ? ops::add(hf, term) : term;
    }
    hf_value = static_cast<double>(hf.value().item());
    total = ops::add(total, ops::scale(hf, T(w.gamma_w)));
  }
  return {total, static_cast<double>(rec.value().item()), static_cast<double>(structure.value().item()), hf_value};
}

template <class T>
void adam_step(ParamStore<T>& store, const std::map<std::string, Tensor<T>>& grads, const TrainConfig& c, double lr) {
  for (const auto& [name, t] : store.tensors()) {
    auto it = grads.find(name);
    if (it == grads.end()) throw ConfigError("missing gradient for parameter " + name);
    if (it->second.shape() != t.shape()) throw ShapeError("gradient shape mismatch for parameter " + name);
  }
  auto& adam = store.adam();
  const int64_t step = ++adam.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (auto& [name, param] : store.tensors()) {
    const Tensor<T>& g = grads.at(name);
    auto& m = adam.m[name];
    auto& v = adam.v[name];
    if (m.shape() != param.shape()) m = Tensor<T>(param.shape());
    if (v.shape() != param.shape()) v = Tensor<T>(param.shape());
    for (int64_t i = 0; i < param.size(); ++i) {
      const double gi = g[i];
      const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
      const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      param[i] = static_cast<T>(param[i] - lr * (mi / bc1) / (std::sqrt(vi / bc2) + c.eps));
    }
  }
}

double scheduled_lr(const TrainConfig& c, int iteration) {
  if (!c.cosine_decay) return c.lr;
  return c.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * iteration / c.iters));
}

namespace {

EvalRow score(const std::string& name, const Tensor<float>& out, const Tensor<float>& clean) {
  return {name, psnr(out, clean), ssim(out, clean), delta_e(out, clean)};
}

EvalSummary summarize(std::vector<EvalRow> rows) {
  EvalSummary s;
  for (const auto& r : rows) {
    s.psnr += r.psnr;
    s.ssim += r.ssim;
    s.delta_e += r.delta_e;
  }
  const double n = static_cast<double>(std::max<size_t>(1, rows.size()));
  s.psnr /= n;
  s.ssim /= n;
  s.delta_e /= n;
  s.rows = std::move(rows);
  return s;
}

struct Sample {
  Tensor<float> degraded;
  Tensor<float> clean;
};

}  // namespace

EvalSummary evaluate(const ParamStore<float>& store, const ModelConfig& config, const std::vector<ImagePair>& pairs) {
  std::vector<EvalRow> rows(pairs.size());
  parallel_for(static_cast<int64_t>(pairs.size()), [&](int64_t i) {
    const auto& p = pairs[static_cast<size_t>(i)];
    Tensor<float> out = enhance_image(store, config, p.degraded);
    for (auto& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
    rows[static_cast<size_t>(i)] = score(p.name, out, p.clean);
  });
  return summarize(std::move(rows));
}

EvalSummary evaluate_baseline(const std::vector<ImagePair>& pairs) {
  std::vector<EvalRow> rows;
  for (const auto& p : pairs) rows.push_back(score(p.name, p.degraded, p.clean));
  return summarize(std::move(rows));
}

TrainResult train(const ModelConfig& model, const TrainConfig& config, const std::vector<ImagePair>& train_set,
                  const std::vector<ImagePair>& holdout, const TrainOptions& options) {
  model.validate();
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("training corpus is empty");
  const LossWeights weights = LossWeights::from(config);
  const int64_t P = config.patch;
  {
    const int64_t unit = int64_t{1} << model.pyramid_levels;
    if (P % unit != 0 || padded_extent(model, P) != P) {
      throw ConfigError("patch size " + std::to_string(P) + " is not a valid network input for " +
                        std::to_string(model.pyramid_levels) + " pyramid levels");
    }
  }
  for (const auto& p : train_set) {
    if (p.clean.dim(1) < P || p.clean.dim(2) < P) throw ShapeError("training image " + p.name + " is smaller than the patch size");
  }

  TrainResult result;
  result.store = options.initial ? *options.initial : init_params<float>(model, config.seed);
  ParamStore<float>& store = result.store;
  result.baseline = evaluate_baseline(holdout);

  std::mt19937_64 rng(config.seed ^ 0x7A11u);
  std::uniform_int_distribution<size_t> pick(0, train_set.size() - 1);
  double loss_acc = 0.0;
  int loss_count = 0;

  for (int it = 1; it <= config.iters; ++it) {
    std::vector<Sample> batch;
    for (int b = 0; b < config.batch; ++b) {
      const auto& pair = train_set[pick(rng)];
      const auto patches = sample_patches(pair.degraded, pair.clean, P, 1, rng());
      Sample s{patches[0].degraded, patches[0].clean};
      if (options.resample_degradations) s.degraded = degrade(s.clean, random_degradation(rng));
      batch.push_back(std::move(s));
    }

    std::vector<std::map<std::string, Tensor<float>>> grads(batch.size());
    std::vector<double> losses(batch.size());
    parallel_for(static_cast<int64_t>(batch.size()), [&](int64_t b) {
      const auto& s = batch[static_cast<size_t>(b)];
      Tape<float> tape;
      ParamBinding<float> params(tape, store);
      Var<float> x = tape.constant(s.degraded.reshaped({1, 3, P, P}));
      Var<float> target = tape.constant(s.clean.reshaped({1, 3, P, P}));
      Var<float> y = lalnet_forward(params, model, x);
      auto terms = loss_total(y, target, laplacian_levels(y, model.pyramid_levels),
                              laplacian_levels(target, model.pyramid_levels), weights);
      losses[static_cast<size_t>(b)] = terms.total.value().item();
      tape.backward(terms.total);
      grads[static_cast<size_t>(b)] = params.grads();
    });

    double loss = 0.0;
    for (double l : losses) loss += l;
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) {
      throw TrainingDiverged(it, "training diverged: non-finite loss at iteration " + std::to_string(it));
    }
    auto& total = grads[0];
    const float inv = 1.0f / static_cast<float>(batch.size());
    for (auto& [name, g] : total) {
      for (size_t b = 1; b < grads.size(); ++b) {
        const auto& gb = grads[b].at(name);
        for (int64_t i = 0; i < g.size(); ++i) g[i] += gb[i];
      }
      for (auto& v : g.data()) v *= inv;
    }
    adam_step(store, total, config, scheduled_lr(config, it - 1));
    loss_acc += loss;
    ++loss_count;

    const bool due = (config.eval_every > 0 && it % config.eval_every == 0) || it == config.iters;
    if (due) {
      const EvalSummary e = evaluate(store, model, holdout);
      CurveRow row{it, loss_acc / loss_count, e.psnr, e.ssim, e.delta_e};
      result.curve.push_back(row);
      loss_acc = 0.0;
      loss_count = 0;
      if (options.on_eval) options.on_eval(row);
      if (it == config.iters) result.final_eval = e;
    }
  }
  return result;
}

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "iter,loss,psnr,ssim,delta_e\n";
  char buf[160];
  for (const auto& r : curve) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g,%.10g\n", r.iter, r.loss, r.psnr, r.ssim, r.delta_e);
    f << buf;
  }
}

void write_eval_csv(const std::string& path, const EvalSummary& summary) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "image,psnr,ssim,delta_e\n";
  char buf[160];
  for (const auto& r : summary.rows) {
    std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%.10g\n", r.psnr, r.ssim, r.delta_e);
    f << r.name << buf;
  }
  std::snprintf(buf, sizeof buf, ",%.10g,%.10g,%.10g\n", summary.psnr, summary.ssim, summary.delta_e);
  f << "mean" << buf;
}

std::vector<ImagePair> toy_train_set(const TrainConfig& c) { return synthetic_corpus(c.corpus_size, c.image_size, c.seed, 0); }

std::vector<ImagePair> toy_holdout_set(const TrainConfig& c) {
  return synthetic_corpus(c.holdout_size, c.image_size, c.seed, 1'000'000);
}

std::pair<std::vector<ImagePair>, std::vector<ImagePair>> split_corpus(std::vector<ImagePair> pairs, int holdout) {
  if (pairs.empty()) throw std::invalid_argument("corpus is empty");
  if (pairs.size() == 1) return {pairs, pairs};
  const size_t n = pairs.size();
  const size_t k = std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(std::max(holdout, 1)), n / 4));
  std::vector<ImagePair> held(std::make_move_iterator(pairs.end() - static_cast<std::ptrdiff_t>(k)),
                              std::make_move_iterator(pairs.end()));
  pairs.resize(n - k);
  return {std::move(pairs), std::move(held)};
}

template std::vector<Var<float>> laplacian_levels(const Var<float>&, int);
template std::vector<Var<double>> laplacian_levels(const Var<double>&, int);
template LossTerms<float> loss_total(const Var<float>&, const Var<float>&, const std::vector<Var<float>>&,
                                     const std::vector<Var<float>>&, const LossWeights&);
template LossTerms<double> loss_total(const Var<double>&, const Var<double>&, const std::vector<Var<double>>&,
                                      const std::vector<Var<double>>&, const LossWeights&);
template void adam_step(ParamStore<float>&, const std::map<std::string, Tensor<float>>&, const TrainConfig&, double);
template void adam_step(ParamStore<double>&, const std::map<std::string, Tensor<double>>&, const TrainConfig&, double);

}  // namespace lalnet
