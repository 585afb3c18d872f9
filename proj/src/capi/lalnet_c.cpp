#include "lalnet/lalnet.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "lalnet/analysis.hpp"
#include "lalnet/checkpoint.hpp"
#include "lalnet/grad_suite.hpp"
#include "lalnet/image_io.hpp"
#include "lalnet/training.hpp"

struct lalnet_model {
  lalnet::ModelConfig config;
  lalnet::ParamStore<float> store;
};

namespace {

namespace fs = std::filesystem;

thread_local std::string g_last_error;

int fail(int status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Maps library exceptions onto status codes at the API boundary.
template <class F>
int guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return LALNET_OK;
  } catch (const lalnet::ConfigError& e) {
    return fail(LALNET_E_CONFIG, e.what());
  } catch (const lalnet::TrainingDiverged& e) {
    return fail(LALNET_E_DIVERGED, e.what());
  } catch (const lalnet::CheckpointError& e) {
    return fail(e.kind() == lalnet::CheckpointError::Kind::io ? LALNET_E_IO : LALNET_E_FORMAT, e.what());
  } catch (const lalnet::ImageError& e) {
    return fail(e.kind() == lalnet::ImageError::Kind::io ? LALNET_E_IO : LALNET_E_FORMAT, e.what());
  } catch (const lalnet::ShapeError& e) {
    return fail(LALNET_E_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(LALNET_E_ARGUMENT, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(LALNET_E_IO, e.what());
  } catch (const std::exception& e) {
    const std::string what = e.what();
    const bool io = what.rfind("cannot ", 0) == 0 || what.rfind("not a directory", 0) == 0 ||
                    what.rfind("no images found", 0) == 0;
    return fail(io ? LALNET_E_IO : LALNET_E_INTERNAL, what);
  } catch (...) {
    return fail(LALNET_E_INTERNAL, "unknown error");
  }
}

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void require(const void* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " is null");
}

lalnet::Settings settings_of(const char* text) { return lalnet::Settings::parse(text ? text : ""); }

lalnet_metrics to_c(const lalnet::EvalSummary& s) { return {s.psnr, s.ssim, s.delta_e}; }

const lalnet::SettingSpec* spec_at(int i) {
  const auto& specs = lalnet::setting_specs();
  if (i < 0 || static_cast<size_t>(i) >= specs.size()) return nullptr;
  return &specs[static_cast<size_t>(i)];
}

struct Corpus {
  std::vector<lalnet::ImagePair> train;
  std::vector<lalnet::ImagePair> holdout;
  bool synthetic = false;
};

Corpus corpus_for(const char* data_path, const lalnet::TrainConfig& tc) {
  Corpus c;
  if (!data_path || !*data_path) {
    c.train = lalnet::toy_train_set(tc);
    c.holdout = lalnet::toy_holdout_set(tc);
    c.synthetic = true;
  } else {
    auto split = lalnet::split_corpus(lalnet::load_corpus(data_path, tc.seed), tc.holdout_size);
    c.train = std::move(split.first);
    c.holdout = std::move(split.second);
  }
  return c;
}

}  // namespace

extern "C" {

const char* lalnet_version(void) { return "1.0.0"; }

const char* lalnet_status_name(int status) {
  switch (status) {
    case LALNET_OK: return "ok";
    case LALNET_E_ARGUMENT: return "invalid argument";
    case LALNET_E_CONFIG: return "invalid configuration";
    case LALNET_E_IO: return "i/o error";
    case LALNET_E_FORMAT: return "format error";
    case LALNET_E_DIVERGED: return "training diverged";
    case LALNET_E_INTERNAL: return "internal error";
    default: return "unknown status";
  }
}

const char* lalnet_last_error(void) { return g_last_error.c_str(); }

int lalnet_setting_count(void) { return static_cast<int>(lalnet::setting_specs().size()); }
const char* lalnet_setting_key(int i) { return spec_at(i) ? spec_at(i)->key.c_str() : nullptr; }
const char* lalnet_setting_default(int i) { return spec_at(i) ? spec_at(i)->default_value.c_str() : nullptr; }
const char* lalnet_setting_help(int i) { return spec_at(i) ? spec_at(i)->help.c_str() : nullptr; }

int lalnet_settings_validate(const char* settings) {
  return guarded([&] {
    const auto s = settings_of(settings);
    s.model();
    s.train();
  });
}

int lalnet_model_create(const char* settings, lalnet_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const auto s = settings_of(settings);
    auto m = std::make_unique<lalnet_model>();
    m->config = s.model();
    m->store = lalnet::init_params<float>(m->config, s.train().seed);
    *out = m.release();
  });
}

int lalnet_model_load(const char* path, lalnet_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto ck = lalnet::load_checkpoint(path);
    *out = new lalnet_model{ck.config, std::move(ck.store)};
  });
}

int lalnet_model_save(const lalnet_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    lalnet::save_checkpoint(path, model->store, model->config);
  });
}

void lalnet_model_destroy(lalnet_model* model) { delete model; }

int lalnet_model_param_count(const lalnet_model* model, long long* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = static_cast<long long>(model->store.count());
  });
}

int lalnet_model_settings(const lalnet_model* model, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(model, "model");
    const std::string text = lalnet::model_config_text(model->config);
    if (needed) *needed = text.size() + 1;
    if (buf && cap >= text.size() + 1) std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

int lalnet_enhance(const lalnet_model* model, const float* image, int height, int width, float* out) {
  return guarded([&] {
    require(model, "model");
    require(image, "image");
    require(out, "out");
    if (height < 1 || width < 1) throw ArgumentError("image extents must be positive");
    const size_t n = 3 * static_cast<size_t>(height) * static_cast<size_t>(width);
    lalnet::Tensor<float> x({3, height, width}, std::vector<float>(image, image + n));
    const auto y = lalnet::enhance_image(model->store, model->config, x);
    std::memcpy(out, y.data().data(), n * sizeof(float));
  });
}

int lalnet_enhance_file(const lalnet_model* model, const char* in_path, const char* out_path) {
  return guarded([&] {
    require(model, "model");
    require(in_path, "in_path");
    require(out_path, "out_path");
    auto y = lalnet::enhance_image(model->store, model->config, lalnet::load_image(in_path));
    lalnet::save_image(y, out_path);
  });
}

int lalnet_train(const char* settings, const char* data_path, const lalnet_model* initial, const char* out_dir,
                 lalnet_progress_fn progress, void* user, lalnet_metrics* final_eval, lalnet_metrics* baseline,
                 lalnet_model** out) {
  return guarded([&] {
    if (out) *out = nullptr;
    const auto s = settings_of(settings);
    const lalnet::ModelConfig mc = initial ? initial->config : s.model();
    const lalnet::TrainConfig tc = s.train();
    if (initial) {
      const auto merged = lalnet::Settings::parse(lalnet::model_config_text(mc) + s.to_text()).model();
      if (lalnet::model_config_text(merged) != lalnet::model_config_text(mc)) {
        throw lalnet::ConfigError("model settings differ from the checkpoint being resumed");
      }
    }
    if (out_dir) fs::create_directories(out_dir);
    const Corpus corpus = corpus_for(data_path, tc);

    lalnet::TrainOptions opt;
    opt.resample_degradations = corpus.synthetic;
    if (initial) opt.initial = initial->store;
    if (progress) {
      opt.on_eval = [&](const lalnet::CurveRow& r) {
        const lalnet_metrics m{r.psnr, r.ssim, r.delta_e};
        progress(r.iter, r.loss, &m, user);
      };
    }
    auto result = lalnet::train(mc, tc, corpus.train, corpus.holdout, opt);
    if (out_dir) {
      const fs::path dir(out_dir);
      lalnet::save_checkpoint((dir / "checkpoint.lalnet").string(), result.store, mc);
      lalnet::write_curve_csv((dir / "curve.csv").string(), result.curve);
      lalnet::write_eval_csv((dir / "eval.csv").string(), result.final_eval);
      std::ofstream f(dir / "settings.txt", std::ios::trunc);
      f << lalnet::model_config_text(mc) << s.to_text();
    }
    if (final_eval) *final_eval = to_c(result.final_eval);
    if (baseline) *baseline = to_c(result.baseline);
    if (out) *out = new lalnet_model{mc, std::move(result.store)};
  });
}

int lalnet_evaluate(const lalnet_model* model, const char* data_path, unsigned long long seed, const char* csv_path,
                    lalnet_metrics* mean) {
  return guarded([&] {
    require(model, "model");
    require(data_path, "data_path");
    const auto pairs = lalnet::load_corpus(data_path, seed ? seed : lalnet::TrainConfig{}.seed);
    const auto summary = lalnet::evaluate(model->store, model->config, pairs);
    if (csv_path) lalnet::write_eval_csv(csv_path, summary);
    if (mean) *mean = to_c(summary);
  });
}

int lalnet_analyze(const char* dir, const char* csv_path, int levels, const char* spectra_dir, int* skipped) {
  return guarded([&] {
    require(dir, "dir");
    require(csv_path, "csv_path");
    const auto report = lalnet::corpus_report(dir, levels);
    lalnet::write_corpus_report(report, csv_path);
    if (spectra_dir) lalnet::write_spectra(dir, spectra_dir);
    if (skipped) *skipped = static_cast<int>(report.warnings.size());
  });
}

int lalnet_gradcheck(const char* filter, lalnet_gradcheck_fn report, void* user, double* max_error) {
  return guarded([&] {
    const auto results = lalnet::run_gradient_suite(filter ? filter : "");
    double worst = 0.0;
    for (const auto& r : results) {
      worst = std::max(worst, r.check.max_rel_error);
      if (report) {
        report(r.name.c_str(), r.group.c_str(), r.check.max_rel_error, static_cast<long long>(r.check.coords_checked),
               r.seconds, user);
      }
    }
    if (max_error) *max_error = worst;
  });
}

int lalnet_gradcheck_case_count(void) { return static_cast<int>(lalnet::gradient_case_names().size()); }

const char* lalnet_gradcheck_case_name(int i) {
  static const std::vector<std::string> names = lalnet::gradient_case_names();
  if (i < 0 || static_cast<size_t>(i) >= names.size()) return nullptr;
  return names[static_cast<size_t>(i)].c_str();
}

int lalnet_ablation_validate(const char* settings, const char* variants) {
  return guarded([&] {
    require(variants, "variants");
    lalnet::ablation_variants(variants, settings_of(settings).model());
  });
}

int lalnet_ablate(const char* settings, const char* variants, const char* data_path, const char* csv_path,
                  lalnet_ablation_fn report, void* user) {
  return guarded([&] {
    require(variants, "variants");
    const auto s = settings_of(settings);
    const lalnet::ModelConfig base = s.model();
    const lalnet::TrainConfig tc = s.train();
    const auto selected = lalnet::ablation_variants(variants, base);
    const Corpus corpus = corpus_for(data_path, tc);
    const auto rows = lalnet::run_ablation(selected, tc, corpus.train, corpus.holdout, corpus.synthetic, base);
    if (csv_path) lalnet::write_ablation_csv(csv_path, rows);
    if (report) {
      for (const auto& r : rows) {
        const lalnet_metrics m{r.psnr, r.ssim, r.delta_e};
        report(r.id.c_str(), r.description.c_str(), static_cast<long long>(r.params), &m, r.is_full ? 1 : 0,
               r.note.c_str(), user);
      }
    }
  });
}

}  // extern "C"
