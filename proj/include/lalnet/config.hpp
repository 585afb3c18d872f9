#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lalnet {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Architecture hyperparameters. Widths: C = base_channels is the feature width of
// both branches; the colour-separated branch splits it into 3 groups of C/3.
struct ModelConfig {
  std::string preset = "tiny";
  int base_channels = 48;
  int lssm_blocks = 1;
  int expansion = 2;  // LSSM stream-1 width multiplier
  int state_dim = 16;
  int pyramid_levels = 3;
  double tau_init = 1.0;
  int heads = 3;
  int mlp_ratio = 2;
  int detail_channels = 16;  // hidden width of pyramid refinement and mask heads

  bool use_mcm = true;
  bool use_ddcm = true;
  bool use_lga = true;
  bool use_lssm = true;
  bool use_ss2d = true;
  bool gconv_separated = true;

  static ModelConfig preset_named(std::string_view name);
  void validate() const;

  int groups_width() const { return base_channels / 3; }
  int cab_hidden() const { return base_channels >= 4 ? base_channels / 4 : 1; }
};

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int iters = 2000;
  int batch = 4;
  int patch = 32;
  uint64_t seed = 1;
  int eval_every = 100;
  bool cosine_decay = false;

  // composite loss weights
  double alpha = 1.0;
  double beta = 0.5;
  double gamma_w = 0.5;
  double eta_w = 0.0;

  // synthetic corpus used when no data directory is given
  int corpus_size = 64;
  int holdout_size = 16;
  int image_size = 32;

  void validate() const;
};

struct SettingSpec {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every recognised `key = value` setting, model keys first.
const std::vector<SettingSpec>& setting_specs();

// Flat key/value settings. Parsing rejects unknown keys; a `preset` key is applied
// before any explicit overrides regardless of its position.
class Settings {
 public:
  static Settings parse(std::string_view text);

  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  bool has(const std::string& key) const { return get(key).has_value(); }
  /// Canonical text form: one `key = value` line per explicitly set key, in registry order.
  std::string to_text() const;

  ModelConfig model() const;
  TrainConfig train() const;

 private:
  std::vector<std::pair<std::string, std::string>> values_;
};

/// Writes a full model config as settings text.
std::string model_config_text(const ModelConfig& config);

}  // namespace lalnet
