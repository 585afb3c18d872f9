#include "lalnet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace lalnet {

ModelConfig ModelConfig::preset_named(std::string_view name) {
  ModelConfig c;
  if (name == "tiny") {
    c.preset = "tiny";
    return c;
  }
  if (name == "full") {
    c.preset = "full";
    c.base_channels = 108;
    c.lssm_blocks = 4;
    c.detail_channels = 32;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected tiny or full)");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid model config: " + msg); };
  if (base_channels <= 0 || base_channels % 3 != 0) {
    fail("base_channels must be a positive multiple of 3, got " + std::to_string(base_channels));
  }
  if (pyramid_levels < 2) fail("pyramid_levels must be >= 2, got " + std::to_string(pyramid_levels));
  if (expansion < 1) fail("expansion must be >= 1, got " + std::to_string(expansion));
  if (lssm_blocks < 1) fail("lssm_blocks must be >= 1, got " + std::to_string(lssm_blocks));
  if (state_dim < 1) fail("state_dim must be >= 1, got " + std::to_string(state_dim));
  if (heads < 1 || base_channels % heads != 0) {
    fail("base_channels " + std::to_string(base_channels) + " not divisible by heads " + std::to_string(heads));
  }
  if (mlp_ratio < 1) fail("mlp_ratio must be >= 1, got " + std::to_string(mlp_ratio));
  if (detail_channels < 1) fail("detail_channels must be >= 1, got " + std::to_string(detail_channels));
  if (!std::isfinite(tau_init)) fail("tau_init must be finite");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid train config: " + msg); };
  if (!(lr > 0)) fail("lr must be > 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) fail("beta1/beta2 must lie in [0,1)");
  if (!(eps > 0)) fail("eps must be > 0");
  if (iters < 1) fail("iters must be >= 1, got " + std::to_string(iters));
  if (batch < 1) fail("batch must be >= 1, got " + std::to_string(batch));
  if (patch < 4) fail("patch must be >= 4, got " + std::to_string(patch));
  if (eval_every < 0) fail("eval_every must be >= 0");
  if (alpha < 0 || beta < 0 || gamma_w < 0 || eta_w < 0) fail("loss weights must be >= 0");
  if (eta_w > 0) fail("eta_w > 0 requires a perceptual feature network, which is not available");
  if (corpus_size < 1 || holdout_size < 1) fail("corpus_size and holdout_size must be >= 1");
  if (image_size < patch) fail("image_size must be >= patch");
}

const std::vector<SettingSpec>& setting_specs() {
  static const std::vector<SettingSpec> specs = {
      {"preset", "tiny", "model preset: tiny or full"},
      {"base_channels", "48", "feature width C (multiple of 3)"},
      {"lssm_blocks", "1", "number of LSSM blocks"},
      {"expansion", "2", "LSSM stream-1 expansion factor"},
      {"state_dim", "16", "SS2D hidden state size N"},
      {"pyramid_levels", "3", "pyramid levels L"},
      {"tau_init", "1", "initial attention temperature per head"},
      {"heads", "3", "attention heads"},
      {"mlp_ratio", "2", "LSSM MLP hidden ratio"},
      {"detail_channels", "16", "hidden width of pyramid refinement and mask heads"},
      {"use_mcm", "true", "wavelet mixed-channel branch"},
      {"use_ddcm", "true", "dual-domain colour-separated branch"},
      {"use_lga", "true", "guided attention fusion"},
      {"use_lssm", "true", "state-space blocks"},
      {"use_ss2d", "true", "selective scans inside LSSM (false: residual conv blocks)"},
      {"gconv_separated", "true", "grouped convolutions on the colour-separated path"},
      {"lr", "0.0001", "Adam learning rate"},
      {"beta1", "0.9", "Adam beta1"},
      {"beta2", "0.999", "Adam beta2"},
      {"eps", "1e-08", "Adam epsilon"},
      {"iters", "2000", "training iterations"},
      {"batch", "4", "patches per iteration"},
      {"patch", "32", "training patch size"},
      {"seed", "1", "random seed"},
      {"eval_every", "100", "held-out evaluation interval (0: final only)"},
      {"cosine_decay", "false", "cosine learning-rate decay to zero"},
      {"alpha", "1", "reconstruction (L1) loss weight"},
      {"beta", "0.5", "SSIM loss weight"},
      {"gamma_w", "0.5", "high-frequency loss weight"},
      {"eta_w", "0", "perceptual loss weight (unsupported, must be 0)"},
      {"corpus_size", "64", "synthetic training images"},
      {"holdout_size", "16", "synthetic held-out images"},
      {"image_size", "32", "synthetic image size"},
  };
  return specs;
}

namespace {

bool known_key(const std::string& key) {
  const auto& s = setting_specs();
  return std::any_of(s.begin(), s.end(), [&](const SettingSpec& spec) { return spec.key == key; });
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
  return out;
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("key '" + key + "': expected unsigned integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

}  // namespace

Settings Settings::parse(std::string_view text) {
  Settings s;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    s.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return s;
}

void Settings::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw ConfigError("unknown key '" + key + "'");
  for (auto& [k, v] : values_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  values_.emplace_back(key, value);
}

std::optional<std::string> Settings::get(const std::string& key) const {
  for (const auto& [k, v] : values_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string Settings::to_text() const {
  std::string out;
  for (const auto& spec : setting_specs()) {
    if (auto v = get(spec.key)) out += spec.key + " = " + *v + "\n";
  }
  return out;
}

ModelConfig Settings::model() const {
  ModelConfig c = ModelConfig::preset_named(get("preset").value_or("tiny"));
  auto with = [&](const char* key, auto apply) {
    if (auto v = get(key)) apply(std::string(key), *v);
  };
  with("base_channels", [&](auto k, auto v) { c.base_channels = to_int(k, v); });
  with("lssm_blocks", [&](auto k, auto v) { c.lssm_blocks = to_int(k, v); });
  with("expansion", [&](auto k, auto v) { c.expansion = to_int(k, v); });
  with("state_dim", [&](auto k, auto v) { c.state_dim = to_int(k, v); });
  with("pyramid_levels", [&](auto k, auto v) { c.pyramid_levels = to_int(k, v); });
  with("tau_init", [&](auto k, auto v) { c.tau_init = to_double(k, v); });
  with("heads", [&](auto k, auto v) { c.heads = to_int(k, v); });
  with("mlp_ratio", [&](auto k, auto v) { c.mlp_ratio = to_int(k, v); });
  with("detail_channels", [&](auto k, auto v) { c.detail_channels = to_int(k, v); });
  with("use_mcm", [&](auto k, auto v) { c.use_mcm = to_bool(k, v); });
  with("use_ddcm", [&](auto k, auto v) { c.use_ddcm = to_bool(k, v); });
  with("use_lga", [&](auto k, auto v) { c.use_lga = to_bool(k, v); });
  with("use_lssm", [&](auto k, auto v) { c.use_lssm = to_bool(k, v); });
  with("use_ss2d", [&](auto k, auto v) { c.use_ss2d = to_bool(k, v); });
  with("gconv_separated", [&](auto k, auto v) { c.gconv_separated = to_bool(k, v); });
  c.validate();
  return c;
}

TrainConfig Settings::train() const {
  TrainConfig c;
  auto with = [&](const char* key, auto apply) {
    if (auto v = get(key)) apply(std::string(key), *v);
  };
  with("lr", [&](auto k, auto v) { c.lr = to_double(k, v); });
  with("beta1", [&](auto k, auto v) { c.beta1 = to_double(k, v); });
  with("beta2", [&](auto k, auto v) { c.beta2 = to_double(k, v); });
  with("eps", [&](auto k, auto v) { c.eps = to_double(k, v); });
  with("iters", [&](auto k, auto v) { c.iters = to_int(k, v); });
  with("batch", [&](auto k, auto v) { c.batch = to_int(k, v); });
  with("patch", [&](auto k, auto v) { c.patch = to_int(k, v); });
  with("seed", [&](auto k, auto v) { c.seed = to_u64(k, v); });
  with("eval_every", [&](auto k, auto v) { c.eval_every = to_int(k, v); });
  with("cosine_decay", [&](auto k, auto v) { c.cosine_decay = to_bool(k, v); });
  with("alpha", [&](auto k, auto v) { c.alpha = to_double(k, v); });
  with("beta", [&](auto k, auto v) { c.beta = to_double(k, v); });
  with("gamma_w", [&](auto k, auto v) { c.gamma_w = to_double(k, v); });
  with("eta_w", [&](auto k, auto v) { c.eta_w = to_double(k, v); });
  with("corpus_size", [&](auto k, auto v) { c.corpus_size = to_int(k, v); });
  with("holdout_size", [&](auto k, auto v) { c.holdout_size = to_int(k, v); });
  with("image_size", [&](auto k, auto v) { c.image_size = to_int(k, v); });
  c.validate();
  return c;
}

std::string model_config_text(const ModelConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  std::string out;
  out += "preset = " + c.preset + "\n";
  out += "base_channels = " + std::to_string(c.base_channels) + "\n";
  out += "lssm_blocks = " + std::to_string(c.lssm_blocks) + "\n";
  out += "expansion = " + std::to_string(c.expansion) + "\n";
  out += "state_dim = " + std::to_string(c.state_dim) + "\n";
  out += "pyramid_levels = " + std::to_string(c.pyramid_levels) + "\n";
  out += "tau_init = " + fmt_double(c.tau_init) + "\n";
  out += "heads = " + std::to_string(c.heads) + "\n";
  out += "mlp_ratio = " + std::to_string(c.mlp_ratio) + "\n";
  out += "detail_channels = " + std::to_string(c.detail_channels) + "\n";
  out += "use_mcm = " + b(c.use_mcm) + "\n";
  out += "use_ddcm = " + b(c.use_ddcm) + "\n";
  out += "use_lga = " + b(c.use_lga) + "\n";
  out += "use_lssm = " + b(c.use_lssm) + "\n";
  out += "use_ss2d = " + b(c.use_ss2d) + "\n";
  out += "gconv_separated = " + b(c.gconv_separated) + "\n";
  return out;
}

}  // namespace lalnet
