#include "cli_plan.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lalnet/lalnet.h"

namespace fs = std::filesystem;

namespace lalnet::cli {

namespace {

struct SettingKey {
  std::string key;
  std::string default_value;
  std::string help;
  bool boolean;
};

std::vector<SettingKey> setting_keys() {
  std::vector<SettingKey> out;
  for (int i = 0; i < lalnet_setting_count(); ++i) {
    const std::string def = lalnet_setting_default(i);
    out.push_back({lalnet_setting_key(i), def, lalnet_setting_help(i), def == "true" || def == "false"});
  }
  return out;
}

bool is_known(const std::vector<SettingKey>& keys, const std::string& key) {
  return std::any_of(keys.begin(), keys.end(), [&](const SettingKey& k) { return k.key == key; });
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] void usage(const std::string& msg) { throw CliExit(2, msg); }

std::map<std::string, std::string> read_config_file(const std::string& path, const std::vector<SettingKey>& keys) {
  std::ifstream f(path);
  if (!f) usage("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) usage(path + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    if (!is_known(keys, key)) usage(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

void require_existing(const std::string& path, const std::string& flag) {
  if (!fs::exists(path)) usage(flag + ": no such file or directory '" + path + "'");
}

void require_writable_parent(const std::string& path, const std::string& flag) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) usage(flag + ": directory '" + parent.string() + "' does not exist");
}

// Setting flags shared by train and ablate.
struct SettingFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, std::pair<CLI::Option*, CLI::Option*>> toggles;  // key -> (on, off)
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* sub, const std::vector<SettingKey>& keys) {
    sub->add_option("--config", config_file, "settings file with 'key = value' lines")->check(CLI::ExistingFile);
    for (const auto& k : keys) {
      const std::string name = flag_name(k.key);
      if (k.boolean) {
        auto* on = sub->add_flag("--" + name)->description(k.help + " (default " + k.default_value + ")");
        auto* off = sub->add_flag("--no-" + name)->description("disable: " + k.help);
        on->excludes(off);
        off->excludes(on);
        toggles[k.key] = {on, off};
      } else {
        options[k.key] = sub->add_option("--" + name, values[k.key], k.help + " (default " + k.default_value + ")");
      }
    }
  }

  std::map<std::string, std::string> resolve(const std::vector<SettingKey>& keys) const {
    std::map<std::string, std::string> merged;
    if (!config_file.empty()) merged = read_config_file(config_file, keys);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) merged[key] = values.at(key);
    }
    for (const auto& [key, pair] : toggles) {
      if (pair.first->count() > 0) merged[key] = "true";
      if (pair.second->count() > 0) merged[key] = "false";
    }
    return merged;
  }
};

}  // namespace

std::string flag_name(const std::string& key) {
  std::string name = key.rfind("use_", 0) == 0 ? key.substr(4) : key;
  std::replace(name.begin(), name.end(), '_', '-');
  return name;
}

std::string CliPlan::settings_text() const {
  std::string text;
  for (const auto& [k, v] : settings) text += k + " = " + v + "\n";
  return text;
}

std::string CliPlan::get(const std::string& key, const std::string& fallback) const {
  auto it = settings.find(key);
  return it == settings.end() ? fallback : it->second;
}

CliPlan parse_and_plan(int argc, const char* const* argv) {
  const auto keys = setting_keys();
  CLI::App app{"lalnet: adaptive lighting enhancement (analyze, train, infer, eval, gradcheck, ablate)", "lalnet"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "expand help for all subcommands");

  CliPlan plan;
  SettingFlags train_flags, ablate_flags;

  auto* analyze = app.add_subcommand("analyze", "per-channel frequency energy report of an image directory");
  analyze->add_option("dir", plan.analyze_dir, "image directory")->required();
  analyze->add_option("--out", plan.out, "report CSV")->required();
  bool spectra = false;
  analyze->add_flag("--spectra", spectra, "also write log-magnitude spectra PNGs");
  analyze->add_option("--spectra-dir", plan.spectra_dir, "spectra directory (default: <out>_spectra)");
  analyze->add_option("--levels", plan.levels, "wavelet decomposition levels")->check(CLI::Range(1, 16));

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--data", plan.data, "manifest CSV or image directory (default: synthetic corpus)");
  train->add_option("--out", plan.out, "output directory")->required();
  train->add_option("--resume", plan.ckpt, "checkpoint to continue from");
  train_flags.attach(train, keys);

  auto* infer = app.add_subcommand("infer", "enhance one image");
  infer->add_option("--ckpt", plan.ckpt, "checkpoint")->required();
  infer->add_option("--in", plan.in, "input PNG or PFM")->required();
  infer->add_option("--out", plan.out, "output image (.png or .pfm)")->required();

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a corpus");
  eval->add_option("--ckpt", plan.ckpt, "checkpoint")->required();
  eval->add_option("--data", plan.data, "manifest CSV or image directory")->required();
  eval->add_option("--out", plan.out, "per-image CSV")->required();
  eval->add_option("--seed", plan.seed, "seed for on-the-fly degradation of clean-only directories");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every op and block");
  gradcheck->add_option("--op", plan.op, "case name, 'op', 'block' or 'all'");
  gradcheck->add_flag("--list", plan.list, "list case names");

  auto* ablate = app.add_subcommand("ablate", "train model variants under one budget and compare");
  ablate->add_option("--variants", plan.variants,
                     "comma list: #1..#6, components, levels, levels=N, conv, gconv, tconv, scan, ss2d, resblock, all")
      ->default_val("components,levels");
  ablate->add_option("--out", plan.out, "results CSV")->required();
  ablate->add_option("--data", plan.data, "manifest CSV or image directory (default: synthetic corpus)");
  ablate_flags.attach(ablate, keys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    std::ostringstream out, err;
    app.exit(e, out, err);
    throw CliExit(0, out.str());
  } catch (const CLI::ParseError& e) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    throw CliExit(2, std::string(e.what()) + "\nRun with --help for usage of '" +
                         (sub == &app ? std::string("lalnet") : sub->get_name()) + "'.");
  }

  const CLI::App* chosen = app.get_subcommands().front();
  plan.subcommand = chosen->get_name();

  if (plan.subcommand == "train" || plan.subcommand == "ablate") {
    plan.settings = (plan.subcommand == "train" ? train_flags : ablate_flags).resolve(keys);
    if (lalnet_settings_validate(plan.settings_text().c_str()) != LALNET_OK) usage(lalnet_last_error());
    plan.seed = std::stoull(plan.get("seed", "1"));
    if (!plan.data.empty()) require_existing(plan.data, "--data");
  }

  if (plan.subcommand == "analyze") {
    if (!fs::is_directory(plan.analyze_dir)) usage("analyze: '" + plan.analyze_dir + "' is not a directory");
    require_writable_parent(plan.out, "--out");
    if (!plan.spectra_dir.empty()) spectra = true;
    if (spectra && plan.spectra_dir.empty()) {
      const fs::path out(plan.out);
      plan.spectra_dir = (out.parent_path() / (out.stem().string() + "_spectra")).string();
    }
  } else if (plan.subcommand == "train") {
    if (!plan.ckpt.empty()) require_existing(plan.ckpt, "--resume");
    if (fs::exists(plan.out) && !fs::is_directory(plan.out)) usage("--out: '" + plan.out + "' is not a directory");
  } else if (plan.subcommand == "infer") {
    require_existing(plan.ckpt, "--ckpt");
    require_existing(plan.in, "--in");
    require_writable_parent(plan.out, "--out");
  } else if (plan.subcommand == "eval") {
    require_existing(plan.ckpt, "--ckpt");
    require_existing(plan.data, "--data");
    require_writable_parent(plan.out, "--out");
  } else if (plan.subcommand == "gradcheck") {
    if (!plan.op.empty() && plan.op != "all" && plan.op != "op" && plan.op != "block") {
      bool found = false;
      for (int i = 0; i < lalnet_gradcheck_case_count(); ++i) found = found || plan.op == lalnet_gradcheck_case_name(i);
      if (!found) usage("--op: unknown case '" + plan.op + "' (see gradcheck --list)");
    }
  } else if (plan.subcommand == "ablate") {
    require_writable_parent(plan.out, "--out");
    if (lalnet_ablation_validate(plan.settings_text().c_str(), plan.variants.c_str()) != LALNET_OK) {
      usage(std::string("--variants: ") + lalnet_last_error());
    }
  }
  return plan;
}

}  // namespace lalnet::cli
