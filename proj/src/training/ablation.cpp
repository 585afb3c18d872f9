#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lalnet/training.hpp"

namespace lalnet {

namespace {

AblationVariant component_variant(int n, const ModelConfig& base) {
  ModelConfig c = base;
  std::string what;
  switch (n) {
    case 1:
      c.use_mcm = c.use_ddcm = c.use_lga = c.use_lssm = false;
      what = "baseline: all modules replaced by conv/residual blocks";
      break;
    case 2:
      c.use_mcm = false;
      what = "no MCM (conv block)";
      break;
    case 3:
      c.use_ddcm = false;
      what = "no DDCM (group conv)";
      break;
    case 4:
      c.use_lga = false;
      what = "no LGA (sum of features)";
      break;
    case 5:
      c.use_lssm = false;
      what = "no LSSM (residual blocks)";
      break;
    case 6:
      what = "full model";
      break;
    default:
      throw ConfigError("unknown ablation variant #" + std::to_string(n) + " (expected #1..#6)");
  }
  return {"#" + std::to_string(n), what, c};
}

AblationVariant levels(int n, const ModelConfig& base) {
  ModelConfig c = base;
  c.pyramid_levels = n;
  c.validate();
  return {"levels=" + std::to_string(n), std::to_string(n) + " pyramid levels", c};
}

AblationVariant conv_kind(bool grouped, const ModelConfig& base) {
  ModelConfig c = base;
  c.gconv_separated = grouped;
  return {grouped ? "gconv" : "tconv", grouped ? "grouped conv on colour-separated path" : "standard conv on colour-separated path", c};
}

AblationVariant scan_kind(bool ss2d, const ModelConfig& base) {
  ModelConfig c = base;
  c.use_ss2d = ss2d;
  return {ss2d ? "ss2d" : "resblock", ss2d ? "selective scan in LSSM" : "residual blocks in place of SS2D", c};
}

}  // namespace

std::vector<AblationVariant> ablation_variants(const std::string& selection, const ModelConfig& base) {
  std::vector<AblationVariant> out;
  std::stringstream ss(selection);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) continue;
    if (tok == "all") {
      for (int n = 1; n <= 6; ++n) out.push_back(component_variant(n, base));
      for (int n = 2; n <= 4; ++n) out.push_back(levels(n, base));
      out.push_back(conv_kind(true, base));
      out.push_back(conv_kind(false, base));
      out.push_back(scan_kind(true, base));
      out.push_back(scan_kind(false, base));
    } else if (tok == "components") {
      for (int n = 1; n <= 6; ++n) out.push_back(component_variant(n, base));
    } else if (tok.size() == 2 && tok[0] == '#' && tok[1] >= '1' && tok[1] <= '6') {
      out.push_back(component_variant(tok[1] - '0', base));
    } else if (tok == "levels") {
      for (int n = 2; n <= 4; ++n) out.push_back(levels(n, base));
    } else if (tok.rfind("levels=", 0) == 0) {
      try {
        out.push_back(levels(std::stoi(tok.substr(7)), base));
      } catch (const std::invalid_argument&) {
        throw ConfigError("bad ablation variant '" + tok + "'");
      }
    } else if (tok == "conv") {
      out.push_back(conv_kind(true, base));
      out.push_back(conv_kind(false, base));
    } else if (tok == "gconv" || tok == "tconv") {
      out.push_back(conv_kind(tok == "gconv", base));
    } else if (tok == "scan") {
      out.push_back(scan_kind(true, base));
      out.push_back(scan_kind(false, base));
    } else if (tok == "ss2d" || tok == "resblock") {
      out.push_back(scan_kind(tok == "ss2d", base));
    } else {
      throw ConfigError("unknown ablation variant '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("no ablation variants selected");
  return out;
}

std::vector<AblationRow> run_ablation(const std::vector<AblationVariant>& variants, const TrainConfig& config,
                                      const std::vector<ImagePair>& train_set, const std::vector<ImagePair>& holdout,
                                      bool resample_degradations, const ModelConfig& base) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::string base_key = model_config_text(base);
  std::map<std::string, AblationRow> trained;
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    const std::string key = model_config_text(v.config);
    auto it = trained.find(key);
    if (it == trained.end()) {
      AblationRow r;
      TrainConfig tc = config;
      tc.eval_every = 0;
      try {
        TrainOptions opt;
        opt.resample_degradations = resample_degradations;
        const auto res = train(v.config, tc, train_set, holdout, opt);
        r.psnr = res.final_eval.psnr;
        r.ssim = res.final_eval.ssim;
        r.delta_e = res.final_eval.delta_e;
      } catch (const TrainingDiverged& e) {
        r.psnr = r.ssim = r.delta_e = nan;
        r.note = e.what();
      }
      it = trained.emplace(key, r).first;
    }
    AblationRow row = it->second;
    row.id = v.id;
    row.description = v.description;
    row.params = param_count(v.config);
    row.is_full = key == base_key;
    rows.push_back(row);
  }
  double full_psnr = nan;
  for (const auto& r : rows) {
    if (r.is_full) full_psnr = r.psnr;
  }
  for (auto& r : rows) r.full_minus_psnr = full_psnr - r.psnr;
  return rows;
}

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "variant,description,params,psnr,ssim,delta_e,full_minus_psnr,note\n";
  char buf[240];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%lld,%.10g,%.10g,%.10g,%.10g,", static_cast<long long>(r.params), r.psnr, r.ssim,
                  r.delta_e, r.full_minus_psnr);
    f << r.id << ',' << '"' << r.description << '"' << buf << '"' << r.note << '"' << '\n';
  }
}

std::vector<std::string> ablation_directionality(const std::vector<AblationRow>& rows) {
  std::vector<std::string> out;
  const AblationRow* full = nullptr;
  for (const auto& r : rows) {
    if (r.is_full) full = &r;
  }
  if (!full) return {"no full-model row selected; directionality not available"};
  char buf[200];
  for (const auto& r : rows) {
    if (r.is_full) continue;
    const char* verdict = std::isnan(r.full_minus_psnr) ? "n/a" : r.full_minus_psnr >= 0 ? "yes" : "no";
    std::snprintf(buf, sizeof buf, "full >= %s: %s (psnr %.3f vs %.3f)", r.id.c_str(), verdict, full->psnr, r.psnr);
    out.push_back(buf);
  }
  return out;
}

}  // namespace lalnet
