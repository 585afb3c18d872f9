#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "cli_plan.hpp"
#include "lalnet/lalnet.h"

namespace {

using lalnet::cli::CliPlan;

int runtime_failure(const char* what) {
  std::fprintf(stderr, "error: %s: %s\n", what, lalnet_last_error());
  return 1;
}

int run_analyze(const CliPlan& plan) {
  int skipped = 0;
  const char* spectra = plan.spectra_dir.empty() ? nullptr : plan.spectra_dir.c_str();
  if (lalnet_analyze(plan.analyze_dir.c_str(), plan.out.c_str(), plan.levels, spectra, &skipped) != LALNET_OK) {
    return runtime_failure("analyze");
  }
  std::printf("wrote %s\n", plan.out.c_str());
  if (skipped > 0) std::printf("skipped %d unreadable file(s), see %s.log\n", skipped, plan.out.c_str());
  if (spectra) std::printf("spectra in %s\n", spectra);
  return 0;
}

void print_progress(int iter, double loss, const lalnet_metrics* m, void*) {
  std::printf("iter %6d  loss %.5f  psnr %.3f  ssim %.4f  delta_e %.3f\n", iter, loss, m->psnr, m->ssim, m->delta_e);
  std::fflush(stdout);
}

int run_train(const CliPlan& plan) {
  lalnet_model* initial = nullptr;
  if (!plan.ckpt.empty() && lalnet_model_load(plan.ckpt.c_str(), &initial) != LALNET_OK) {
    return runtime_failure("loading checkpoint");
  }
  lalnet_metrics final_eval{}, baseline{};
  const int status = lalnet_train(plan.settings_text().c_str(), plan.data.empty() ? nullptr : plan.data.c_str(), initial,
                                  plan.out.c_str(), print_progress, nullptr, &final_eval, &baseline, nullptr);
  lalnet_model_destroy(initial);
  if (status != LALNET_OK) return runtime_failure("train");
  std::printf("input baseline: psnr %.3f  ssim %.4f  delta_e %.3f\n", baseline.psnr, baseline.ssim, baseline.delta_e);
  std::printf("final held-out: psnr %.3f  ssim %.4f  delta_e %.3f\n", final_eval.psnr, final_eval.ssim,
              final_eval.delta_e);
  std::printf("wrote %s\n", (std::filesystem::path(plan.out) / "checkpoint.lalnet").string().c_str());
  return 0;
}

int run_infer(const CliPlan& plan) {
  lalnet_model* model = nullptr;
  if (lalnet_model_load(plan.ckpt.c_str(), &model) != LALNET_OK) return runtime_failure("loading checkpoint");
  const int status = lalnet_enhance_file(model, plan.in.c_str(), plan.out.c_str());
  lalnet_model_destroy(model);
  if (status != LALNET_OK) return runtime_failure("infer");
  std::printf("wrote %s\n", plan.out.c_str());
  return 0;
}

int run_eval(const CliPlan& plan) {
  lalnet_model* model = nullptr;
  if (lalnet_model_load(plan.ckpt.c_str(), &model) != LALNET_OK) return runtime_failure("loading checkpoint");
  lalnet_metrics mean{};
  const int status = lalnet_evaluate(model, plan.data.c_str(), plan.seed, plan.out.c_str(), &mean);
  lalnet_model_destroy(model);
  if (status != LALNET_OK) return runtime_failure("eval");
  std::printf("mean: psnr %.3f  ssim %.4f  delta_e %.3f\n", mean.psnr, mean.ssim, mean.delta_e);
  std::printf("wrote %s\n", plan.out.c_str());
  return 0;
}

void print_case(const char* name, const char* group, double err, long long coords, double seconds, void*) {
  std::printf("%-22s %-5s max_rel_error %.3e  coords %5lld  %6.2fs  %s\n", name, group, err, coords, seconds,
              err < 1e-4 ? "ok" : "FAIL");
  std::fflush(stdout);
}

int run_gradcheck(const CliPlan& plan) {
  if (plan.list) {
    for (int i = 0; i < lalnet_gradcheck_case_count(); ++i) std::printf("%s\n", lalnet_gradcheck_case_name(i));
    return 0;
  }
  double worst = 0.0;
  if (lalnet_gradcheck(plan.op.empty() ? nullptr : plan.op.c_str(), print_case, nullptr, &worst) != LALNET_OK) {
    return runtime_failure("gradcheck");
  }
  std::printf("worst max_rel_error %.3e (threshold 1e-4)\n", worst);
  return worst < 1e-4 ? 0 : 1;
}

struct AblationRow {
  std::string id;
  double psnr;
  bool full;
};

void collect_row(const char* id, const char* description, long long params, const lalnet_metrics* m, int is_full,
                 const char* note, void* user) {
  static_cast<std::vector<AblationRow>*>(user)->push_back({id, m->psnr, is_full != 0});
  std::printf("%-10s %-58s params %8lld  psnr %.3f  ssim %.4f  delta_e %.3f %s\n", id, description, params, m->psnr,
              m->ssim, m->delta_e, note);
}

int run_ablate(const CliPlan& plan) {
  std::vector<AblationRow> rows;
  if (lalnet_ablate(plan.settings_text().c_str(), plan.variants.c_str(), plan.data.empty() ? nullptr : plan.data.c_str(),
                    plan.out.c_str(), collect_row, &rows) != LALNET_OK) {
    return runtime_failure("ablate");
  }
  const AblationRow* full = nullptr;
  for (const auto& r : rows) {
    if (r.full) full = &r;
  }
  if (!full) {
    std::printf("directionality: no full-model row selected\n");
  } else {
    for (const auto& r : rows) {
      if (r.full) continue;
      const char* verdict = std::isnan(r.psnr) ? "n/a" : full->psnr >= r.psnr ? "yes" : "no";
      std::printf("directionality: full >= %s: %s\n", r.id.c_str(), verdict);
    }
  }
  std::printf("wrote %s\n", plan.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliPlan plan;
  try {
    plan = lalnet::cli::parse_and_plan(argc, argv);
  } catch (const lalnet::cli::CliExit& e) {
    std::fputs(e.what(), e.code() == 0 ? stdout : stderr);
    std::fputc('\n', e.code() == 0 ? stdout : stderr);
    return e.code();
  }
  if (plan.subcommand == "analyze") return run_analyze(plan);
  if (plan.subcommand == "train") return run_train(plan);
  if (plan.subcommand == "infer") return run_infer(plan);
  if (plan.subcommand == "eval") return run_eval(plan);
  if (plan.subcommand == "gradcheck") return run_gradcheck(plan);
  if (plan.subcommand == "ablate") return run_ablate(plan);
  std::fprintf(stderr, "unhandled subcommand %s\n", plan.subcommand.c_str());
  return 2;
}
