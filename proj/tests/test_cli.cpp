#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli_plan.hpp"
#include "lalnet/config.hpp"
#include "lalnet/data.hpp"
#include "lalnet/image_io.hpp"
#include "test_util.hpp"

#ifndef LALNET_CLI_PATH
#error "LALNET_CLI_PATH must name the lalnet executable"
#endif

namespace lalnet {
namespace {

namespace fs = std::filesystem;
using cli::CliExit;
using cli::CliPlan;

CliPlan plan(std::vector<std::string> args) {
  args.insert(args.begin(), "lalnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::parse_and_plan(static_cast<int>(argv.size()), argv.data());
}

// Exit code and message of a rejected command line.
std::pair<int, std::string> rejected(std::vector<std::string> args) {
  try {
    plan(std::move(args));
  } catch (const CliExit& e) {
    return {e.code(), e.what()};
  }
  ADD_FAILURE() << "command line was accepted";
  return {-1, ""};
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = test::scratch_dir(std::string("cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir / "d");
    fs::create_directories(dir / "o");
  }
  std::string p(const std::string& rel) const { return (dir / rel).string(); }
};

TEST_F(CliTest, TrainPlanCarriesPresetAndIterations) {
  const auto pl = plan({"train", "--preset", "tiny", "--iters", "10", "--data", p("d/"), "--out", p("o/")});
  EXPECT_EQ(pl.subcommand, "train");
  EXPECT_EQ(pl.get("preset"), "tiny");
  EXPECT_EQ(pl.get("iters"), "10");
  EXPECT_EQ(pl.data, p("d/"));
  EXPECT_EQ(pl.out, p("o/"));
  const auto s = Settings::parse(pl.settings_text());
  EXPECT_EQ(s.train().iters, 10);
  EXPECT_EQ(s.model().base_channels, ModelConfig::preset_named("tiny").base_channels);
}

TEST_F(CliTest, DefaultsLeaveThreePyramidLevels) {
  const auto pl = plan({"train", "--out", p("o")});
  EXPECT_TRUE(pl.settings.empty());
  EXPECT_EQ(Settings::parse(pl.settings_text()).model().pyramid_levels, 3);
  EXPECT_EQ(pl.seed, 1u);
}

TEST_F(CliTest, ToggleFlagsMapToUseKeys) {
  EXPECT_EQ(cli::flag_name("use_lga"), "lga");
  EXPECT_EQ(cli::flag_name("gconv_separated"), "gconv-separated");
  EXPECT_EQ(cli::flag_name("eval_every"), "eval-every");
  const auto pl = plan({"train", "--out", p("o"), "--no-lga", "--ss2d"});
  EXPECT_EQ(pl.get("use_lga"), "false");
  EXPECT_EQ(pl.get("use_ss2d"), "true");
  EXPECT_FALSE(Settings::parse(pl.settings_text()).model().use_lga);
}

TEST_F(CliTest, ConfigFileIsOverriddenByFlags) {
  std::ofstream(p("run.cfg")) << "# toy run\niters = 5\nlr = 0.01\nuse_mcm = false\n";
  const auto pl = plan({"train", "--config", p("run.cfg"), "--iters", "7", "--out", p("o")});
  EXPECT_EQ(pl.get("iters"), "7");
  EXPECT_EQ(pl.get("lr"), "0.01");
  EXPECT_EQ(pl.get("use_mcm"), "false");
  const auto pl2 = plan({"ablate", "--config", p("run.cfg"), "--mcm", "--out", p("o/a.csv")});
  EXPECT_EQ(pl2.get("use_mcm"), "true");
  EXPECT_EQ(pl2.variants, "components,levels");
}

TEST_F(CliTest, UsageErrorsNameTheOffendingToken) {
  auto [code, msg] = rejected({"train", "--out", p("o"), "--lga", "--no-lga"});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("lga"), std::string::npos);

  std::tie(code, msg) = rejected({"train", "--out", p("o"), "--bogus", "3"});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("--bogus"), std::string::npos);

  std::tie(code, msg) = rejected({"train", "--out", p("o"), "--iters", "zero"});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("iters"), std::string::npos);

  std::tie(code, msg) = rejected({"train", "--out", p("o"), "--data", p("missing")});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("missing"), std::string::npos);

  std::ofstream(p("bad.cfg")) << "colour = blue\n";
  std::tie(code, msg) = rejected({"train", "--config", p("bad.cfg"), "--out", p("o")});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("colour"), std::string::npos);

  std::tie(code, msg) = rejected({"infer", "--in", p("x.png"), "--out", p("y.png")});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("--ckpt"), std::string::npos);

  std::tie(code, msg) = rejected({"infer", "--ckpt", p("none.lalnet"), "--in", p("x.png"), "--out", p("y.png")});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("none.lalnet"), std::string::npos);

  std::tie(code, msg) = rejected({"ablate", "--variants", "#9", "--out", p("a.csv")});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("#9"), std::string::npos);

  std::tie(code, msg) = rejected({"gradcheck", "--op", "nope"});
  EXPECT_EQ(code, 2);
  EXPECT_NE(msg.find("nope"), std::string::npos);

  std::tie(code, msg) = rejected({"analyze", p("missing"), "--out", p("r.csv")});
  EXPECT_EQ(code, 2);

  std::tie(code, msg) = rejected({"frobnicate"});
  EXPECT_EQ(code, 2);

  std::tie(code, msg) = rejected({});
  EXPECT_EQ(code, 2);
}

TEST_F(CliTest, HelpExitsZeroWithUsage) {
  auto [code, msg] = rejected({"--help"});
  EXPECT_EQ(code, 0);
  EXPECT_NE(msg.find("train"), std::string::npos);
  std::tie(code, msg) = rejected({"train", "--help"});
  EXPECT_EQ(code, 0);
  EXPECT_NE(msg.find("--pyramid-levels"), std::string::npos);
}

TEST_F(CliTest, AnalyzeDefaultsSpectraDirectoryNextToReport) {
  fs::create_directories(dir / "imgs");
  const auto pl = plan({"analyze", p("imgs"), "--out", p("o/report.csv"), "--spectra"});
  EXPECT_EQ(pl.spectra_dir, p("o/report_spectra"));
  EXPECT_EQ(pl.levels, 3);
  EXPECT_TRUE(plan({"analyze", p("imgs"), "--out", p("r.csv")}).spectra_dir.empty());
}

// ---- end to end through the executable ---------------------------------------

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + LALNET_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST_F(CliTest, ExitCodesPerSubcommand) {
  const auto log = dir / "log.txt";
  const std::string small = " --preset tiny --iters 1 --batch 1 --corpus-size 4 --holdout-size 2 --eval-every 0";

  // train
  ASSERT_EQ(run("train --out " + p("run") + small, log), 0) << slurp(log);
  const auto ckpt = p("run/checkpoint.lalnet");
  ASSERT_TRUE(fs::exists(ckpt));
  EXPECT_TRUE(fs::exists(p("run/curve.csv")));
  EXPECT_EQ(run("train --out " + p("run") + " --iters x", log), 2);

  // infer keeps image dimensions
  const auto img = synthetic_corpus(1, 8, 3)[0].clean;
  Tensor<float> odd({3, 37, 29});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t y = 0; y < 37; ++y)
      for (int64_t x = 0; x < 29; ++x) odd[(c * 37 + y) * 29 + x] = img[(c * 8 + y % 8) * 8 + x % 8];
  save_image(odd, p("in.png"));
  ASSERT_EQ(run("infer --ckpt " + ckpt + " --in " + p("in.png") + " --out " + p("out.png"), log), 0) << slurp(log);
  EXPECT_EQ(load_image(p("out.png")).shape(), (Shape{3, 37, 29}));
  EXPECT_EQ(run("infer --ckpt " + ckpt + " --in " + p("in.png") + " --out " + p("nodir/out.png"), log), 2);
  std::ofstream(p("junk.lalnet")) << "not a checkpoint";
  EXPECT_EQ(run("infer --ckpt " + p("junk.lalnet") + " --in " + p("in.png") + " --out " + p("o.png"), log), 1);
  EXPECT_NE(slurp(log).find("error"), std::string::npos);

  // eval over a clean-only directory
  fs::create_directories(dir / "clean");
  for (int i = 0; i < 2; ++i) save_image(synthetic_corpus(2, 32, 5)[static_cast<size_t>(i)].clean, p("clean/c" + std::to_string(i) + ".png"));
  ASSERT_EQ(run("eval --ckpt " + ckpt + " --data " + p("clean") + " --out " + p("eval.csv"), log), 0) << slurp(log);
  EXPECT_TRUE(fs::exists(p("eval.csv")));
  EXPECT_EQ(run("eval --ckpt " + p("junk.lalnet") + " --data " + p("clean") + " --out " + p("eval.csv"), log), 1);

  // analyze
  ASSERT_EQ(run("analyze " + p("clean") + " --out " + p("report.csv") + " --spectra", log), 0) << slurp(log);
  EXPECT_TRUE(fs::exists(p("report_spectra/c0_R_fft.png")));
  EXPECT_EQ(run("analyze " + p("d") + " --out " + p("empty.csv"), log), 1);  // no images inside

  // gradcheck
  EXPECT_EQ(run("gradcheck --op add", log), 0) << slurp(log);
  EXPECT_EQ(run("gradcheck --list", log), 0);
  EXPECT_NE(slurp(log).find("block_lssm"), std::string::npos);
  EXPECT_EQ(run("gradcheck --op none", log), 2);

  // ablate
  ASSERT_EQ(run("ablate --variants \"#4,#6\" --out " + p("ablate.csv") + small, log), 0) << slurp(log);
  const auto csv = slurp(p("ablate.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(slurp(log).find("directionality: full >= #4"), std::string::npos);
  EXPECT_EQ(run("ablate --variants \"#0\" --out " + p("ablate.csv"), log), 2);

  EXPECT_EQ(run("--help", log), 0);
  EXPECT_EQ(run("", log), 2);
}

}  // namespace
}  // namespace lalnet
