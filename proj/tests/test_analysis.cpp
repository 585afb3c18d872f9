#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "lalnet/analysis.hpp"
#include "lalnet/data.hpp"
#include "lalnet/image_io.hpp"
#include "test_util.hpp"

namespace lalnet {
namespace {

namespace fs = std::filesystem;

Tensor<double> checkerboard(int64_t h, int64_t w) {
  Tensor<double> t({3, h, w});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) t[(c * h + y) * w + x] = (x + y) % 2 == 0 ? 1.0 : 0.0;
  return t;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(ChannelEnergy, ConstantImageIsAllLowFrequency) {
  for (int levels : {1, 2, 3}) {
    const auto r = channel_energy_stats(Tensor<double>({3, 8, 8}, 0.4), levels);
    for (const auto& ch : r.channels) {
      EXPECT_NEAR(ch.low_energy, 1.0, 1e-12);
      EXPECT_NEAR(ch.high_energy, 0.0, 1e-12);
      EXPECT_NEAR(ch.mean, 0.4, 1e-12);
      EXPECT_FALSE(ch.degenerate);
    }
  }
}

TEST(ChannelEnergy, CheckerboardSplitsEvenly) {
  for (int levels : {1, 3}) {
    const auto r = channel_energy_stats(checkerboard(8, 8), levels);
    for (const auto& ch : r.channels) {
      EXPECT_NEAR(ch.low_energy, 0.5, 1e-12);
      EXPECT_NEAR(ch.high_energy, 0.5, 1e-12);
    }
  }
}

TEST(ChannelEnergy, FractionsSumToOneOnOddSizes) {
  std::mt19937_64 rng(3);
  const auto img = test::random_tensor({3, 7, 9}, rng, 0, 1);
  for (int levels : {1, 2, 4}) {
    const auto r = channel_energy_stats(img, levels);
    for (const auto& ch : r.channels) {
      EXPECT_NEAR(ch.low_energy + ch.high_energy, 1.0, 1e-12);
      EXPECT_GT(ch.low_energy, 0.0);
      EXPECT_GT(ch.high_energy, 0.0);
    }
  }
}

TEST(ChannelEnergy, ZeroChannelIsFlaggedDegenerate) {
  auto img = checkerboard(4, 4);
  for (int64_t i = 0; i < 16; ++i) img[16 + i] = 0.0;
  const auto r = channel_energy_stats(img);
  EXPECT_TRUE(r.channels[1].degenerate);
  EXPECT_EQ(r.channels[1].low_energy, 1.0);
  EXPECT_FALSE(r.channels[0].degenerate);
  EXPECT_THROW(channel_energy_stats(Tensor<double>({1, 4, 4})), ShapeError);
  EXPECT_THROW(channel_energy_stats(img, 0), std::invalid_argument);
}

TEST(Spectrum, ConstantImagePeaksAtCentre) {
  const auto s = spectrum_export(Tensor<float>({3, 8, 8}, 0.5f), 0);
  ASSERT_EQ(s.shape(), (Shape{8, 8}));
  for (int64_t i = 0; i < 64; ++i) EXPECT_NEAR(s[i], i == 4 * 8 + 4 ? 1.0 : 0.0, 1e-12);
}

TEST(Spectrum, CheckerboardPeaksAtCorner) {
  const auto s = spectrum_export(checkerboard(8, 8).cast<float>(), 2);
  // energy sits at DC (centre after the shift) and at the Nyquist frequency (corner)
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[4 * 8 + 4], 1.0, 1e-12);
  for (int64_t i = 1; i < 64; ++i) {
    if (i == 36) continue;
    EXPECT_NEAR(s[i], 0.0, 1e-9);
  }
}

TEST(Spectrum, PadsToPowerOfTwo) {
  EXPECT_EQ(spectrum_export(Tensor<float>({3, 5, 6}, 0.2f), 1).shape(), (Shape{8, 8}));
  EXPECT_THROW(spectrum_export(Tensor<float>({3, 4, 4}), 3), std::invalid_argument);
}

class CorpusReportTest : public ::testing::Test {
 protected:
  std::vector<ImagePair> pairs = synthetic_corpus(4, 8, 11);
  void write(const fs::path& dir, const std::vector<int>& order) {
    fs::create_directories(dir);
    for (int i : order) save_image(pairs[static_cast<size_t>(i)].clean, (dir / ("img" + std::to_string(i) + ".png")).string());
  }
};

TEST_F(CorpusReportTest, CsvIsDeterministicAndOrderInvariant) {
  const auto root = test::scratch_dir("corpus_perm");
  write(root / "a", {0, 1, 2, 3});
  write(root / "b", {3, 1, 0, 2});
  const auto ra = corpus_report((root / "a").string(), 2);
  const auto rb = corpus_report((root / "b").string(), 2);
  write_corpus_report(ra, (root / "a.csv").string());
  write_corpus_report(rb, (root / "b.csv").string());
  write_corpus_report(corpus_report((root / "a").string(), 2), (root / "a2.csv").string());
  const auto text = slurp(root / "a.csv");
  EXPECT_EQ(text, slurp(root / "b.csv"));
  EXPECT_EQ(text, slurp(root / "a2.csv"));
  EXPECT_EQ(ra.rows.size(), 12u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "file,channel,mean,low_energy,high_energy");
  EXPECT_NE(text.find("img0.png,R,"), std::string::npos);
  EXPECT_NE(text.find("img3.png,B,"), std::string::npos);
  EXPECT_FALSE(fs::exists(root / "a.csv.log"));

  // each row depends only on its own file
  write(root / "c", {2});
  const auto rc = corpus_report((root / "c").string(), 2);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(rc.rows[static_cast<size_t>(c)].energy.low_energy, ra.rows[static_cast<size_t>(6 + c)].energy.low_energy);
  }
}

TEST_F(CorpusReportTest, CorruptFilesAreSkippedWithLog) {
  const auto root = test::scratch_dir("corpus_corrupt");
  write(root / "d", {0, 1});
  std::ofstream(root / "d" / "broken.png") << "garbage";
  std::ofstream(root / "d" / "readme.txt") << "ignored";
  const auto r = corpus_report((root / "d").string());
  EXPECT_EQ(r.rows.size(), 6u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("broken.png"), std::string::npos);
  const auto csv = (root / "d.csv").string();
  write_corpus_report(r, csv);
  EXPECT_NE(slurp(csv + ".log").find("broken.png"), std::string::npos);

  fs::create_directories(root / "only_bad");
  std::ofstream(root / "only_bad" / "x.png") << "garbage";
  EXPECT_THROW(corpus_report((root / "only_bad").string()), std::runtime_error);
}

TEST_F(CorpusReportTest, SpectraWrittenPerChannel) {
  const auto root = test::scratch_dir("corpus_spectra");
  write(root / "e", {0});
  write_spectra((root / "e").string(), (root / "spectra").string());
  for (const char* c : {"R", "G", "B"}) {
    const auto p = root / "spectra" / (std::string("img0_") + c + "_fft.png");
    ASSERT_TRUE(fs::exists(p)) << p;
    EXPECT_EQ(load_image(p.string()).shape(), (Shape{3, 8, 8}));
  }
}

}  // namespace
}  // namespace lalnet
