#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "lalnet/checkpoint.hpp"
#include "lalnet/model.hpp"
#include "lalnet/ops.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace lalnet {
namespace {

using test::random_tensor;

ModelConfig small_config() {
  ModelConfig c;
  c.base_channels = 6;
  c.heads = 3;
  c.state_dim = 4;
  c.detail_channels = 4;
  c.pyramid_levels = 2;
  return c;
}

// Parameters for the given specs with constant-initialised entries jittered, so that
// zero-initialised heads do not hide anything.
ParamStore<double> jittered(const arch::Specs& specs, uint64_t seed) {
  auto store = init_from_specs<double>(specs, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  for (const auto& s : specs) {
    if (s.init != InitKind::constant) continue;
    for (auto& v : store.at(s.name).data()) v += d(rng);
  }
  return store;
}

double max_abs_diff(const Tensor<double>& a, const Tensor<double>& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double m = 0;
  for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Params, PresetCountsMatchClosedForm) {
  for (const char* name : {"tiny", "full"}) {
    const auto c = ModelConfig::preset_named(name);
    EXPECT_EQ(param_count(c), oracle::param_count(c)) << name;
  }
  EXPECT_EQ(param_count(ModelConfig::preset_named("tiny")), 232644);
  EXPECT_EQ(param_count(ModelConfig::preset_named("full")), 2296839);
}

TEST(Params, VariantCountsMatchClosedForm) {
  auto base = small_config();
  std::vector<ModelConfig> variants(8, base);
  variants[0].use_ddcm = false;
  variants[1].use_mcm = false;
  variants[2].use_lga = false;
  variants[3].use_lssm = false;
  variants[4].use_ss2d = false;
  variants[5].gconv_separated = false;
  variants[6].pyramid_levels = 4;
  variants[7].lssm_blocks = 3;
  for (const auto& c : variants) EXPECT_EQ(param_count(c), oracle::param_count(c)) << model_config_text(c);
}

TEST(Params, InitIsDeterministicAndSeedDependent) {
  const auto c = small_config();
  EXPECT_TRUE(init_params<double>(c, 5) == init_params<double>(c, 5));
  EXPECT_FALSE(init_params<double>(c, 5) == init_params<double>(c, 6));
}

TEST(Params, TensorsDrawFromIndependentStreams) {
  // Adding a block must not change the values of any tensor that existed before.
  auto c = small_config();
  auto more = c;
  more.lssm_blocks = 2;
  const auto a = init_params<double>(c, 9), b = init_params<double>(more, 9);
  for (const auto& [name, t] : a.tensors()) EXPECT_EQ(t, b.at(name)) << name;
}

TEST(Params, MissingParameterNamesTheEntry) {
  ParamStore<double> empty;
  Tape<double> tape;
  ParamBinding<double> p(tape, empty);
  try {
    p("lga.tau");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lga.tau"), std::string::npos);
  }
}

TEST(Model, IdentityAtInitTinyPreset) {
  const auto c = ModelConfig::preset_named("tiny");
  const auto store = init_params<double>(c, 3);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    Tape<double> tape;
    ParamBinding<double> p(tape, store);
    const auto x0 = random_tensor({1, 3, 32, 32}, rng, 0, 1);
    auto y = lalnet_forward(p, c, tape.constant(x0));
    EXPECT_LE(max_abs_diff(y.value(), x0), 1e-5);
    EXPECT_TRUE(p.unused().empty());
  }
}

TEST(Model, EveryVariantUsesAllItsParameters) {
  auto base = small_config();
  for (int v = 0; v < 6; ++v) {
    auto c = base;
    if (v == 0) c.use_ddcm = false;
    if (v == 1) c.use_mcm = false;
    if (v == 2) c.use_lga = false;
    if (v == 3) c.use_lssm = false;
    if (v == 4) c.use_ss2d = false;
    if (v == 5) c.gconv_separated = false;
    const auto store = init_params<double>(c, 1);
    Tape<double> tape;
    ParamBinding<double> p(tape, store);
    lalnet_forward(p, c, tape.constant(Tensor<double>({1, 3, 16, 16}, 0.5)));
    EXPECT_TRUE(p.unused().empty()) << model_config_text(c);
  }
}

TEST(Model, RejectsBadExtents) {
  const auto c = small_config();
  const auto store = init_params<double>(c, 1);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  EXPECT_THROW(lalnet_forward(p, c, tape.constant(Tensor<double>({1, 3, 18, 16}))), ShapeError);
  EXPECT_THROW(lalnet_forward(p, c, tape.constant(Tensor<double>({1, 3, 24, 16}))), ShapeError);  // low 6
  EXPECT_THROW(lalnet_forward(p, c, tape.constant(Tensor<double>({1, 4, 16, 16}))), ShapeError);
}

TEST(Model, PaddedExtentIsSmallestAcceptedSize) {
  const auto c = small_config();  // L = 2, so unit 4, low extent a power of two >= 2
  EXPECT_EQ(padded_extent(c, 1), 8);
  EXPECT_EQ(padded_extent(c, 8), 8);
  EXPECT_EQ(padded_extent(c, 9), 16);
  EXPECT_EQ(padded_extent(c, 17), 32);
  for (int64_t n = 1; n < 80; ++n) {
    const int64_t p = padded_extent(c, n);
    EXPECT_GE(p, n);
    const int64_t low = p / 4;
    EXPECT_EQ(p % 4, 0);
    EXPECT_EQ(low & (low - 1), 0);
  }
}

TEST(Model, EnhanceImageKeepsOddSizes) {
  const auto c = small_config();
  const auto store = init_params<double>(c, 2);
  std::mt19937_64 rng(8);
  const auto img = random_tensor({3, 13, 7}, rng, 0, 1);
  const auto out = enhance_image(store, c, img);
  EXPECT_EQ(out.shape(), img.shape());
  EXPECT_LE(max_abs_diff(out, img), 1e-9);  // identity at init survives pad and crop
}

TEST(Blocks, DdcmPreCabHasNoCrossColourGradient) {
  const auto c = small_config();
  arch::Specs specs;
  arch::ddcm_specs(specs, "d", c);
  const auto store = jittered(specs, 21);
  std::mt19937_64 rng(22);
  const int64_t per = c.groups_width();
  for (int g = 0; g < 3; ++g) {
    Tape<double> tape;
    ParamBinding<double> p(tape, store);
    auto x = tape.parameter(random_tensor({1, 3, 8, 8}, rng));
    auto y = arch::ddcm_pre_cab(p, "d", x);
    Tensor<double> seed(y.shape());
    for (int64_t ch = g * per; ch < (g + 1) * per; ++ch)
      for (int64_t i = 0; i < 64; ++i) seed[ch * 64 + i] = 1.0 + 0.01 * static_cast<double>(i);
    tape.backward(y, seed);
    const auto gx = x.grad();
    double own = 0;
    for (int colour = 0; colour < 3; ++colour)
      for (int64_t i = 0; i < 64; ++i) {
        const double v = gx[colour * 64 + i];
        if (colour == g) {
          own = std::max(own, std::abs(v));
        } else {
          EXPECT_EQ(v, 0.0) << "group " << g << " colour " << colour;
        }
      }
    EXPECT_GT(own, 0.0);
  }
}

TEST(Blocks, CabWithZeroWeightsHalvesInput) {
  arch::Specs specs;
  arch::cab_specs(specs, "cab", 6, 2);
  ParamStore<double> store;
  for (const auto& s : specs) store.insert(s.name, Tensor<double>(s.shape, 0.0));
  std::mt19937_64 rng(3);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  const auto x0 = random_tensor({2, 6, 4, 4}, rng);
  const auto y = arch::cab(p, "cab", tape.constant(x0)).value();
  for (int64_t i = 0; i < x0.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 0.5 * x0[i]);
}

TEST(Blocks, CabGateIsBoundedAndPerChannel) {
  arch::Specs specs;
  arch::cab_specs(specs, "cab", 6, 2);
  const auto store = jittered(specs, 4);
  std::mt19937_64 rng(5);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  const auto x0 = random_tensor({1, 6, 4, 4}, rng, 0.5, 1.5);  // strictly positive, so y/x is the gate
  const auto y = arch::cab(p, "cab", tape.constant(x0)).value();
  for (int64_t ch = 0; ch < 6; ++ch) {
    const double g0 = y[ch * 16] / x0[ch * 16];
    EXPECT_GT(g0, 0.0);
    EXPECT_LT(g0, 1.0);
    for (int64_t i = 1; i < 16; ++i) EXPECT_NEAR(y[ch * 16 + i] / x0[ch * 16 + i], g0, 1e-12);
  }
}

TEST(Blocks, McmIsLinearAndKeepsExtent) {
  const auto c = small_config();
  arch::Specs specs;
  arch::mcm_specs(specs, "m", c);
  auto store = jittered(specs, 6);
  for (const auto& s : specs) {
    if (s.name.find(".bias") != std::string::npos) store.at(s.name) = Tensor<double>(store.at(s.name).shape());
  }
  std::mt19937_64 rng(7);
  const auto a = random_tensor({1, 3, 8, 8}, rng), b = random_tensor({1, 3, 8, 8}, rng);
  auto run = [&](const Tensor<double>& x) {
    Tape<double> tape;
    ParamBinding<double> p(tape, store);
    return arch::mcm(p, "m", tape.constant(x)).value();
  };
  Tensor<double> mix(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) mix[i] = 2.0 * a[i] - 0.5 * b[i];
  const auto ya = run(a), yb = run(b), ym = run(mix);
  EXPECT_EQ(ym.shape(), (Shape{1, c.base_channels, 8, 8}));
  for (int64_t i = 0; i < ym.size(); ++i) EXPECT_NEAR(ym[i], 2.0 * ya[i] - 0.5 * yb[i], 1e-12);
}

TEST(Blocks, ScanOrderVisitsEveryPixelOnce) {
  for (int k = 0; k < 4; ++k) {
    auto order = arch::scan_order(k, 3, 5);
    std::sort(order.begin(), order.end());
    for (int64_t i = 0; i < 15; ++i) EXPECT_EQ(order[static_cast<size_t>(i)], i);
  }
  EXPECT_EQ(arch::scan_order(2, 2, 3), (std::vector<int64_t>{0, 3, 1, 4, 2, 5}));
  EXPECT_THROW(arch::scan_order(4, 2, 2), std::invalid_argument);
}

TEST(Blocks, Ss2dMatchesSequentialReference) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int64_t D = 1 + trial % 8;
    arch::Specs specs;
    arch::ss2d_specs(specs, "s", D, 3);
    const auto store = jittered(specs, 100 + static_cast<uint64_t>(trial));
    Tape<double> tape;
    ParamBinding<double> p(tape, store);
    const auto x0 = random_tensor({1, D, 4, 4}, rng);
    const auto y = arch::ss2d(p, "s", tape.constant(x0)).value();
    const auto ref = oracle::ss2d_reference(store, "s", x0);
    for (int64_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[static_cast<size_t>(i)], 1e-10);
  }
}

TEST(Blocks, Ss2dForwardDirectionIsCausal) {
  arch::Specs specs;
  arch::ss2d_specs(specs, "s", 4, 3);
  const auto store = jittered(specs, 41);
  std::mt19937_64 rng(42);
  const auto x0 = random_tensor({1, 4, 4, 4}, rng);
  auto forward0 = [&](const Tensor<double>& x) {
    Tape<double> tape;
    ParamBinding<double> p(tape, store);
    return arch::ss2d_directions(p, "s", tape.constant(x))[0].value();
  };
  const auto base = forward0(x0);
  for (int64_t t = 0; t < 16; ++t) {
    auto x1 = x0;
    for (int64_t ch = 0; ch < 4; ++ch) x1[ch * 16 + t] += 0.7;
    const auto y = forward0(x1);
    bool later_changed = false;
    for (int64_t ch = 0; ch < 4; ++ch)
      for (int64_t s = 0; s < 16; ++s) {
        const double d = y[ch * 16 + s] - base[ch * 16 + s];
        if (s < t) {
          EXPECT_EQ(d, 0.0) << "pixel " << s << " moved by perturbing " << t;
        } else if (d != 0.0) {
          later_changed = true;
        }
      }
    EXPECT_TRUE(later_changed);
  }
}

TEST(Blocks, LssmAddsBranchToColourMixedFeatures) {
  auto c = small_config();
  for (bool use_lssm : {true, false}) {
    c.use_lssm = use_lssm;
    arch::Specs specs;
    arch::lssm_specs(specs, "b", c);
    const auto store = jittered(specs, 51);
    std::mt19937_64 rng(52);
    const auto cm = random_tensor({1, 6, 4, 4}, rng), cs = random_tensor({1, 6, 4, 4}, rng);
    Tape<double> tape;
    ParamBinding<double> p(tape, store);
    auto vcm = tape.constant(cm), vcs = tape.constant(cs);
    const auto branch = arch::lssm_branch(p, "b", c, vcm, vcs).value();
    const auto full = arch::lssm(p, "b", c, vcm, vcs).value();
    for (int64_t i = 0; i < cm.size(); ++i) EXPECT_NEAR(full[i], cm[i] + branch[i], 1e-12);
    EXPECT_TRUE(p.unused().empty());
  }
}

TEST(Blocks, LssmRejectsMismatchedStreams) {
  const auto c = small_config();
  arch::Specs specs;
  arch::lssm_specs(specs, "b", c);
  const auto store = init_from_specs<double>(specs, 1);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  EXPECT_THROW(arch::lssm(p, "b", c, tape.constant(Tensor<double>({1, 6, 4, 4})),
                          tape.constant(Tensor<double>({1, 6, 2, 4}))),
               ShapeError);
}

TEST(Blocks, LgaAttentionRowsAreDistributions) {
  const auto c = small_config();
  arch::Specs specs;
  arch::lga_specs(specs, "g", c);
  const auto store = jittered(specs, 61);
  std::mt19937_64 rng(62);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  arch::AttentionTrace<double> trace;
  arch::lga(p, "g", c, tape.constant(random_tensor({2, 6, 4, 4}, rng)), tape.constant(random_tensor({2, 6, 4, 4}, rng)),
            &trace);
  const auto& a = trace.attention.value();
  ASSERT_EQ(a.shape(), (Shape{6, 2, 2}));
  for (int64_t r = 0; r < 12; ++r) {
    EXPECT_NEAR(a[r * 2] + a[r * 2 + 1], 1.0, 1e-12);
    EXPECT_GT(a[r * 2], 0.0);
  }
}

TEST(Blocks, LgaMatchesDenseOracle) {
  // With zero temperature every row is uniform, so the mixed features are the per-head
  // channel mean of V, and V is computable from the kv convolutions applied by hand.
  auto c = small_config();
  c.tau_init = 0.0;
  arch::Specs specs;
  arch::lga_specs(specs, "g", c);
  auto store = jittered(specs, 71);
  store.at("g.tau") = Tensor<double>({c.heads});
  std::mt19937_64 rng(72);
  const auto cm = random_tensor({1, 6, 4, 4}, rng), cs = random_tensor({1, 6, 4, 4}, rng);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  arch::AttentionTrace<double> trace;
  arch::lga(p, "g", c, tape.constant(cm), tape.constant(cs), &trace);
  for (double v : trace.attention.value().data()) EXPECT_NEAR(v, 0.5, 1e-15);

  // V = depthwise3x3(reflect)(pointwise(cm)) restricted to the second half of the kv channels
  const auto& wkv = store.at("g.kv.weight");
  const auto& bkv = store.at("g.kv.bias");
  const auto& wdw = store.at("g.kv_dw.weight");
  const auto& bdw = store.at("g.kv_dw.bias");
  auto reflect = [](int64_t i, int64_t n) { return i < 0 ? -i : i >= n ? 2 * n - 2 - i : i; };
  std::vector<double> pw(12 * 16);
  for (int64_t o = 0; o < 12; ++o)
    for (int64_t s = 0; s < 16; ++s) {
      double acc = bkv[o];
      for (int64_t i = 0; i < 6; ++i) acc += wkv[o * 6 + i] * cm[i * 16 + s];
      pw[static_cast<size_t>(o * 16 + s)] = acc;
    }
  auto v_at = [&](int64_t ch, int64_t y, int64_t x) {
    const int64_t o = 6 + ch;
    double acc = bdw[o];
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        acc += wdw[o * 9 + (dy + 1) * 3 + (dx + 1)] * pw[static_cast<size_t>(o * 16 + reflect(y + dy, 4) * 4 + reflect(x + dx, 4))];
    return acc;
  };
  const auto& mixed = trace.mixed.value();
  for (int64_t ch = 0; ch < 6; ++ch) {
    const int64_t head = ch / 2;
    for (int64_t y = 0; y < 4; ++y)
      for (int64_t x = 0; x < 4; ++x) {
        const double expect = 0.5 * (v_at(2 * head, y, x) + v_at(2 * head + 1, y, x));
        EXPECT_NEAR(mixed.at(0, ch, y, x), expect, 1e-12);
      }
  }
}

TEST(Blocks, PyramidReconstructsInputAtInit) {
  const auto c = small_config();
  arch::Specs specs;
  arch::ldp_specs(specs, "ldp", c);
  arch::ide_specs(specs, "ide", c);
  const auto store = init_from_specs<double>(specs, 81);
  std::mt19937_64 rng(82);
  const auto x0 = random_tensor({2, 3, 16, 8}, rng);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  const auto pyr = arch::ldp_decompose(p, "ldp", c, tape.constant(x0));
  ASSERT_EQ(pyr.hf.size(), 2u);
  EXPECT_EQ(pyr.hf[1].shape(), (Shape{2, 3, 8, 4}));
  EXPECT_EQ(pyr.lf.shape(), (Shape{2, 3, 4, 2}));
  std::vector<Var<double>> masks;
  const auto y = arch::ide_refine(p, "ide", pyr.lf, pyr, &masks).value();
  EXPECT_LE(max_abs_diff(y, x0), 1e-12);
  ASSERT_EQ(masks.size(), 2u);
  for (double m : masks[0].value().data()) EXPECT_EQ(m, 1.0);
}

TEST(Blocks, LdpRejectsIndivisibleExtent) {
  const auto c = small_config();
  arch::Specs specs;
  arch::ldp_specs(specs, "ldp", c);
  const auto store = init_from_specs<double>(specs, 1);
  Tape<double> tape;
  ParamBinding<double> p(tape, store);
  EXPECT_THROW(arch::ldp_decompose(p, "ldp", c, tape.constant(Tensor<double>({1, 3, 10, 8}))), ShapeError);
}

class CheckpointTest : public ::testing::Test {
 protected:
  ModelConfig config = small_config();
  ParamStore<float> store = init_params<float>(small_config(), 12);
  void SetUp() override {
    store.adam().step = 7;
    for (const auto& [k, t] : store.tensors()) {
      store.adam().m[k] = Tensor<float>(t.shape(), 0.25f);
      store.adam().v[k] = Tensor<float>(t.shape(), 0.5f);
    }
  }
  CheckpointError::Kind kind_of(const std::vector<uint8_t>& bytes) {
    try {
      deserialize_checkpoint(bytes);
    } catch (const CheckpointError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error";
    return CheckpointError::Kind::io;
  }
};

TEST_F(CheckpointTest, RoundTripIsExact) {
  config.use_lga = false;
  store = init_params<float>(config, 12);
  const auto dir = test::scratch_dir("ckpt_roundtrip");
  const auto path = (dir / "m.lalnet").string();
  save_checkpoint(path, store, config);
  const auto back = load_checkpoint(path);
  EXPECT_TRUE(back.store == store);
  EXPECT_EQ(model_config_text(back.config), model_config_text(config));
}

TEST_F(CheckpointTest, OptimizerStateSurvives) {
  const auto back = deserialize_checkpoint(serialize_checkpoint(store, config));
  EXPECT_EQ(back.store.adam().step, 7);
  EXPECT_TRUE(back.store == store);
}

TEST_F(CheckpointTest, CorruptionIsClassified) {
  const auto good = serialize_checkpoint(store, config);
  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(kind_of(bad), CheckpointError::Kind::bad_magic);
  bad = good;
  bad[4] = 9;
  EXPECT_EQ(kind_of(bad), CheckpointError::Kind::unsupported_version);
  bad.assign(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(good.size() / 2));
  EXPECT_EQ(kind_of(bad), CheckpointError::Kind::truncated);
  bad = good;
  bad[bad.size() - 8] ^= 0x40;
  EXPECT_EQ(kind_of(bad), CheckpointError::Kind::checksum);
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/m.lalnet"), CheckpointError);
}

}  // namespace
}  // namespace lalnet
