#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lalnet/tensor.hpp"

namespace lalnet {

enum class DegradationKind { under_exposure, over_exposure, gamma, tone_compress, low_light_noise };

std::string kind_name(DegradationKind kind);
DegradationKind parse_kind(const std::string& name);

// ev: exposure shift in stops (exposure kinds, darkening for low_light_noise) or the
// expansion in stops before tone compression.
struct DegradationSpec {
  DegradationKind kind = DegradationKind::under_exposure;
  float ev = 0.0f;
  float gamma = 1.0f;
  float noise_sigma = 0.0f;
  uint64_t seed = 0;

  void validate() const;
};

/// Pointwise for every kind except low_light_noise, whose noise is drawn from `seed`.
///   exposure:       clip(x * 2^ev)
///   gamma:          x^gamma
///   tone_compress:  e = 2^ev, (1+e) x / (1 + e x)   (maps [0,1] onto [0,1])
///   low_light_noise: clip(x * 2^ev + N(0, sigma))
Tensor<float> degrade(const Tensor<float>& clean, const DegradationSpec& spec);

/// Draws one of the mixed toy degradations: exposure ev in [-1.5, 1.5], gamma in
/// [1.8, 2.4], or tone compression with 1..3 stops of expansion.
DegradationSpec random_degradation(std::mt19937_64& rng);

/// Smooth multi-frequency colour field in [0.05, 0.95], a pure function of (seed, index).
Tensor<float> procedural_image(int64_t size, uint64_t seed, uint64_t index);

struct ImagePair {
  std::string name;
  Tensor<float> degraded;  // [3,H,W]
  Tensor<float> clean;
  std::string kind;
};

struct PatchPair {
  Tensor<float> degraded;
  Tensor<float> clean;
  int64_t top = 0;
  int64_t left = 0;
};

/// `count` aligned crops with seeded uniform top-left corners.
std::vector<PatchPair> sample_patches(const Tensor<float>& degraded, const Tensor<float>& clean, int64_t size,
                                      int64_t count, uint64_t seed);

Tensor<float> crop_image(const Tensor<float>& image, int64_t top, int64_t left, int64_t height, int64_t width);

/// Clean procedural images, each degraded by random_degradation seeded per item.
std::vector<ImagePair> synthetic_corpus(int64_t count, int64_t size, uint64_t seed, uint64_t first_index = 0);

struct ManifestRow {
  std::string clean_path;
  std::string degraded_path;
  std::string kind;
};

std::vector<ManifestRow> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);

/// Saves pairs as PNGs under `dir` (clean/, degraded/) plus manifest.csv; returns the manifest path.
std::string write_corpus(const std::string& dir, const std::vector<ImagePair>& pairs);

/// Loads a corpus from a manifest CSV, a directory containing manifest.csv, or a directory
/// of clean images (degraded on the fly with random_degradation seeded by `seed` and file order).
std::vector<ImagePair> load_corpus(const std::string& path, uint64_t seed);

/// Image files (PNG/PFM by content) directly inside `dir`, sorted lexicographically.
std::vector<std::string> list_images(const std::string& dir);

}  // namespace lalnet
