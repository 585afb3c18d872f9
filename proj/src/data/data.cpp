#include "lalnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "lalnet/image_io.hpp"
#include "lalnet/parallel.hpp"

namespace fs = std::filesystem;

namespace lalnet {

std::string kind_name(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::under_exposure: return "under_exposure";
    case DegradationKind::over_exposure: return "over_exposure";
    case DegradationKind::gamma: return "gamma";
    case DegradationKind::tone_compress: return "tone_compress";
    case DegradationKind::low_light_noise: return "low_light_noise";
  }
  return "unknown";
}

DegradationKind parse_kind(const std::string& name) {
  for (auto k : {DegradationKind::under_exposure, DegradationKind::over_exposure, DegradationKind::gamma,
                 DegradationKind::tone_compress, DegradationKind::low_light_noise}) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown degradation kind '" + name + "'");
}

void DegradationSpec::validate() const {
  if (!(gamma > 0.0f)) throw std::invalid_argument("degradation gamma must be > 0");
  if (!(noise_sigma >= 0.0f)) throw std::invalid_argument("degradation noise_sigma must be >= 0");
  if (!std::isfinite(ev)) throw std::invalid_argument("degradation ev must be finite");
}

Tensor<float> degrade(const Tensor<float>& clean, const DegradationSpec& spec) {
  spec.validate();
  Tensor<float> out = clean;
  auto d = out.data();
  switch (spec.kind) {
    case DegradationKind::under_exposure:
    case DegradationKind::over_exposure: {
      const float gain = std::exp2(spec.ev);
      for (auto& v : d) v = std::clamp(v * gain, 0.0f, 1.0f);
      break;
    }
    case DegradationKind::gamma:
      for (auto& v : d) v = std::pow(std::max(v, 0.0f), spec.gamma);
      break;
    case DegradationKind::tone_compress: {
      const float e = std::exp2(spec.ev);
      for (auto& v : d) v = (1.0f + e) * v / (1.0f + e * v);
      break;
    }
    case DegradationKind::low_light_noise: {
      const float gain = std::exp2(spec.ev);
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<float> noise(0.0f, 1.0f);
      for (auto& v : d) v = std::clamp(v * gain + spec.noise_sigma * noise(rng), 0.0f, 1.0f);
      break;
    }
  }
  return out;
}

DegradationSpec random_degradation(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  DegradationSpec s;
  s.seed = rng();
  const float pick = u(rng);
  if (pick < 1.0f / 3.0f) {
    s.ev = -1.5f + 3.0f * u(rng);
    s.kind = s.ev < 0 ? DegradationKind::under_exposure : DegradationKind::over_exposure;
  } else if (pick < 2.0f / 3.0f) {
    s.kind = DegradationKind::gamma;
    s.gamma = 1.8f + 0.6f * u(rng);
  } else {
    s.kind = DegradationKind::tone_compress;
    s.ev = 1.0f + 2.0f * u(rng);
  }
  return s;
}

Tensor<float> procedural_image(int64_t size, uint64_t seed, uint64_t index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(index),
                    static_cast<uint32_t>(index >> 32), 0x5EEDu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  struct Wave {
    double fx, fy, phase, amp;
  };
  // one shared luminance-like field plus one field per colour channel
  auto make_field = [&](int waves) {
    std::vector<Wave> w;
    for (int k = 0; k < waves; ++k) {
      const double f = 0.5 + 3.5 * u(rng) * (k + 1) / waves;
      const double theta = two_pi * u(rng);
      w.push_back({f * std::cos(theta), f * std::sin(theta), two_pi * u(rng), 1.0 / (1.0 + k)});
    }
    return w;
  };
  const auto shared = make_field(4);
  std::vector<std::vector<Wave>> own;
  double tint[3], grad_x[3], grad_y[3];
  for (int c = 0; c < 3; ++c) {
    own.push_back(make_field(3));
    tint[c] = 0.3 + 0.7 * u(rng);
    grad_x[c] = u(rng) - 0.5;
    grad_y[c] = u(rng) - 0.5;
  }
  auto eval = [&](const std::vector<Wave>& ws, double x, double y) {
    double s = 0;
    for (const auto& w : ws) s += w.amp * std::sin(two_pi * (w.fx * x + w.fy * y) + w.phase);
    return s;
  };

  Tensor<double> field({3, size, size});
  for (int64_t yy = 0; yy < size; ++yy) {
    for (int64_t xx = 0; xx < size; ++xx) {
      const double x = (xx + 0.5) / size, y = (yy + 0.5) / size;
      const double s = eval(shared, x, y);
      for (int c = 0; c < 3; ++c) {
        field[(c * size + yy) * size + xx] =
            tint[c] * (1.0 + 0.6 * s + 0.4 * eval(own[c], x, y)) + grad_x[c] * x + grad_y[c] * y;
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(field.storage().begin(), field.storage().end());
  const double mn = *lo, range = std::max(1e-12, *hi - *lo);
  Tensor<float> out({3, size, size});
  for (int64_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(0.05 + 0.9 * (field[i] - mn) / range);
  return out;
}

Tensor<float> crop_image(const Tensor<float>& image, int64_t top, int64_t left, int64_t height, int64_t width) {
  if (image.rank() != 3) throw ShapeError("crop_image expects [C,H,W], got " + shape_str(image.shape()));
  const int64_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
  if (top < 0 || left < 0 || top + height > H || left + width > W) {
    throw ShapeError("crop " + std::to_string(height) + "x" + std::to_string(width) + " at (" + std::to_string(top) +
                     "," + std::to_string(left) + ") exceeds image " + std::to_string(H) + "x" + std::to_string(W));
  }
  Tensor<float> out({C, height, width});
  for (int64_t c = 0; c < C; ++c) {
    for (int64_t y = 0; y < height; ++y) {
      for (int64_t x = 0; x < width; ++x) out[(c * height + y) * width + x] = image[(c * H + top + y) * W + left + x];
    }
  }
  return out;
}

std::vector<PatchPair> sample_patches(const Tensor<float>& degraded, const Tensor<float>& clean, int64_t size,
                                      int64_t count, uint64_t seed) {
  if (degraded.shape() != clean.shape()) {
    throw ShapeError("sample_patches: degraded " + shape_str(degraded.shape()) + " vs clean " + shape_str(clean.shape()));
  }
  if (clean.rank() != 3) throw ShapeError("sample_patches expects [3,H,W] images");
  const int64_t H = clean.dim(1), W = clean.dim(2);
  if (H < size || W < size) {
    throw ShapeError("sample_patches: image " + std::to_string(H) + "x" + std::to_string(W) + " smaller than patch " +
                     std::to_string(size));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64_t> ry(0, H - size), rx(0, W - size);
  std::vector<PatchPair> out;
  for (int64_t i = 0; i < count; ++i) {
    const int64_t top = ry(rng), left = rx(rng);
    out.push_back({crop_image(degraded, top, left, size, size), crop_image(clean, top, left, size, size), top, left});
  }
  return out;
}

std::vector<ImagePair> synthetic_corpus(int64_t count, int64_t size, uint64_t seed, uint64_t first_index) {
  std::vector<ImagePair> out(static_cast<size_t>(count));
  parallel_for(count, [&](int64_t i) {
    const uint64_t index = first_index + static_cast<uint64_t>(i);
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(index),
                      0xD15Cu};
    std::mt19937_64 rng(seq);
    const auto spec = random_degradation(rng);
    auto clean = procedural_image(size, seed, index);
    char name[32];
    std::snprintf(name, sizeof name, "synthetic_%05llu", static_cast<unsigned long long>(index));
    out[static_cast<size_t>(i)] = ImagePair{name, degrade(clean, spec), std::move(clean), kind_name(spec.kind)};
  });
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<ManifestRow> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifest " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty manifest " + path);
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"clean_path", "degraded_path", "kind"}) {
    throw std::runtime_error("manifest " + path + ": expected header clean_path,degraded_path,kind");
  }
  std::vector<ManifestRow> rows;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cols = split_csv_line(line);
    if (cols.size() != 3) throw std::runtime_error("manifest " + path + " line " + std::to_string(line_no) + ": expected 3 columns");
    rows.push_back({cols[0], cols[1], cols[2]});
  }
  return rows;
}

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest " + path);
  f << "clean_path,degraded_path,kind\n";
  for (const auto& r : rows) f << csv_field(r.clean_path) << ',' << csv_field(r.degraded_path) << ',' << csv_field(r.kind) << '\n';
}

std::string write_corpus(const std::string& dir, const std::vector<ImagePair>& pairs) {
  fs::create_directories(fs::path(dir) / "clean");
  fs::create_directories(fs::path(dir) / "degraded");
  std::vector<ManifestRow> rows;
  for (const auto& p : pairs) {
    const std::string c = "clean/" + p.name + ".png", d = "degraded/" + p.name + ".png";
    save_image(p.clean, (fs::path(dir) / c).string());
    save_image(p.degraded, (fs::path(dir) / d).string());
    rows.push_back({c, d, p.kind});
  }
  const std::string manifest = (fs::path(dir) / "manifest.csv").string();
  write_manifest(manifest, rows);
  return manifest;
}

std::vector<std::string> list_images(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && looks_like_image(e.path().string())) out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ImagePair> load_corpus(const std::string& path, uint64_t seed) {
  fs::path manifest;
  if (fs::is_regular_file(path)) {
    manifest = path;
  } else if (fs::is_directory(path) && fs::is_regular_file(fs::path(path) / "manifest.csv")) {
    manifest = fs::path(path) / "manifest.csv";
  }
  if (!manifest.empty()) {
    const auto rows = read_manifest(manifest.string());
    const fs::path base = manifest.parent_path();
    std::vector<ImagePair> out(rows.size());
    parallel_for(static_cast<int64_t>(rows.size()), [&](int64_t i) {
      const auto& r = rows[static_cast<size_t>(i)];
      auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
      ImagePair pair{fs::path(r.clean_path).stem().string(), load_image(resolve(r.degraded_path).string()),
                     load_image(resolve(r.clean_path).string()), r.kind};
      if (pair.degraded.shape() != pair.clean.shape()) {
        throw ShapeError("manifest pair " + r.clean_path + " / " + r.degraded_path + " differ in size");
      }
      out[static_cast<size_t>(i)] = std::move(pair);
    });
    if (out.empty()) throw std::runtime_error("manifest " + manifest.string() + " lists no images");
    return out;
  }
  if (!fs::is_directory(path)) throw std::runtime_error("no such corpus: " + path);
  const auto files = list_images(path);
  if (files.empty()) throw std::runtime_error("no images found in " + path);
  std::vector<ImagePair> out(files.size());
  parallel_for(static_cast<int64_t>(files.size()), [&](int64_t i) {
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32), static_cast<uint32_t>(i), 0xF11Eu};
    std::mt19937_64 rng(seq);
    const auto spec = random_degradation(rng);
    auto clean = load_image(files[static_cast<size_t>(i)]);
    out[static_cast<size_t>(i)] =
        ImagePair{fs::path(files[static_cast<size_t>(i)]).stem().string(), degrade(clean, spec), clean, kind_name(spec.kind)};
  });
  return out;
}

}  // namespace lalnet
