#include "lalnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lalnet/fft.hpp"
#include "lalnet/image_io.hpp"
#include "lalnet/parallel.hpp"
#include "lalnet/wavelet.hpp"

namespace fs = std::filesystem;

namespace lalnet {

namespace {

double energy(const Tensor<double>& t) {
  double s = 0;
  for (double v : t.data()) s += v * v;
  return s;
}

Tensor<double> even_padded(const Tensor<double>& plane) {
  const int64_t H = plane.dim(-2), W = plane.dim(-1);
  if (H % 2 == 0 && W % 2 == 0) return plane;
  return pad_symmetric(plane, H + H % 2, W + W % 2);
}

}  // namespace

ChannelEnergyReport channel_energy_stats(const Tensor<double>& image, int levels) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("channel_energy_stats expects [3,H,W], got " + shape_str(image.shape()));
  }
  if (levels < 1) throw std::invalid_argument("levels must be >= 1");
  const int64_t H = image.dim(1), W = image.dim(2);
  ChannelEnergyReport report;
  for (int64_t c = 0; c < 3; ++c) {
    Tensor<double> plane({1, 1, H, W});
    std::copy_n(image.storage().begin() + c * H * W, H * W, plane.storage().begin());
    auto& out = report.channels[static_cast<size_t>(c)];
    double sum = 0;
    for (double v : plane.data()) sum += v;
    out.mean = sum / static_cast<double>(H * W);

    double high = 0.0, low = 0.0;
    Tensor<double> approx = plane;
    for (int l = 0; l < levels; ++l) {
      auto bands = dwt2_haar(even_padded(approx));
      high += energy(bands.cH) + energy(bands.cV) + energy(bands.cD);
      approx = std::move(bands.cA);
      low = energy(approx);
      if (approx.dim(-1) < 2 && approx.dim(-2) < 2) break;
    }
    const double total = low + high;
    if (total == 0.0) {
      out.low_energy = 1.0;
      out.high_energy = 0.0;
      out.degenerate = true;
    } else {
      out.low_energy = low / total;
      out.high_energy = high / total;
    }
  }
  return report;
}

ChannelEnergyReport channel_energy_stats(const Tensor<float>& image, int levels) {
  return channel_energy_stats(image.cast<double>(), levels);
}

Tensor<double> spectrum_export(const Tensor<float>& image, int channel) {
  if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("spectrum_export expects [3,H,W], got " + shape_str(image.shape()));
  if (channel < 0 || channel > 2) throw std::invalid_argument("channel must be 0, 1 or 2");
  const int64_t H0 = image.dim(1), W0 = image.dim(2);
  Tensor<double> plane({H0, W0});
  for (int64_t i = 0; i < H0 * W0; ++i) plane[i] = image[channel * H0 * W0 + i];
  plane = pad_symmetric_pow2(plane);
  const int64_t H = plane.dim(0), W = plane.dim(1);
  const auto s = fft2(plane);
  Tensor<double> out({H, W});
  for (int64_t y = 0; y < H; ++y) {
    for (int64_t x = 0; x < W; ++x) {
      const int64_t i = y * W + x;
      const int64_t oy = (y + H / 2) % H, ox = (x + W / 2) % W;
      out[oy * W + ox] = std::log1p(std::hypot(s.real[i], s.imag[i]));
    }
  }
  const auto [lo, hi] = std::minmax_element(out.storage().begin(), out.storage().end());
  const double mn = *lo, range = *hi - *lo;
  for (auto& v : out.data()) v = range > 0 ? (v - mn) / range : 0.0;
  return out;
}

namespace {

bool image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pfm";
}

std::vector<fs::path> candidate_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    if (image_extension(e.path()) || looks_like_image(e.path().string())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename().string() < b.filename().string();
  });
  return out;
}

}  // namespace

CorpusReport corpus_report(const std::string& dir, int levels) {
  const auto files = candidate_files(dir);
  struct Slot {
    std::vector<CorpusRow> rows;
    std::string warning;
  };
  std::vector<Slot> slots(files.size());
  parallel_for(static_cast<int64_t>(files.size()), [&](int64_t i) {
    const auto& path = files[static_cast<size_t>(i)];
    auto& slot = slots[static_cast<size_t>(i)];
    try {
      const auto stats = channel_energy_stats(load_image(path.string()), levels);
      for (int c = 0; c < 3; ++c) slot.rows.push_back({path.filename().string(), c, stats.channels[static_cast<size_t>(c)]});
    } catch (const std::exception& e) {
      slot.warning = "skipped " + path.filename().string() + ": " + e.what();
    }
  });
  CorpusReport report;
  for (auto& s : slots) {
    report.rows.insert(report.rows.end(), s.rows.begin(), s.rows.end());
    if (!s.warning.empty()) report.warnings.push_back(s.warning);
  }
  if (report.rows.empty()) throw std::runtime_error("no images found in " + dir);
  return report;
}

void write_corpus_report(const CorpusReport& report, const std::string& csv_path) {
  std::ofstream f(csv_path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + csv_path);
  f << "file,channel,mean,low_energy,high_energy\n";
  static const char* names[3] = {"R", "G", "B"};
  char buf[128];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, ",%s,%.10f,%.10f,%.10f\n", names[r.channel], r.energy.mean, r.energy.low_energy,
                  r.energy.high_energy);
    f << r.file << buf;
  }
  const std::string log_path = csv_path + ".log";
  if (report.warnings.empty()) {
    std::error_code ec;
    fs::remove(log_path, ec);
    return;
  }
  std::ofstream log(log_path, std::ios::trunc);
  for (const auto& w : report.warnings) log << "warning: " << w << "\n";
}

void write_spectra(const std::string& dir, const std::string& out_dir) {
  fs::create_directories(out_dir);
  static const char* names[3] = {"R", "G", "B"};
  for (const auto& path : candidate_files(dir)) {
    Tensor<float> img;
    try {
      img = load_image(path.string());
    } catch (const std::exception&) {
      continue;  // already reported by corpus_report
    }
    for (int c = 0; c < 3; ++c) {
      const auto spec = spectrum_export(img, c);
      const int64_t H = spec.dim(0), W = spec.dim(1);
      Tensor<float> rgb({3, H, W});
      for (int64_t k = 0; k < 3; ++k) {
        for (int64_t i = 0; i < H * W; ++i) rgb[k * H * W + i] = static_cast<float>(spec[i]);
      }
      save_image(rgb, (fs::path(out_dir) / (path.stem().string() + "_" + names[c] + "_fft.png")).string());
    }
  }
}

}  // namespace lalnet
