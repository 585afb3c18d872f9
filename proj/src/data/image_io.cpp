#include "lalnet/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace lalnet {

namespace {

using Kind = ImageError::Kind;

std::vector<uint8_t> read_all(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ImageError(Kind::io, "cannot open " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

bool is_png(const std::vector<uint8_t>& b) {
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

bool is_pfm(const std::vector<uint8_t>& b) {
  return b.size() >= 3 && b[0] == 'P' && (b[1] == 'F' || b[1] == 'f') && std::isspace(b[2]);
}

Tensor<float> decode_png(const std::vector<uint8_t>& bytes, const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw ImageError(Kind::corrupt, "corrupt PNG " + path + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  const int64_t W = img.width, H = img.height;
  std::vector<uint8_t> px(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, px.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw ImageError(Kind::corrupt, "corrupt PNG " + path + ": " + msg);
  }
  Tensor<float> out({3, H, W});
  for (int64_t y = 0; y < H; ++y) {
    for (int64_t x = 0; x < W; ++x) {
      for (int64_t c = 0; c < 3; ++c) out[(c * H + y) * W + x] = px[static_cast<size_t>((y * W + x) * 3 + c)] / 255.0f;
    }
  }
  return out;
}

Tensor<float> decode_pfm(const std::vector<uint8_t>& bytes, const std::string& path) {
  // header: "PF" or "Pf", width height, scale; each token separated by whitespace, then one
  // whitespace byte before the raster
  size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    const size_t start = pos;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
    if (start == pos) throw ImageError(Kind::corrupt, "corrupt PFM header in " + path);
    return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.begin() + static_cast<std::ptrdiff_t>(pos));
  };
  const std::string magic = token();
  const int channels = magic == "PF" ? 3 : 1;
  int64_t W = 0, H = 0;
  double scale = 0;
  try {
    W = std::stoll(token());
    H = std::stoll(token());
    scale = std::stod(token());
  } catch (const ImageError&) {
    throw;
  } catch (const std::exception&) {
    throw ImageError(Kind::corrupt, "corrupt PFM header in " + path);
  }
  if (W <= 0 || H <= 0 || scale == 0.0 || pos >= bytes.size()) {
    throw ImageError(Kind::corrupt, "corrupt PFM header in " + path);
  }
  ++pos;  // single whitespace after scale
  const bool little = scale < 0;
  const size_t need = static_cast<size_t>(W * H * channels) * 4;
  if (bytes.size() - pos < need) throw ImageError(Kind::corrupt, "truncated PFM raster in " + path);
  Tensor<float> out({3, H, W});
  const uint8_t* p = bytes.data() + pos;
  for (int64_t row = 0; row < H; ++row) {
    const int64_t y = H - 1 - row;  // rows stored bottom-to-top
    for (int64_t x = 0; x < W; ++x) {
      for (int c = 0; c < channels; ++c) {
        uint32_t u;
        std::memcpy(&u, p, 4);
        p += 4;
        if (little != (std::endian::native == std::endian::little)) u = __builtin_bswap32(u);
        float v;
        std::memcpy(&v, &u, 4);
        if (channels == 1) {
          for (int k = 0; k < 3; ++k) out[(k * H + y) * W + x] = v;
        } else {
          out[(c * H + y) * W + x] = v;
        }
      }
    }
  }
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == b; });
}

}  // namespace

uint8_t quantize_u8(float v) {
  const float c = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::floor(c * 255.0f + 0.5f));
}

Tensor<float> load_image(const std::string& path) {
  const auto bytes = read_all(path);
  if (is_png(bytes)) return decode_png(bytes, path);
  if (is_pfm(bytes)) return decode_pfm(bytes, path);
  throw ImageError(Kind::unsupported_format, "unsupported image format: " + path);
}

bool looks_like_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  std::vector<uint8_t> head(8, 0);
  f.read(reinterpret_cast<char*>(head.data()), 8);
  head.resize(static_cast<size_t>(f.gcount()));
  return is_png(head) || is_pfm(head);
}

void save_image(const Tensor<float>& image, const std::string& path) {
  if (image.rank() != 3 || image.dim(0) != 3) throw ShapeError("save_image expects [3,H,W], got " + shape_str(image.shape()));
  const int64_t H = image.dim(1), W = image.dim(2);
  if (ends_with(path, ".pfm")) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ImageError(Kind::io, "cannot open " + path + " for writing");
    f << "PF\n" << W << " " << H << "\n-1.0\n";
    for (int64_t row = 0; row < H; ++row) {
      const int64_t y = H - 1 - row;
      for (int64_t x = 0; x < W; ++x) {
        for (int64_t c = 0; c < 3; ++c) {
          const float v = image[(c * H + y) * W + x];
          f.write(reinterpret_cast<const char*>(&v), 4);
        }
      }
    }
    if (!f) throw ImageError(Kind::io, "failed writing " + path);
    return;
  }
  std::vector<uint8_t> px(static_cast<size_t>(H * W * 3));
  for (int64_t y = 0; y < H; ++y) {
    for (int64_t x = 0; x < W; ++x) {
      for (int64_t c = 0; c < 3; ++c) px[static_cast<size_t>((y * W + x) * 3 + c)] = quantize_u8(image[(c * H + y) * W + x]);
    }
  }
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(W);
  img.height = static_cast<png_uint_32>(H);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr)) {
    throw ImageError(Kind::io, "failed writing " + path + ": " + img.message);
  }
}

}  // namespace lalnet
