#pragma once

#include <stdexcept>
#include <string>

#include "lalnet/tensor.hpp"

namespace lalnet {

class ImageError : public std::runtime_error {
 public:
  enum class Kind { io, unsupported_format, corrupt };
  ImageError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Decodes PNG (any bit depth/colour type, reduced to 8-bit RGB, /255) or PFM to [3,H,W].
/// The format is detected from the file contents, not the extension.
Tensor<float> load_image(const std::string& path);

/// Writes by extension: ".pfm" stores floats (little-endian, bottom-to-top rows); anything
/// else is written as 8-bit RGB PNG with clip to [0,1] and round-half-up quantization.
void save_image(const Tensor<float>& image, const std::string& path);

/// True if the file starts with a PNG or PFM signature.
bool looks_like_image(const std::string& path);

uint8_t quantize_u8(float v);

}  // namespace lalnet
