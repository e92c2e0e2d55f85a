#pragma once

#include <span>
#include <vector>

#include "mvcolor/types.hpp"

namespace mvcolor {

/// Row-major float image with 1 or 3 channels. Intensities are expected in
/// [0,1]; loaders normalize, writers quantize.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  double at(int x, int y, int c) const { return data_[index(x, y, c)]; }
  double& at(int x, int y, int c) { return data_[index(x, y, c)]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  /// True when every intensity lies in [0,1].
  bool in_unit_range() const noexcept;

  /// Luma conversion (Rec. 601 weights); a 1-channel image is returned as is.
  ImageBuffer to_gray() const;

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

struct TextureAtlas {
  ImageBuffer image;
};

}  // namespace mvcolor
