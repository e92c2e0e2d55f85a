#include "mvcolor/image.hpp"

#include <algorithm>
#include <string>

namespace mvcolor {

ImageBuffer::ImageBuffer(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0) throw ValidationError("image dimensions must be non-negative");
  if (channels != 1 && channels != 3)
    throw ValidationError("image must have 1 or 3 channels, got " + std::to_string(channels));
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

bool ImageBuffer::in_unit_range() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

ImageBuffer ImageBuffer::to_gray() const {
  if (channels_ == 1) return *this;
  ImageBuffer out(width_, height_, 1);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      out.at(x, y, 0) = 0.299 * at(x, y, 0) + 0.587 * at(x, y, 1) + 0.114 * at(x, y, 2);
  return out;
}

}  // namespace mvcolor
