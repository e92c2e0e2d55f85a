#pragma once

#include <filesystem>

#include "mvcolor/image.hpp"

namespace mvcolor {

/// Decodes PNG (8/16 bit, gray/RGB, alpha dropped) or JPEG into [0,1] floats.
/// Format is chosen from the file signature, not the extension.
ImageBuffer read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG; values are clamped to [0,1] and rounded to nearest.
void write_png(const ImageBuffer& image, const std::filesystem::path& path);

/// 8-bit quantization used at every export boundary.
std::uint8_t quantize_unit(double v) noexcept;

}  // namespace mvcolor
