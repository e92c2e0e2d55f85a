#pragma once

#include <vector>

#include "mvcolor/types.hpp"

namespace mvcolor {

struct FaceColor {
  Color value{};
  std::size_t support = 0;  // number of color-matrix entries aggregated

  bool colored() const noexcept { return support > 0; }
  bool operator==(const FaceColor&) const = default;
};

/// One record per mesh face. Values are not clamped; exporters clamp.
struct FaceColorTable {
  int channels = 3;
  std::vector<FaceColor> faces;

  std::size_t size() const noexcept { return faces.size(); }
  std::size_t colored_count() const noexcept {
    std::size_t n = 0;
    for (const auto& f : faces) n += f.colored() ? 1 : 0;
    return n;
  }
  bool operator==(const FaceColorTable&) const = default;
};

}  // namespace mvcolor
