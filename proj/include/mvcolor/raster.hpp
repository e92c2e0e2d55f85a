#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "mvcolor/types.hpp"

namespace mvcolor {

/// Visits the pixels whose centers (x+0.5, y+0.5) lie inside a 2D triangle,
/// clipped to [0,width) x [0,height). Pixels on an edge belong to the triangle
/// only if that edge is a top or left edge, so triangles sharing an edge never
/// both claim a pixel. `fn(x, y, b)` receives barycentric weights of the
/// original vertex order. Zero-area triangles visit nothing.
template <class Fn>
void rasterize_triangle(const std::array<Vec2, 3>& tri, int width, int height, Fn&& fn) {
  std::array<Vec2, 3> v = tri;
  std::array<int, 3> order{0, 1, 2};
  auto edge = [](const Vec2& a, const Vec2& b, double px, double py) {
    return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
  };
  double area = edge(v[0], v[1], v[2].x(), v[2].y());
  if (!(std::abs(area) > 0.0) || !std::isfinite(area)) return;
  if (area < 0.0) {
    std::swap(v[1], v[2]);
    std::swap(order[1], order[2]);
    area = -area;
  }
  // Edge k is opposite vertex k.
  const std::array<std::array<int, 2>, 3> edges{{{1, 2}, {2, 0}, {0, 1}}};
  std::array<bool, 3> top_left{};
  for (int k = 0; k < 3; ++k) {
    const Vec2 d = v[edges[k][1]] - v[edges[k][0]];
    top_left[k] = (d.y() == 0.0 && d.x() > 0.0) || d.y() < 0.0;
  }

  const double min_x = std::min({v[0].x(), v[1].x(), v[2].x()});
  const double max_x = std::max({v[0].x(), v[1].x(), v[2].x()});
  const double min_y = std::min({v[0].y(), v[1].y(), v[2].y()});
  const double max_y = std::max({v[0].y(), v[1].y(), v[2].y()});
  const int x0 = std::max(0, static_cast<int>(std::floor(std::max(min_x - 0.5, -1.0))));
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::min(max_x - 0.5, static_cast<double>(width)))));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::max(min_y - 0.5, -1.0))));
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::min(max_y - 0.5, static_cast<double>(height)))));

  for (int y = y0; y <= y1; ++y) {
    const double py = y + 0.5;
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5;
      std::array<double, 3> w{};
      bool inside = true;
      for (int k = 0; k < 3 && inside; ++k) {
        w[k] = edge(v[edges[k][0]], v[edges[k][1]], px, py);
        inside = w[k] > 0.0 || (w[k] == 0.0 && top_left[k]);
      }
      if (!inside) continue;
      std::array<double, 3> b{};
      for (int k = 0; k < 3; ++k) b[order[k]] = w[k] / area;
      fn(x, y, b);
    }
  }
}

}  // namespace mvcolor
