#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "mvcolor/camera.hpp"
#include "mvcolor/mesh.hpp"

namespace mvcolor::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mvcolor_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Camera at the origin looking down +z with focal f and principal point at
// the image center.
inline PinholeView front_camera(int width, int height, double f) {
  PinholeView v;
  v.width = width;
  v.height = height;
  v.intrinsics << f, 0, 0.5 * width, 0, f, 0.5 * height, 0, 0, 1;
  return v;
}

// Axis-aligned quad (two triangles) at depth z facing a camera at the origin,
// spanning [x0,x1] x [y0,y1] in world units.
inline void add_quad(TriangleMesh& mesh, double x0, double y0, double x1, double y1, double z) {
  const auto b = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.push_back({x0, y0, z});
  mesh.vertices.push_back({x1, y0, z});
  mesh.vertices.push_back({x1, y1, z});
  mesh.vertices.push_back({x0, y1, z});
  // Camera looks down +z with y down in the image, so this winding faces -z.
  mesh.faces.push_back({b, b + 2, b + 1});
  mesh.faces.push_back({b, b + 3, b + 2});
}

}  // namespace mvcolor::test
