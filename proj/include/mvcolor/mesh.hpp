#pragma once

#include <array>
#include <string>
#include <vector>

#include "mvcolor/types.hpp"

namespace mvcolor {

inline constexpr double kDegenerateArea = 1e-12;

/// Per-face UV triangle, normalized [0,1]^2 with v pointing up (OBJ convention).
/// Faces that carried no UVs in the source file hold NaN coordinates.
struct UvTriangle {
  std::array<Vec2, 3> uv;

  bool present() const noexcept { return !uv[0].hasNaN() && !uv[1].hasNaN() && !uv[2].hasNaN(); }
  static UvTriangle missing();
};

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::vector<UvTriangle> uv_faces;  // empty, or one per face
  std::string atlas_path;            // texture image referenced by the mesh material, if any
  std::vector<Color> face_colors;    // per-face colors read from a colored PLY, if any

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  std::size_t face_count() const noexcept { return faces.size(); }
  bool has_uvs() const noexcept { return !uv_faces.empty(); }

  /// Throws ValidationError on dangling indices or a UV list of the wrong length.
  void validate() const;
  /// Ids of faces whose area is below kDegenerateArea.
  std::vector<FaceId> degenerate_faces() const;
};

struct FaceGeometry {
  std::array<Vec3, 3> corners;
  Vec3 normal = Vec3::Zero();  // zero for degenerate faces
  double area = 0.0;
  bool degenerate = false;
};

/// Corners, right-handed unit normal and area of one face.
FaceGeometry face_world_data(const TriangleMesh& mesh, FaceId face);

}  // namespace mvcolor
