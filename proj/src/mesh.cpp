#include "mvcolor/mesh.hpp"

#include <cmath>
#include <limits>

namespace mvcolor {

UvTriangle UvTriangle::missing() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return UvTriangle{{Vec2(nan, nan), Vec2(nan, nan), Vec2(nan, nan)}};
}

void TriangleMesh::validate() const {
  const std::size_t n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (std::uint32_t idx : faces[f]) {
      if (idx >= n)
        throw ValidationError("dangling index: face " + std::to_string(f) + " references vertex " +
                              std::to_string(idx) + " of " + std::to_string(n));
    }
  }
  if (!uv_faces.empty() && uv_faces.size() != faces.size())
    throw ValidationError("uv face count " + std::to_string(uv_faces.size()) + " != face count " +
                          std::to_string(faces.size()));
  if (!face_colors.empty() && face_colors.size() != faces.size())
    throw ValidationError("face color count does not match face count");
}

std::vector<FaceId> TriangleMesh::degenerate_faces() const {
  std::vector<FaceId> out;
  for (FaceId f = 0; f < faces.size(); ++f)
    if (face_world_data(*this, f).degenerate) out.push_back(f);
  return out;
}

FaceGeometry face_world_data(const TriangleMesh& mesh, FaceId face) {
  if (face >= mesh.faces.size()) throw ValidationError("face id " + std::to_string(face) + " out of range");
  const auto& idx = mesh.faces[face];
  FaceGeometry g;
  g.corners = {mesh.vertices[idx[0]], mesh.vertices[idx[1]], mesh.vertices[idx[2]]};
  const Vec3 cross = (g.corners[1] - g.corners[0]).cross(g.corners[2] - g.corners[0]);
  const double len = cross.norm();
  g.area = 0.5 * len;
  g.degenerate = !(g.area >= kDegenerateArea);
  if (!g.degenerate) g.normal = cross / len;
  return g;
}

}  // namespace mvcolor
