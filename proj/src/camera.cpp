#include "mvcolor/camera.hpp"

#include <cmath>
#include <string>

namespace mvcolor {

void PinholeView::validate() const {
  if (!(intrinsics(0, 0) > 0.0) || !(intrinsics(1, 1) > 0.0))
    throw ValidationError("intrinsics must have positive focal entries");
  const double ortho_err = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho_err <= kRotationTolerance))
    throw ValidationError("rotation is not orthonormal (max deviation " + std::to_string(ortho_err) + ")");
  if (rotation.determinant() < 0.0) throw ValidationError("improper rotation (determinant -1)");
  if (width <= 0 || height <= 0) throw ValidationError("view dimensions must be positive");
  if (!image.empty() && (image.width() != width || image.height() != height))
    throw ValidationError("image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                          " but the camera declares " + std::to_string(width) + "x" + std::to_string(height));
}

Vec2 project_camera_point(const Mat3& intrinsics, const Vec3& cam) {
  const Vec3 h = intrinsics * cam;
  return Vec2(h.x() / h.z(), h.y() / h.z());
}

Projection project_point(const PinholeView& view, const Vec3& world) {
  const Vec3 cam = view.to_camera(world);
  return Projection{project_camera_point(view.intrinsics, cam), cam.z()};
}

void look_at(PinholeView& view, const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitY());
  right.normalize();
  const Vec3 down = forward.cross(right);
  view.rotation.row(0) = right.transpose();
  view.rotation.row(1) = down.transpose();
  view.rotation.row(2) = forward.transpose();
  view.translation = -view.rotation * eye;
}

}  // namespace mvcolor
