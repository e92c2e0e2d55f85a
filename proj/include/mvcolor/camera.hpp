#pragma once

#include "mvcolor/image.hpp"
#include "mvcolor/types.hpp"

namespace mvcolor {

inline constexpr double kRotationTolerance = 1e-6;

/// Pinhole camera K[R|t] with its captured image. Pixel (x, y) covers
/// [x, x+1) x [y, y+1) in the continuous image plane; its center is (x+0.5, y+0.5).
struct PinholeView {
  Mat3 intrinsics = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();
  int width = 0;
  int height = 0;
  ImageBuffer image;

  Vec3 center() const { return -rotation.transpose() * translation; }
  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }

  /// Throws ValidationError for a non-orthonormal or improper rotation,
  /// non-positive focal lengths, or an image whose size disagrees with width/height.
  void validate() const;
};

struct Projection {
  Vec2 pixel;
  double depth;  // camera-space z; <= 0 means behind the camera
};

Projection project_point(const PinholeView& view, const Vec3& world);

/// Pixel coordinates of a camera-space point (z must be non-zero).
Vec2 project_camera_point(const Mat3& intrinsics, const Vec3& cam);

/// World-to-camera rotation/translation for a camera at `eye` looking at
/// `target`; camera x points right, y down, z forward.
void look_at(PinholeView& view, const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());

}  // namespace mvcolor
