#pragma once

#include <vector>

#include "mvcolor/camera.hpp"
#include "mvcolor/mesh.hpp"

namespace mvcolor {

/// Camera-space near plane; geometry in front of it is clipped away.
inline constexpr double kNearPlane = 1e-4;

struct VisibilityParams {
  std::size_t min_pixels = 5;         // minimum footprint and minimum winning pixels
  double visibility_fraction = 0.75;  // winning / footprint needed to count as observed
};

/// Per-pixel nearest front-facing face. `footprint[f]` counts the in-image
/// pixels face f covers before the depth test.
struct DepthBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> depth;           // +inf where empty
  std::vector<FaceId> face_id;         // kNoFace where empty
  std::vector<std::uint32_t> footprint;  // one entry per mesh face

  FaceId face_at(int x, int y) const { return face_id[static_cast<std::size_t>(y) * width + x]; }
  double depth_at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
};

/// Intensities of the pixels a face owns in one view, one list per channel,
/// in row-major pixel order.
struct PixelSampleVector {
  FaceId face_id = 0;
  ViewId view_id = 0;
  std::vector<std::vector<double>> samples;

  std::size_t count() const noexcept { return samples.empty() ? 0 : samples.front().size(); }
  int channels() const noexcept { return static_cast<int>(samples.size()); }
};

/// Per-view partition of the mesh faces into observed and unobserved.
struct FaceObservationSet {
  ViewId view_id = 0;
  std::vector<FaceId> observed;             // ascending
  std::vector<FaceId> unobserved;           // ascending
  std::vector<PixelSampleVector> samples;   // aligned with `observed` once sampled

  bool is_observed(FaceId face) const;
  /// Sample vector of an observed face, nullptr otherwise.
  const PixelSampleVector* find(FaceId face) const;
};

struct FaceVisibilityStat {
  FaceId face = 0;
  std::uint32_t footprint = 0;
  std::uint32_t winning = 0;
  double visible_fraction() const { return footprint ? static_cast<double>(winning) / footprint : 0.0; }
};

/// Front-facing means the normal points against the direction from the camera.
bool is_front_facing(const FaceGeometry& face, const Vec3& camera_center);

DepthBuffer rasterize_depth(const TriangleMesh& mesh, const PinholeView& view);

/// Footprint/winning pixel counts for every face with a non-empty footprint.
std::vector<FaceVisibilityStat> visibility_stats(const DepthBuffer& buf);

/// Partition only; `samples` is left empty.
FaceObservationSet classify_faces(const TriangleMesh& mesh, const PinholeView& view, const DepthBuffer& buf,
                                  const VisibilityParams& params = {}, ViewId view_id = 0);

/// Samples of one face at the pixels it owns in `buf`. Throws if it owns none.
PixelSampleVector sample_face_pixels(const PinholeView& view, const DepthBuffer& buf, FaceId face,
                                     ViewId view_id = 0);

/// Fills `obs.samples` for every observed face in one pass over the buffer.
void sample_observed_faces(const PinholeView& view, const DepthBuffer& buf, FaceObservationSet& obs);

/// Rasterize, classify and sample every view. Views run in parallel with
/// `workers` threads (0 = OpenMP default); output order is view order.
std::vector<FaceObservationSet> observe_views(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                                              const VisibilityParams& params, int workers = 0);

/// Face ids hashed to colors for debugging; empty pixels are black.
ImageBuffer face_id_image(const DepthBuffer& buf);

}  // namespace mvcolor
