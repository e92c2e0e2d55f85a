#include "mvcolor/visibility.hpp"

#include <algorithm>
#include <limits>

#include <omp.h>

#include "mvcolor/raster.hpp"

namespace mvcolor {
namespace {

// Sutherland-Hodgman against z >= kNearPlane; yields 0, 3 or 4 vertices.
std::vector<Vec3> clip_near(const std::array<Vec3, 3>& tri) {
  std::vector<Vec3> out;
  out.reserve(4);
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = tri[i];
    const Vec3& b = tri[(i + 1) % 3];
    const bool a_in = a.z() >= kNearPlane;
    const bool b_in = b.z() >= kNearPlane;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      const double t = (kNearPlane - a.z()) / (b.z() - a.z());
      Vec3 p = a + t * (b - a);
      p.z() = kNearPlane;
      out.push_back(p);
    }
  }
  return out;
}

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

}  // namespace

bool FaceObservationSet::is_observed(FaceId face) const {
  return std::binary_search(observed.begin(), observed.end(), face);
}

const PixelSampleVector* FaceObservationSet::find(FaceId face) const {
  const auto it = std::lower_bound(observed.begin(), observed.end(), face);
  if (it == observed.end() || *it != face) return nullptr;
  const auto i = static_cast<std::size_t>(it - observed.begin());
  return i < samples.size() ? &samples[i] : nullptr;
}

bool is_front_facing(const FaceGeometry& face, const Vec3& camera_center) {
  if (face.degenerate) return false;
  const Vec3 centroid = (face.corners[0] + face.corners[1] + face.corners[2]) / 3.0;
  return face.normal.dot(centroid - camera_center) < 0.0;
}

DepthBuffer rasterize_depth(const TriangleMesh& mesh, const PinholeView& view) {
  DepthBuffer buf;
  buf.width = view.width;
  buf.height = view.height;
  const std::size_t pixels = static_cast<std::size_t>(view.width) * view.height;
  buf.depth.assign(pixels, std::numeric_limits<double>::infinity());
  buf.face_id.assign(pixels, kNoFace);
  buf.footprint.assign(mesh.face_count(), 0);

  const Vec3 center = view.center();
  for (FaceId f = 0; f < mesh.face_count(); ++f) {
    const FaceGeometry g = face_world_data(mesh, f);
    if (!is_front_facing(g, center)) continue;
    const std::array<Vec3, 3> cam{view.to_camera(g.corners[0]), view.to_camera(g.corners[1]),
                                  view.to_camera(g.corners[2])};
    const std::vector<Vec3> poly = clip_near(cam);
    if (poly.size() < 3) continue;

    std::vector<Vec2> screen(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) screen[i] = project_camera_point(view.intrinsics, poly[i]);

    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      const std::array<std::size_t, 3> ids{0, i, i + 1};
      const std::array<Vec2, 3> tri{screen[ids[0]], screen[ids[1]], screen[ids[2]]};
      const std::array<double, 3> inv_z{1.0 / poly[ids[0]].z(), 1.0 / poly[ids[1]].z(), 1.0 / poly[ids[2]].z()};
      rasterize_triangle(tri, buf.width, buf.height, [&](int x, int y, const std::array<double, 3>& b) {
        // 1/z is affine in screen space.
        const double z = 1.0 / (b[0] * inv_z[0] + b[1] * inv_z[1] + b[2] * inv_z[2]);
        ++buf.footprint[f];
        const std::size_t idx = static_cast<std::size_t>(y) * buf.width + x;
        if (z < buf.depth[idx]) {
          buf.depth[idx] = z;
          buf.face_id[idx] = f;
        }
      });
    }
  }
  return buf;
}

std::vector<FaceVisibilityStat> visibility_stats(const DepthBuffer& buf) {
  std::vector<std::uint32_t> winning(buf.footprint.size(), 0);
  for (FaceId id : buf.face_id)
    if (id != kNoFace) ++winning[id];
  std::vector<FaceVisibilityStat> out;
  for (FaceId f = 0; f < buf.footprint.size(); ++f)
    if (buf.footprint[f] > 0) out.push_back({f, buf.footprint[f], winning[f]});
  return out;
}

FaceObservationSet classify_faces(const TriangleMesh& mesh, const PinholeView& view, const DepthBuffer& buf,
                                  const VisibilityParams& params, ViewId view_id) {
  if (buf.footprint.size() != mesh.face_count() || buf.width != view.width || buf.height != view.height)
    throw ValidationError("depth buffer does not belong to this mesh/view pair");
  std::vector<std::uint32_t> winning(mesh.face_count(), 0);
  for (FaceId id : buf.face_id)
    if (id != kNoFace) ++winning[id];

  FaceObservationSet obs;
  obs.view_id = view_id;
  const Vec3 center = view.center();
  for (FaceId f = 0; f < mesh.face_count(); ++f) {
    // Only front-facing, non-degenerate faces ever reach the buffer, so a
    // non-zero footprint already implies (a).
    const std::uint32_t footprint = buf.footprint[f];
    const bool observed = footprint > 0 && footprint >= params.min_pixels && winning[f] >= params.min_pixels &&
                          static_cast<double>(winning[f]) >= params.visibility_fraction * footprint &&
                          is_front_facing(face_world_data(mesh, f), center);
    (observed ? obs.observed : obs.unobserved).push_back(f);
  }
  return obs;
}

PixelSampleVector sample_face_pixels(const PinholeView& view, const DepthBuffer& buf, FaceId face,
                                     ViewId view_id) {
  const int channels = view.image.channels();
  PixelSampleVector out;
  out.face_id = face;
  out.view_id = view_id;
  out.samples.assign(channels, {});
  for (int y = 0; y < buf.height; ++y)
    for (int x = 0; x < buf.width; ++x)
      if (buf.face_at(x, y) == face)
        for (int c = 0; c < channels; ++c) out.samples[c].push_back(view.image.at(x, y, c));
  if (out.count() == 0) throw ValidationError("face " + std::to_string(face) + " not observed in view");
  return out;
}

void sample_observed_faces(const PinholeView& view, const DepthBuffer& buf, FaceObservationSet& obs) {
  const int channels = view.image.channels();
  std::vector<std::int64_t> slot(buf.footprint.size(), -1);
  obs.samples.assign(obs.observed.size(), {});
  for (std::size_t i = 0; i < obs.observed.size(); ++i) {
    slot[obs.observed[i]] = static_cast<std::int64_t>(i);
    auto& s = obs.samples[i];
    s.face_id = obs.observed[i];
    s.view_id = obs.view_id;
    s.samples.assign(channels, {});
  }
  for (int y = 0; y < buf.height; ++y)
    for (int x = 0; x < buf.width; ++x) {
      const FaceId f = buf.face_at(x, y);
      if (f == kNoFace || slot[f] < 0) continue;
      auto& s = obs.samples[slot[f]].samples;
      for (int c = 0; c < channels; ++c) s[c].push_back(view.image.at(x, y, c));
    }
}

std::vector<FaceObservationSet> observe_views(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                                              const VisibilityParams& params, int workers) {
  std::vector<FaceObservationSet> out(views.size());
  const auto n = static_cast<std::int64_t>(views.size());
#pragma omp parallel for schedule(dynamic) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    const PinholeView& view = views[i];
    const DepthBuffer buf = rasterize_depth(mesh, view);
    FaceObservationSet obs = classify_faces(mesh, view, buf, params, static_cast<ViewId>(i));
    sample_observed_faces(view, buf, obs);
    out[i] = std::move(obs);
  }
  return out;
}

ImageBuffer face_id_image(const DepthBuffer& buf) {
  ImageBuffer img(buf.width, buf.height, 3);
  for (int y = 0; y < buf.height; ++y)
    for (int x = 0; x < buf.width; ++x) {
      const FaceId f = buf.face_at(x, y);
      if (f == kNoFace) continue;
      std::uint64_t h = f + 0x9E3779B97F4A7C15ull;
      h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
      h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
      h ^= h >> 31;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = (64 + ((h >> (8 * c)) & 0xBF)) / 255.0;
    }
  return img;
}

}  // namespace mvcolor
