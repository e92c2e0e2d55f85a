#include <doctest.h>

#include <cmath>
#include <limits>

#include "mvcolor/oracle.hpp"
#include "mvcolor/raster.hpp"
#include "mvcolor/synth.hpp"
#include "mvcolor/visibility.hpp"
#include "support.hpp"

using namespace mvcolor;

namespace {

// Identity intrinsics: world point (u*z, v*z, z) lands on pixel coordinates (u, v).
PinholeView unit_camera(int w, int h) {
  PinholeView v;
  v.width = w;
  v.height = h;
  return v;
}

// Camera-facing triangle through image-plane points at depth z.
void add_image_triangle(TriangleMesh& mesh, Vec2 a, Vec2 b, Vec2 c, double z) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  for (const Vec2& p : {a, b, c}) mesh.vertices.push_back({p.x() * z, p.y() * z, z});
  const Vec3 n = (mesh.vertices[base + 1] - mesh.vertices[base]).cross(mesh.vertices[base + 2] - mesh.vertices[base]);
  if (n.z() < 0) mesh.faces.push_back({base, base + 1, base + 2});
  else mesh.faces.push_back({base, base + 2, base + 1});
}

std::size_t count_pixels(const DepthBuffer& buf, FaceId f) {
  std::size_t n = 0;
  for (FaceId id : buf.face_id) n += id == f ? 1 : 0;
  return n;
}

}  // namespace

TEST_SUITE("visibility") {

TEST_CASE("single triangle: ids and camera-space depth") {
  TriangleMesh mesh;
  add_image_triangle(mesh, {2, 2}, {14, 2}, {2, 14}, 3.0);
  const DepthBuffer buf = rasterize_depth(mesh, unit_camera(16, 16));
  CHECK(buf.face_at(4, 4) == 0);
  CHECK(buf.depth_at(4, 4) == doctest::Approx(3.0));
  CHECK(buf.face_at(15, 15) == kNoFace);
  CHECK(std::isinf(buf.depth_at(15, 15)));
  CHECK(buf.footprint[0] == count_pixels(buf, 0));
}

TEST_CASE("perspective-correct depth on a slanted triangle") {
  TriangleMesh mesh;
  mesh.vertices = {{-1, -1, 2}, {1, -1, 4}, {-1, 1, 2}};
  mesh.faces = {{0, 2, 1}};
  if (!is_front_facing(face_world_data(mesh, 0), Vec3::Zero())) mesh.faces = {{0, 1, 2}};
  const PinholeView cam = test::front_camera(32, 32, 16);
  const DepthBuffer buf = rasterize_depth(mesh, cam);
  // Every covered pixel's ray must hit the triangle plane at the stored depth.
  const Vec3 n = (mesh.vertices[1] - mesh.vertices[0]).cross(mesh.vertices[2] - mesh.vertices[0]);
  const Mat3 k_inv = cam.intrinsics.inverse();
  std::size_t covered = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      if (buf.face_at(x, y) == kNoFace) continue;
      ++covered;
      const Vec3 d = k_inv * Vec3(x + 0.5, y + 0.5, 1.0);
      const double t = n.dot(mesh.vertices[0]) / n.dot(d);
      CHECK(buf.depth_at(x, y) == doctest::Approx(t * d.z()).epsilon(1e-12));
    }
  CHECK(covered > 20);
}

TEST_CASE("the nearer of two overlapping triangles wins") {
  TriangleMesh mesh;
  add_image_triangle(mesh, {1, 1}, {15, 1}, {1, 15}, 2.0);  // far
  add_image_triangle(mesh, {1, 1}, {12, 1}, {1, 12}, 1.0);  // near
  const DepthBuffer buf = rasterize_depth(mesh, unit_camera(16, 16));
  CHECK(buf.face_at(3, 3) == 1);
  CHECK(buf.depth_at(3, 3) == doctest::Approx(1.0));
  CHECK(buf.face_at(12, 2) == 0);
  CHECK(buf.footprint[0] > count_pixels(buf, 0));
}

TEST_CASE("geometry behind the camera leaves the buffer empty") {
  TriangleMesh mesh;
  mesh.vertices = {{-1, -1, -2}, {1, -1, -2}, {-1, 1, -2}};
  mesh.faces = {{0, 1, 2}, {0, 2, 1}};
  const DepthBuffer buf = rasterize_depth(mesh, test::front_camera(16, 16, 8));
  for (FaceId id : buf.face_id) CHECK(id == kNoFace);
  CHECK(buf.footprint == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("triangles crossing the near plane are clipped") {
  TriangleMesh mesh;
  mesh.vertices = {{-1, -1, 2}, {1, -1, 2}, {0, 1, -1}};
  mesh.faces = {{0, 1, 2}};
  if (!is_front_facing(face_world_data(mesh, 0), Vec3::Zero())) mesh.faces = {{0, 2, 1}};
  const DepthBuffer buf = rasterize_depth(mesh, test::front_camera(32, 32, 16));
  std::size_t covered = 0;
  for (std::size_t p = 0; p < buf.face_id.size(); ++p)
    if (buf.face_id[p] != kNoFace) {
      ++covered;
      CHECK(buf.depth[p] >= kNearPlane);
    }
  CHECK(covered > 0);
}

TEST_CASE("empty mesh gives an all-sentinel buffer") {
  const DepthBuffer buf = rasterize_depth(TriangleMesh{}, test::front_camera(4, 4, 2));
  CHECK(buf.face_id == std::vector<FaceId>(16, kNoFace));
}

TEST_CASE("top-left rule: a split square claims each pixel exactly once") {
  const std::array<Vec2, 3> t0{Vec2(0, 0), Vec2(8, 8), Vec2(8, 0)};
  const std::array<Vec2, 3> t1{Vec2(0, 0), Vec2(0, 8), Vec2(8, 8)};
  std::vector<int> hits(64, 0);
  for (const auto& t : {t0, t1})
    rasterize_triangle(t, 8, 8, [&](int x, int y, const std::array<double, 3>& b) {
      ++hits[y * 8 + x];
      CHECK(b[0] + b[1] + b[2] == doctest::Approx(1.0));
    });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("back faces of a closed cube are unobserved") {
  synth::SynthConfig sc;
  sc.view_count = 1;
  const synth::SynthScene scene = synth::generate_scene(sc);
  const PinholeView& view = scene.views[0];
  const DepthBuffer buf = rasterize_depth(scene.mesh, view);
  const FaceObservationSet obs = classify_faces(scene.mesh, view, buf);
  std::size_t back = 0;
  for (FaceId f = 0; f < scene.mesh.face_count(); ++f) {
    if (is_front_facing(face_world_data(scene.mesh, f), view.center())) continue;
    ++back;
    CHECK_FALSE(obs.is_observed(f));
    CHECK(buf.footprint[f] == 0);
  }
  CHECK(back == 6);
  CHECK(obs.observed.size() + obs.unobserved.size() == 12);
}

TEST_CASE("a fully occluded face is unobserved") {
  TriangleMesh mesh;
  add_image_triangle(mesh, {4, 4}, {8, 4}, {4, 8}, 3.0);    // hidden
  add_image_triangle(mesh, {0, 0}, {16, 0}, {0, 16}, 1.0);  // occluder
  const PinholeView cam = unit_camera(16, 16);
  const DepthBuffer buf = rasterize_depth(mesh, cam);
  const FaceObservationSet obs = classify_faces(mesh, cam, buf);
  CHECK(buf.footprint[0] > 5);
  CHECK_FALSE(obs.is_observed(0));
  CHECK(obs.is_observed(1));
}

TEST_CASE("partial occlusion: visibility fraction threshold") {
  TriangleMesh mesh;
  add_image_triangle(mesh, {0, 0}, {0, 10.2}, {10.2, 0}, 3.0);
  add_image_triangle(mesh, {0, 0}, {0, 3.2}, {3.2, 0}, 1.0);  // hides 6 of 55 pixels
  const PinholeView cam = unit_camera(16, 16);
  const DepthBuffer buf = rasterize_depth(mesh, cam);
  const auto stats = visibility_stats(buf);
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].footprint == 55);
  CHECK(stats[0].winning == 49);
  CHECK(classify_faces(mesh, cam, buf, {5, 0.75}).is_observed(0));
  CHECK_FALSE(classify_faces(mesh, cam, buf, {5, 0.9}).is_observed(0));
}

TEST_CASE("a 3-pixel footprint is below min_pixels=5") {
  TriangleMesh mesh;
  add_image_triangle(mesh, {0, 0}, {2.6, 0}, {0, 2.6}, 1.0);
  const PinholeView cam = unit_camera(8, 8);
  const DepthBuffer buf = rasterize_depth(mesh, cam);
  CHECK(buf.footprint[0] == 3);
  CHECK_FALSE(classify_faces(mesh, cam, buf, {5, 0.75}).is_observed(0));
  CHECK(classify_faces(mesh, cam, buf, {3, 0.75}).is_observed(0));
}

TEST_CASE("pixel samples of an owned face") {
  TriangleMesh mesh;
  add_image_triangle(mesh, {0, 0}, {4.2, 0}, {0, 4.2}, 1.0);  // 10 pixel centers
  add_image_triangle(mesh, {6, 6}, {6.2, 6}, {6, 6.2}, 1.0);  // covers none
  PinholeView cam = unit_camera(8, 8);
  cam.image = ImageBuffer(8, 8, 3, 0.5);
  const DepthBuffer buf = rasterize_depth(mesh, cam);
  const PixelSampleVector s = sample_face_pixels(cam, buf, 0, 4);
  CHECK(s.view_id == 4);
  REQUIRE(s.count() == 10);
  for (const auto& ch : s.samples) CHECK(ch == std::vector<double>(10, 0.5));

  for (double& v : cam.image.data()) v *= 1.4;
  const PixelSampleVector g = sample_face_pixels(cam, buf, 0);
  for (double v : g.samples[1]) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));

  try {
    sample_face_pixels(cam, buf, 1);
    FAIL("expected an exception");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("not observed") != std::string::npos);
  }
}

TEST_CASE("observed faces always carry enough samples") {
  synth::SynthConfig sc;
  sc.scene = synth::SceneKind::Icosphere;
  sc.subdivisions = 2;
  sc.view_count = 4;
  sc.width = sc.height = 40;
  synth::SynthScene scene = synth::generate_scene(sc);
  synth::render_views(scene, sc);
  const VisibilityParams params{5, 0.75};
  const auto obs = observe_views(scene.mesh, scene.views, params);
  for (const auto& o : obs) {
    REQUIRE(o.samples.size() == o.observed.size());
    for (const auto& s : o.samples) CHECK(s.count() >= params.min_pixels);
  }
}

TEST_CASE("observe_views is independent of the worker count") {
  synth::SynthConfig sc;
  sc.subdivisions = 2;
  synth::SynthScene scene = synth::generate_scene(sc);
  synth::render_views(scene, sc);
  const auto a = observe_views(scene.mesh, scene.views, {}, 1);
  const auto b = observe_views(scene.mesh, scene.views, {}, 8);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].observed == b[i].observed);
    for (std::size_t k = 0; k < a[i].samples.size(); ++k) CHECK(a[i].samples[k].samples == b[i].samples[k].samples);
  }
}

TEST_CASE("ray-cast reference agrees with the rasterizer on a cube") {
  synth::SynthConfig sc;
  sc.subdivisions = 1;
  sc.width = sc.height = 48;
  const synth::SynthScene scene = synth::generate_scene(sc);
  for (const auto& view : scene.views) {
    const DepthBuffer buf = rasterize_depth(scene.mesh, view);
    const synth::RaycastBuffer ray = synth::raycast_face_ids(scene.mesh, view);
    for (std::size_t p = 0; p < ray.face_id.size(); ++p)
      if (!ray.tie[p]) CHECK(buf.face_id[p] == ray.face_id[p]);
  }
}

}  // TEST_SUITE
