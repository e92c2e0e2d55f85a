#include <doctest.h>

#include "mvcolor/oracle.hpp"
#include "mvcolor/synth.hpp"
#include "mvcolor/visibility.hpp"
#include "support.hpp"

using namespace mvcolor;
using namespace mvcolor::synth;

TEST_SUITE("synth") {

TEST_CASE("cube orbit scene: every face is seen from at least two cameras") {
  SynthConfig cfg;
  const SynthScene scene = generate_scene(cfg);
  REQUIRE(scene.mesh.face_count() == 12);
  REQUIRE(scene.views.size() == 8);
  for (FaceId f = 0; f < 12; ++f) {
    const FaceGeometry g = face_world_data(scene.mesh, f);
    int seen = 0;
    for (const auto& v : scene.views) seen += is_front_facing(g, v.center()) ? 1 : 0;
    CHECK(seen >= 2);
  }
  for (const auto& a : scene.truth.albedo)
    for (double c : a) CHECK((c >= kAlbedoMin && c <= kAlbedoMax));
}

TEST_CASE("face counts per scene and subdivision") {
  SynthConfig cfg;
  cfg.subdivisions = 2;
  CHECK(generate_scene(cfg).mesh.face_count() == 12 * 9);
  cfg.scene = SceneKind::Icosphere;
  cfg.subdivisions = 1;
  CHECK(generate_scene(cfg).mesh.face_count() == 80);
  cfg.scene = SceneKind::RoomBox;
  cfg.subdivisions = 0;
  CHECK(generate_scene(cfg).mesh.face_count() == 12);
}

TEST_CASE("generation and rendering are deterministic") {
  SynthConfig cfg;
  cfg.width = cfg.height = 24;
  cfg.gains = sample_gains(cfg.view_count, 0.5, 2.0, 3);
  cfg.noise_sigma = 0.02;
  cfg.outlier_fraction = 0.05;
  cfg.seed = 99;
  SynthScene a = generate_scene(cfg);
  SynthScene b = generate_scene(cfg);
  render_views(a, cfg, 1);
  render_views(b, cfg, 4);
  CHECK(a.truth.albedo == b.truth.albedo);
  for (std::size_t i = 0; i < a.views.size(); ++i) CHECK(a.views[i].image == b.views[i].image);
  CHECK(sample_gains(4, 0.5, 2.0, 3) == sample_gains(4, 0.5, 2.0, 3));
  CHECK(sample_gains(4, 0.5, 2.0, 3) != sample_gains(4, 0.5, 2.0, 4));
}

TEST_CASE("sparse-wide rig keeps cameras at least 60 degrees apart") {
  SynthConfig cfg;
  cfg.rig = RigKind::SparseWide;
  cfg.view_count = 5;
  const SynthScene s = generate_scene(cfg);
  for (std::size_t i = 0; i < s.views.size(); ++i)
    for (std::size_t j = i + 1; j < s.views.size(); ++j)
      CHECK(s.views[i].center().normalized().dot(s.views[j].center().normalized()) <= 0.5 + 1e-12);
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.view_count = 0;
  CHECK_THROWS_AS(generate_scene(cfg), ValidationError);
  cfg.view_count = 3;
  cfg.rig = RigKind::SparseWide;
  CHECK_THROWS_AS(generate_scene(cfg), ValidationError);
  cfg.rig = RigKind::Orbit;
  cfg.gains = {Color{1, 1, 1}};
  CHECK_THROWS_AS(generate_scene(cfg), ValidationError);
  CHECK_THROWS_AS(sample_gains(2, 0.0, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(parse_scene("torus"), ValidationError);
  CHECK(parse_rig("sparse-wide") == RigKind::SparseWide);
}

TEST_CASE("flat rendering applies gain and clamps") {
  TriangleMesh mesh;
  mvcolor::test::add_quad(mesh, -0.5, -0.5, 0.5, 0.5, 2.0);
  GroundTruth truth;
  truth.albedo.assign(2, Color{0.5, 0.4, 0.2});
  const PinholeView cam = mvcolor::test::front_camera(16, 16, 16);
  const ImageBuffer img = render_view(mesh, truth, cam, {1.4, 2.5, 1.0}, 0.0, 0.0, 1);
  CHECK(img.at(8, 8, 0) == doctest::Approx(0.7));
  CHECK(img.at(8, 8, 1) == 1.0);
  CHECK(img.at(8, 8, 2) == doctest::Approx(0.2));
  CHECK(img.at(0, 0, 0) == 0.0);
}

TEST_CASE("evaluation metrics") {
  GroundTruth truth;
  truth.albedo = {Color{0.2, 0.4, 0.5}, Color{0.4, 0.3, 0.5}, Color{0.5, 0.5, 0.5}};
  FaceColorTable exact;
  exact.faces = {FaceColor{{0.4, 0.8, 1.0}, 1}, FaceColor{{0.8, 0.6, 1.0}, 1}, FaceColor{}};
  const SynthMetrics m = evaluate(exact, truth);
  CHECK(m.uncolored == 1);
  for (int c = 0; c < 3; ++c) {
    CHECK(m.cov[c] == doctest::Approx(0.0));
    CHECK(m.median_ratio[c] == doctest::Approx(2.0));
  }

  // Ratios 1 and 1.5: mean 1.25, population std 0.25.
  FaceColorTable skew;
  skew.faces = {FaceColor{{0.2, 0.4, 0.5}, 1}, FaceColor{{0.6, 0.45, 0.75}, 1}, FaceColor{}};
  const SynthMetrics s = evaluate(skew, truth);
  CHECK(s.cov[0] == doctest::Approx(0.2));
  CHECK(s.median_ratio[1] == doctest::Approx(1.25));
  CHECK(s.max_rel_dev[2] == doctest::Approx(0.2));

  FaceColorTable wrong;
  CHECK_THROWS_AS(evaluate(wrong, truth), ValidationError);
}

TEST_CASE("baked atlas covers every face with its own cell") {
  SynthConfig cfg;
  cfg.width = cfg.height = 32;
  SynthScene scene = generate_scene(cfg);
  render_views(scene, cfg, 1);
  const ImageBuffer atlas = bake_best_view_atlas(scene.mesh, scene.views, 8);
  REQUIRE(scene.mesh.uv_faces.size() == 12);
  CHECK(atlas.width() == 4 * 8);
  for (FaceId f = 0; f < 12; ++f) CHECK(scene.mesh.uv_faces[f].present());
}

TEST_CASE("face-color render shows the face colors") {
  TriangleMesh mesh;
  mvcolor::test::add_quad(mesh, -0.5, -0.5, 0.5, 0.5, 2.0);
  const PinholeView cam = mvcolor::test::front_camera(16, 16, 16);
  const ImageBuffer img = render_face_colors(mesh, {Color{0.3, 0.6, 1.5}, Color{0.3, 0.6, 1.5}}, 3, cam);
  CHECK(img.at(8, 8, 0) == doctest::Approx(0.3));
  CHECK(img.at(8, 8, 2) == 1.0);
  CHECK(img.at(0, 15, 1) == 0.0);
}

TEST_CASE("oracle on a single view colors exactly the observed faces") {
  TriangleMesh mesh;
  mvcolor::test::add_quad(mesh, -0.5, -0.5, 0.5, 0.5, 2.0);
  PinholeView cam = mvcolor::test::front_camera(16, 16, 16);
  GroundTruth truth;
  truth.albedo = {Color{0.2, 0.3, 0.4}, Color{0.6, 0.5, 0.4}};
  cam.image = render_view(mesh, truth, cam, {1, 1, 1}, 0.0, 0.0, 1);
  const OracleResult r = oracle_estimate(mesh, {cam}, PipelineConfig{});
  REQUIRE(r.colors.size() == 2);
  for (int f = 0; f < 2; ++f)
    for (int c = 0; c < 3; ++c) CHECK(r.colors.faces[f].value[c] == doctest::Approx(truth.albedo[f][c]));
  CHECK(r.colors == estimate_face_colors(mesh, {cam}, PipelineConfig{}));
}

TEST_CASE("oracle refuses oversized instances") {
  SynthConfig cfg;
  cfg.subdivisions = 1;  // 48 faces, within limits
  cfg.width = cfg.height = 65;
  const SynthScene scene = generate_scene(cfg);
  CHECK_THROWS_AS(oracle_estimate(scene.mesh, scene.views, PipelineConfig{}), ValidationError);
}

TEST_CASE("ray casting agrees with the rasterizer on a synthetic scene") {
  SynthConfig cfg;
  cfg.scene = SceneKind::Icosphere;
  cfg.width = cfg.height = 40;
  const SynthScene scene = generate_scene(cfg);
  for (const auto& v : scene.views) {
    const DepthBuffer d = rasterize_depth(scene.mesh, v);
    const RaycastBuffer r = raycast_face_ids(scene.mesh, v);
    for (std::size_t i = 0; i < d.face_id.size(); ++i)
      if (!r.tie[i]) CHECK(d.face_id[i] == r.face_id[i]);
  }
}

}  // TEST_SUITE
