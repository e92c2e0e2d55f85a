#include <doctest.h>

#include <cmath>

#include "mvcolor/consistency.hpp"
#include "mvcolor/pipeline.hpp"
#include "mvcolor/synth.hpp"

using namespace mvcolor;

namespace {

ViewFaceMeans means_of(ViewId view, std::vector<FaceId> faces, std::vector<double> gray_values, double gain = 1.0) {
  ViewFaceMeans m;
  m.view = view;
  m.channels = 3;
  m.faces = std::move(faces);
  for (double v : gray_values) m.means.push_back({v * gain, v * gain, v * gain});
  return m;
}

FaceObservationSet observation(ViewId view, FaceId face, std::vector<double> values) {
  FaceObservationSet obs;
  obs.view_id = view;
  obs.observed = {face};
  PixelSampleVector s;
  s.face_id = face;
  s.view_id = view;
  s.samples.assign(3, values);
  obs.samples.push_back(s);
  return obs;
}

GainEntry entry(double w) {
  GainEntry e;
  e.gain = {w, w, w};
  const double a = std::min(w, 1.0 / w);
  e.agreement = {a, a, a};
  e.overlap = 3;
  return e;
}

ColorMatrix single_row(std::size_t views, std::vector<ColorCell> cells) {
  ColorMatrix m;
  m.face_count = 1;
  m.view_count = views;
  m.channels = 3;
  m.rows = {std::move(cells)};
  return m;
}

Color gray(double v) { return {v, v, v}; }

}  // namespace

TEST_SUITE("consistency") {

TEST_CASE("trimmed mean: hand-evaluated vectors") {
  std::vector<double> ramp;
  for (int i = 1; i <= 10; ++i) ramp.push_back(i);
  CHECK(trimmed_mean(ramp, {0.3}) == 5.5);
  CHECK(trimmed_mean(std::vector<double>(13, 0.42), {0.3}) == doctest::Approx(0.42).epsilon(1e-15));
  std::vector<double> spiked(9, 0.5);
  spiked.push_back(1000.0);
  CHECK(trimmed_mean(spiked, {0.3}) == 0.5);
  // n=7: two dropped at each end, three survivors average to the median region.
  CHECK(trimmed_mean(std::vector<double>{7, 1, 6, 2, 5, 3, 4}, {0.3}) == 4.0);
  CHECK(trimmed_mean(std::vector<double>{3, 1, 2}, {0.0}) == 2.0);
  CHECK(trim_count(10, 0.3) == 3);
  CHECK(trim_count(3, 0.3) == 0);
}

TEST_CASE("trimmed mean errors") {
  CHECK_THROWS_AS(trimmed_mean(std::vector<double>{}, {0.3}), ValidationError);
  CHECK_THROWS_AS(trimmed_mean(std::vector<double>{1.0}, {0.5}), ValidationError);
  CHECK_THROWS_AS(trimmed_mean(std::vector<double>{1.0}, {-0.1}), ValidationError);
}

TEST_CASE("overlap sets are intersections") {
  FaceObservationSet a, b;
  a.observed = {1, 2, 3};
  b.observed = {2, 3, 4};
  CHECK(overlap_faces(a, b) == std::vector<FaceId>{2, 3});
  b.observed = {7, 8};
  CHECK(overlap_faces(a, b).empty());
  CHECK(overlap_faces(a, a) == a.observed);
}

TEST_CASE("pairwise gain of proportional observations") {
  const auto vj = means_of(1, {0, 1, 2}, {0.2, 0.3, 0.5});
  const auto vi = means_of(0, {0, 1, 2}, {0.2, 0.3, 0.5}, 1.4);
  const auto g = pairwise_gain(vi, vj, {});
  REQUIRE(g.has_value());
  CHECK(g->overlap == 3);
  for (int c = 0; c < 3; ++c) CHECK(g->gain[c] == doctest::Approx(1.4).epsilon(1e-15));
  const auto same = pairwise_gain(vj, vj, {});
  CHECK(same->gain == gray(1.0));
}

TEST_CASE("pairwise gain through sampled observation sets") {
  const FaceObservationSet oi = observation(0, 3, {0.7, 0.7, 0.7, 0.7, 0.7});
  const FaceObservationSet oj = observation(1, 3, {0.5, 0.5, 0.5, 0.5, 0.5});
  const auto g = pairwise_gain(oi, oj, {});
  REQUIRE(g.has_value());
  CHECK(g->gain[0] == doctest::Approx(1.4));
}

TEST_CASE("black faces are excluded from the ratio") {
  auto vi = means_of(0, {0, 1}, {0.4, 0.3});
  auto vj = means_of(1, {0, 1}, {0.0, 0.6});
  const auto g = pairwise_gain(vi, vj, {});
  REQUIRE(g.has_value());
  CHECK(g->overlap == 1);
  CHECK(g->gain[0] == doctest::Approx(0.5));

  const auto only_black = pairwise_gain(means_of(0, {0}, {0.4}), means_of(1, {0}, {0.0}), {});
  CHECK_FALSE(only_black.has_value());
}

TEST_CASE("gain matrix of three constant-gain views") {
  const std::vector<double> base{0.1, 0.2, 0.3, 0.25};
  const std::vector<FaceId> faces{0, 1, 2, 3};
  const std::vector<ViewFaceMeans> means{means_of(0, faces, base, 1.0), means_of(1, faces, base, 2.0),
                                         means_of(2, faces, base, 4.0)};
  const GainMatrix w = build_gain_matrix(means, {});
  CHECK(w.entry_count() == 6);
  CHECK(w.find(0, 1)->gain[0] == doctest::Approx(0.5));
  CHECK(w.find(0, 2)->gain[1] == doctest::Approx(0.25));
  CHECK(w.find(1, 2)->gain[2] == doctest::Approx(0.5));
  CHECK(w.find(2, 0)->gain[0] == doctest::Approx(4.0));
  CHECK(w.find(0, 1)->agreement[0] == doctest::Approx(0.5));
  CHECK(w.find(0, 2)->agreement[0] == doctest::Approx(0.25));
  CHECK(w.find(2, 0)->agreement[0] == doctest::Approx(0.25));
  CHECK(w.find(1, 2)->overlap == 4);
  CHECK(w.find(1, 1) == nullptr);
}

TEST_CASE("gain matrix: identical, disjoint and thin overlaps") {
  const auto a = means_of(0, {0, 1, 2}, {0.3, 0.4, 0.5});
  const GainMatrix same = build_gain_matrix({a, means_of(1, {0, 1, 2}, {0.3, 0.4, 0.5})}, {});
  CHECK(same.find(0, 1)->gain == gray(1.0));
  CHECK(same.find(1, 0)->agreement == gray(1.0));

  CHECK(build_gain_matrix({a, means_of(1, {5, 6, 7}, {0.3, 0.4, 0.5})}, {}).entry_count() == 0);

  const auto thin = means_of(1, {1, 2, 9}, {0.4, 0.5, 0.1});
  CHECK(build_gain_matrix({a, thin}, {}).entry_count() == 0);  // two shared faces < 3
  ConsistencyParams loose;
  loose.min_overlap = 2;
  CHECK(build_gain_matrix({a, thin}, loose).entry_count() == 2);
}

TEST_CASE("gain matrix does not depend on the worker count") {
  std::vector<ViewFaceMeans> means;
  for (ViewId v = 0; v < 9; ++v) means.push_back(means_of(v, {0, 1, 2, 3, 4}, {0.1, 0.3, 0.2, 0.6, 0.4}, 1.0 + 0.1 * v));
  const GainMatrix a = build_gain_matrix(means, {}, 1);
  const GainMatrix b = build_gain_matrix(means, {}, 8);
  REQUIRE(a.pairs() == b.pairs());
  for (const auto& [i, j] : a.pairs()) CHECK(a.find(i, j)->gain == b.find(i, j)->gain);
}

TEST_CASE("direct color matrix entries") {
  std::vector<double> tenths;
  for (int i = 1; i <= 10; ++i) tenths.push_back(i / 10.0);
  const std::vector<FaceObservationSet> obs{observation(0, 0, std::vector<double>(6, 0.6)), observation(1, 1, tenths)};
  std::vector<FaceObservationSet> with_counts = obs;
  for (auto& o : with_counts) o.unobserved = {o.observed[0] == 0 ? FaceId{1} : FaceId{0}, 2};
  const ColorMatrix m = build_color_matrix(with_counts, {});
  REQUIRE(m.rows.size() == 3);
  CHECK(m.find(0, 0)->value[0] == doctest::Approx(0.6));
  CHECK(m.find(0, 0)->provenance == Provenance::Direct);
  CHECK(m.find(1, 1)->value[2] == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(m.rows[2].empty());
  CHECK(m.find(0, 1) == nullptr);
}

TEST_CASE("infill from a single donor") {
  GainMatrix w(2, 3);
  w.set(0, 1, entry(2.0));
  const ColorMatrix m = single_row(2, {ColorCell{1, gray(0.5), Provenance::Direct}});
  const ColorMatrix out = infill_color_matrix(m, w, 0.0);
  const ColorCell* c = out.find(0, 0);
  REQUIRE(c != nullptr);
  CHECK(c->provenance == Provenance::Infilled);
  CHECK(c->value == gray(1.0));
  CHECK(*out.find(0, 1) == *m.find(0, 1));
}

TEST_CASE("infill weighs donors by agreement") {
  GainMatrix w(3, 3);
  w.set(0, 1, entry(2.0));
  w.set(0, 2, entry(1.0));
  const ColorMatrix m = single_row(3, {ColorCell{1, gray(0.5), Provenance::Direct}, ColorCell{2, gray(1.0), Provenance::Direct}});
  const ColorMatrix out = infill_color_matrix(m, w, 0.0);
  CHECK(out.find(0, 0)->value[0] == doctest::Approx((0.5 * (0.5 * 2.0) + 1.0 * (1.0 * 1.0)) / 1.5));

  // Unequal contributions: 0.25*2 from view 1 (weight .5), 0.9*1 from view 2 (weight 1).
  const ColorMatrix m2 = single_row(3, {ColorCell{1, gray(0.25), Provenance::Direct}, ColorCell{2, gray(0.9), Provenance::Direct}});
  CHECK(infill_color_matrix(m2, w, 0.0).find(0, 0)->value[1] == doctest::Approx((0.5 * 0.5 + 1.0 * 0.9) / 1.5));
}

TEST_CASE("agreement threshold gates donors") {
  GainMatrix w(3, 3);
  w.set(0, 1, entry(2.0));  // agreement 0.5
  w.set(0, 2, entry(1.25)); // agreement 0.8
  const ColorMatrix m = single_row(3, {ColorCell{1, gray(0.5), Provenance::Direct}, ColorCell{2, gray(0.4), Provenance::Direct}});
  CHECK(infill_color_matrix(m, w, 0.7).find(0, 0)->value[0] == doctest::Approx(0.5));
  CHECK(infill_color_matrix(m, w, 0.9).find(0, 0) == nullptr);
}

TEST_CASE("infill is a single pass and never overwrites direct cells") {
  GainMatrix w(3, 3);
  w.set(1, 0, entry(2.0));
  w.set(2, 1, entry(2.0));  // no (2,0) entry: view 2 could only chain through an infilled cell
  w.set(0, 1, entry(0.5));
  const ColorMatrix m = single_row(3, {ColorCell{0, gray(0.3), Provenance::Direct}});
  const ColorMatrix out = infill_color_matrix(m, w, 0.0);
  CHECK(out.find(0, 1)->value[0] == doctest::Approx(0.6));
  CHECK(out.find(0, 2) == nullptr);
  CHECK(*out.find(0, 0) == ColorCell{0, gray(0.3), Provenance::Direct});
}

TEST_CASE("infill result does not depend on donor order") {
  GainMatrix w(4, 3);
  w.set(0, 1, entry(1.7));
  w.set(0, 2, entry(0.3));
  w.set(0, 3, entry(1.1));
  const ColorMatrix m = single_row(4, {ColorCell{1, gray(0.1), Provenance::Direct}, ColorCell{2, gray(0.7), Provenance::Direct},
                                       ColorCell{3, gray(0.33), Provenance::Direct}});
  const double v = infill_color_matrix(m, w, 0.0).find(0, 0)->value[0];
  double num = 0, den = 0;
  for (auto [x, g] : {std::pair{0.1, 1.7}, {0.7, 0.3}, {0.33, 1.1}}) {
    const double a = std::min(g, 1 / g);
    num += a * x * g;
    den += a;
  }
  CHECK(v == doctest::Approx(num / den).epsilon(1e-14));
}

TEST_CASE("aggregation") {
  ColorMatrix m;
  m.face_count = 3;
  m.view_count = 10;
  m.channels = 3;
  m.rows.resize(3);
  for (ViewId v = 0; v < 3; ++v) m.rows[0].push_back({v, gray(0.5), Provenance::Direct});
  for (ViewId v = 0; v < 10; ++v) m.rows[1].push_back({v, gray((v + 1) / 10.0), v % 2 ? Provenance::Infilled : Provenance::Direct});
  const FaceColorTable t = aggregate_face_colors(m, {0.3});
  CHECK(t.faces[0].value == gray(0.5));
  CHECK(t.faces[0].support == 3);
  CHECK(t.faces[1].value[0] == doctest::Approx(0.55).epsilon(1e-15));
  CHECK_FALSE(t.faces[2].colored());
  CHECK(t.colored_count() == 2);
}

TEST_CASE("optional saturation rule drops clipped observations") {
  const std::vector<FaceId> faces{0, 1, 2, 3};
  auto a = means_of(0, faces, {0.2, 0.3, 0.4, 0.6}, 2.0);
  a.means[3] = gray(1.0);  // 1.2 clipped to 1 in view 0
  const auto b = means_of(1, faces, {0.2, 0.3, 0.4, 0.6});
  const GainMatrix plain = build_gain_matrix({a, b}, {});
  CHECK(plain.find(0, 1)->gain[0] == doctest::Approx((2.0 * 3 + 1.0 / 0.6) / 4.0));
  ConsistencyParams guarded;
  guarded.saturation_level = 1.0;
  const GainMatrix w = build_gain_matrix({a, b}, guarded);
  CHECK(w.find(0, 1)->gain[0] == doctest::Approx(2.0));
  CHECK(w.find(0, 1)->overlap == 3);
  const ColorMatrix c = build_color_matrix({a, b}, 4, guarded);
  CHECK(c.find(3, 0) == nullptr);
  CHECK(infill_color_matrix(c, w, 0.0).find(3, 0)->value[0] == doctest::Approx(1.2));
}

TEST_CASE("pipeline: single view equals per-face trimmed means") {
  synth::SynthConfig sc;
  sc.view_count = 1;
  sc.noise_sigma = 0.05;
  sc.outlier_fraction = 0.1;
  synth::SynthScene scene = synth::generate_scene(sc);
  synth::render_views(scene, sc);
  const PipelineConfig config;
  const EstimateResult r = estimate_face_colors_detailed(scene.mesh, scene.views, config);
  CHECK(r.gains.entry_count() == 0);
  const auto obs = observe_views(scene.mesh, scene.views, config.visibility());
  REQUIRE(!obs[0].observed.empty());
  for (std::size_t i = 0; i < obs[0].observed.size(); ++i) {
    const FaceColor& fc = r.colors.faces[obs[0].observed[i]];
    REQUIRE(fc.colored());
    for (int c = 0; c < 3; ++c) CHECK(fc.value[c] == trimmed_mean(obs[0].samples[i].samples[c], {0.3}));
  }
  for (FaceId f : obs[0].unobserved) CHECK_FALSE(r.colors.faces[f].colored());

  // Duplicating the view changes nothing.
  const FaceColorTable twice = estimate_face_colors(scene.mesh, {scene.views[0], scene.views[0], scene.views[0]}, config);
  CHECK(twice.colored_count() == r.colors.colored_count());
  for (std::size_t k = 0; k < twice.size(); ++k)
    for (int c = 0; c < 3; ++c) CHECK(twice.faces[k].value[c] == doctest::Approx(r.colors.faces[k].value[c]).epsilon(1e-15));
}

TEST_CASE("pipeline recovers relative colors exactly without saturation") {
  synth::SynthConfig sc;
  sc.seed = 5;
  sc.gains = synth::sample_gains(8, 0.5, 1.1, 5);
  synth::SynthScene scene = synth::generate_scene(sc);
  synth::render_views(scene, sc);
  const EstimateResult r = estimate_face_colors_detailed(scene.mesh, scene.views, PipelineConfig{});
  for (const auto& [i, j] : r.gains.pairs())
    for (int c = 0; c < 3; ++c)
      CHECK(r.gains.find(i, j)->gain[c] == doctest::Approx(scene.truth.gains[i][c] / scene.truth.gains[j][c]).epsilon(1e-12));
  const synth::SynthMetrics m = synth::evaluate(r.colors, scene.truth);
  CHECK(m.uncolored == 0);
  for (int c = 0; c < 3; ++c) CHECK(m.cov[c] < 1e-12);
}

TEST_CASE("gray mode works on one channel") {
  synth::SynthConfig sc;
  synth::SynthScene scene = synth::generate_scene(sc);
  synth::render_views(scene, sc);
  PipelineConfig config;
  config.channels = ChannelMode::Gray;
  const FaceColorTable t = estimate_face_colors(scene.mesh, scene.views, config);
  CHECK(t.channels == 1);
  CHECK(t.colored_count() == 12);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Color& a = scene.truth.albedo[k];
    CHECK(t.faces[k].value[0] == doctest::Approx(0.299 * a[0] + 0.587 * a[1] + 0.114 * a[2]));
  }
}

TEST_CASE("config text round trip and errors") {
  PipelineConfig c;
  c.alpha = 0.1;
  c.min_overlap = 4;
  c.channels = ChannelMode::Gray;
  c.dump_gains = true;
  c.seed = 1234567890123ULL;
  c.saturation_level = 0.98;
  CHECK(parse_config_text(to_config_text(c)) == c);
  CHECK(parse_config_text(to_config_text(PipelineConfig{})) == PipelineConfig{});
  CHECK(parse_config_text("# comment\n\nalpha = 0.25\n").alpha == 0.25);
  CHECK_THROWS_AS(parse_config_text("alpah=0.2\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("alpha=abc\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("alpha\n"), ValidationError);
  CHECK_THROWS_AS(parse_config_text("alpha=0.5\n").validate(), ValidationError);
  CHECK_THROWS_AS(parse_config_text("channels=cmyk\n"), ValidationError);
  CHECK(config_keys().size() == 12);
}

}  // TEST_SUITE
