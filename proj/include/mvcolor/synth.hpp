#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvcolor/camera.hpp"
#include "mvcolor/face_colors.hpp"
#include "mvcolor/mesh.hpp"

namespace mvcolor::synth {

enum class SceneKind { Cube, Icosphere, RoomBox };
enum class RigKind { Orbit, SparseWide };

SceneKind parse_scene(const std::string& name);
RigKind parse_rig(const std::string& name);
std::string to_string(SceneKind kind);
std::string to_string(RigKind kind);

inline constexpr double kAlbedoMin = 0.1;
inline constexpr double kAlbedoMax = 0.9;

struct SynthConfig {
  SceneKind scene = SceneKind::Cube;
  int subdivisions = 0;
  int view_count = 8;
  RigKind rig = RigKind::Orbit;
  int width = 64;
  int height = 64;
  std::vector<Color> gains;  // per view, per channel; empty means unit gain
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  std::vector<Color> albedo;  // per face, RGB in [kAlbedoMin, kAlbedoMax]
  std::vector<Color> gains;   // per view
};

struct SynthScene {
  TriangleMesh mesh;
  GroundTruth truth;
  std::vector<PinholeView> views;  // poses; images are filled by render_views
};

/// Mesh, albedos and camera poses. Pure function of the config.
SynthScene generate_scene(const SynthConfig& config);

/// Per-view, per-channel gains drawn uniformly from [lo, hi].
std::vector<Color> sample_gains(int view_count, double lo, double hi, std::uint64_t seed);

/// Flat rendering: pixel = clamp(albedo * gain + N(0, sigma), [0,1]) with a
/// fraction of covered pixels replaced by uniform noise. Background is 0.
/// Each view draws from its own stream derived from (seed, view_id).
ImageBuffer render_view(const TriangleMesh& mesh, const GroundTruth& truth, const PinholeView& pose,
                        const Color& gain, double noise_sigma, double outlier_fraction, std::uint64_t seed,
                        ViewId view_id = 0);

/// Renders every view of the scene in parallel and stores the images on it.
void render_views(SynthScene& scene, const SynthConfig& config, int workers = 0);

struct SynthMetrics {
  int channels = 3;
  Color median_ratio{};
  Color cov{};            // std / mean of recovered / true over colored faces
  Color max_rel_dev{};    // max |ratio - mean| / mean
  std::size_t uncolored = 0;
};

SynthMetrics evaluate(const FaceColorTable& recovered, const GroundTruth& truth);

/// Simulates a best-view texturing pipeline: assigns each face its own UV
/// cell in a grid atlas and fills the cell by projecting into the view that
/// sees the face with the most pixels. Sets `mesh.uv_faces`.
ImageBuffer bake_best_view_atlas(TriangleMesh& mesh, const std::vector<PinholeView>& views, int cell_size = 16);

/// Flat render of per-face colors (clamped), background black.
ImageBuffer render_face_colors(const TriangleMesh& mesh, const std::vector<Color>& colors, int channels,
                               const PinholeView& pose);

/// Render of a textured mesh with perspective-correct UVs and nearest texel lookup.
ImageBuffer render_textured(const TriangleMesh& mesh, const ImageBuffer& atlas, const PinholeView& pose);

}  // namespace mvcolor::synth
