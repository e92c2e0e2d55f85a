#pragma once

#include <filesystem>
#include <vector>

#include "mvcolor/face_colors.hpp"
#include "mvcolor/image.hpp"
#include "mvcolor/mesh.hpp"

namespace mvcolor {

struct TexelPos {
  int x = 0;
  int y = 0;
};

/// Atlas texels whose centers fall inside a face's UV triangle.
struct TexturePatch {
  FaceId face_id = 0;
  bool skipped = false;  // no UVs, zero-area UV triangle, or no texel covered
  std::vector<TexelPos> positions;
  std::vector<std::vector<double>> values;  // per channel, aligned with positions

  std::size_t size() const noexcept { return positions.size(); }
  int channels() const noexcept { return static_cast<int>(values.size()); }
};

/// Atlas pixel coordinates of a UV point (v up, row 0 at the top).
Vec2 uv_to_atlas(const Vec2& uv, int width, int height);

/// Throws ValidationError("UV out of bounds") when a UV leaves [0,1]^2.
TexturePatch extract_patch(const TextureAtlas& atlas, const TriangleMesh& mesh, FaceId face);

/// Plain per-channel mean. Throws on an empty patch.
Color patch_mean(const TexturePatch& patch);

struct PatchCorrection {
  std::vector<std::vector<double>> values;  // corrected texels, per channel
  Color mean{};
  Color ratio{};         // 1 for skipped channels
  std::size_t clamped = 0;  // texels with at least one channel clamped
  bool skipped = false;     // some channel had mean below min_mean
};

inline constexpr double kDefaultMinPatchMean = 1.0 / 255.0;

/// Scales every texel by target / mean per channel, then clamps to [0,1].
/// Channels whose mean is below `min_mean` are left unchanged.
PatchCorrection correct_patch(const TexturePatch& patch, const Color& target, double min_mean = kDefaultMinPatchMean);

struct FaceCorrectionReport {
  FaceId face = 0;
  Color mean{};
  Color target{};
  Color ratio{};
  std::size_t clamped = 0;
  bool skipped = true;
};

struct CorrectedAtlas {
  ImageBuffer image;
  std::vector<FaceCorrectionReport> report;  // one per face
  std::size_t contested_texels = 0;          // texels inside more than one UV triangle
};

struct TextureCorrectConfig {
  double min_mean = kDefaultMinPatchMean;
  int workers = 0;
};

/// Rewrites every correctable face patch toward its estimated color. Texels
/// claimed by several UV triangles are written by the highest face id; texels
/// outside every UV triangle are copied unchanged.
CorrectedAtlas correct_atlas(const TextureAtlas& atlas, const TriangleMesh& mesh, const FaceColorTable& colors,
                             const TextureCorrectConfig& config = {});

/// CSV: face,M_r,M_g,M_b,target_r,target_g,target_b,clamped,skipped
void write_correction_report(const CorrectedAtlas& corrected, int channels, const std::filesystem::path& path);

}  // namespace mvcolor
