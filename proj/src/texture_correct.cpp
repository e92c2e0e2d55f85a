#include "mvcolor/texture_correct.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <omp.h>

#include "mvcolor/raster.hpp"
#include "mvcolor/text.hpp"

namespace mvcolor {
namespace {

// A ratio this close to 1 is rounding noise from a previous correction.
constexpr double kRatioSnap = 1e-12;

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

}  // namespace

Vec2 uv_to_atlas(const Vec2& uv, int width, int height) {
  return Vec2(uv.x() * width, (1.0 - uv.y()) * height);
}

TexturePatch extract_patch(const TextureAtlas& atlas, const TriangleMesh& mesh, FaceId face) {
  if (face >= mesh.face_count()) throw ValidationError("face id " + std::to_string(face) + " out of range");
  TexturePatch patch;
  patch.face_id = face;
  const int channels = atlas.image.channels();
  patch.values.assign(channels, {});
  if (!mesh.has_uvs() || !mesh.uv_faces[face].present()) {
    patch.skipped = true;
    return patch;
  }
  const UvTriangle& uv = mesh.uv_faces[face];
  for (const Vec2& p : uv.uv)
    if (!(p.x() >= 0.0 && p.x() <= 1.0 && p.y() >= 0.0 && p.y() <= 1.0))
      throw ValidationError("UV out of bounds on face " + std::to_string(face));

  const int w = atlas.image.width();
  const int h = atlas.image.height();
  const std::array<Vec2, 3> tri{uv_to_atlas(uv.uv[0], w, h), uv_to_atlas(uv.uv[1], w, h), uv_to_atlas(uv.uv[2], w, h)};
  rasterize_triangle(tri, w, h, [&](int x, int y, const std::array<double, 3>&) {
    patch.positions.push_back({x, y});
    for (int c = 0; c < channels; ++c) patch.values[c].push_back(atlas.image.at(x, y, c));
  });
  patch.skipped = patch.positions.empty();
  return patch;
}

Color patch_mean(const TexturePatch& patch) {
  if (patch.size() == 0) throw ValidationError("mean of an empty texture patch (face " + std::to_string(patch.face_id) + ")");
  Color m{};
  for (int c = 0; c < patch.channels(); ++c) {
    double sum = 0.0;
    for (double v : patch.values[c]) sum += v;
    m[c] = sum / static_cast<double>(patch.size());
  }
  return m;
}

PatchCorrection correct_patch(const TexturePatch& patch, const Color& target, double min_mean) {
  for (int c = 0; c < patch.channels(); ++c)
    if (!(std::isfinite(target[c]) && target[c] >= 0.0))
      throw ValidationError("correction target must be finite and non-negative");
  PatchCorrection out;
  out.values = patch.values;
  out.mean = patch_mean(patch);
  std::vector<bool> clamped(patch.size(), false);
  for (int c = 0; c < patch.channels(); ++c) {
    if (out.mean[c] < min_mean) {
      out.skipped = true;
      out.ratio[c] = 1.0;
      continue;
    }
    double ratio = target[c] / out.mean[c];
    if (std::abs(ratio - 1.0) <= kRatioSnap) ratio = 1.0;
    out.ratio[c] = ratio;
    if (ratio == 1.0) continue;
    for (std::size_t t = 0; t < patch.size(); ++t) {
      const double v = patch.values[c][t] * ratio;
      const double cv = std::clamp(v, 0.0, 1.0);
      if (cv != v) clamped[t] = true;
      out.values[c][t] = cv;
    }
  }
  out.clamped = static_cast<std::size_t>(std::count(clamped.begin(), clamped.end(), true));
  return out;
}

CorrectedAtlas correct_atlas(const TextureAtlas& atlas, const TriangleMesh& mesh, const FaceColorTable& colors,
                             const TextureCorrectConfig& config) {
  if (!mesh.has_uvs()) throw ValidationError("mesh has no UVs; texture correction needs uv_faces");
  if (atlas.image.empty()) throw ValidationError("texture atlas is empty");
  if (colors.size() != mesh.face_count())
    throw ValidationError("color table has " + std::to_string(colors.size()) + " entries for " +
                          std::to_string(mesh.face_count()) + " faces");
  if (colors.channels != atlas.image.channels())
    throw ValidationError("color table has " + std::to_string(colors.channels) + " channels, atlas has " +
                          std::to_string(atlas.image.channels()));

  const std::size_t faces = mesh.face_count();
  std::vector<TexturePatch> patches(faces);
  std::vector<std::string> errors(faces);
  const auto n = static_cast<std::int64_t>(faces);
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(config.workers))
  for (std::int64_t f = 0; f < n; ++f) {
    try {
      patches[f] = extract_patch(atlas, mesh, static_cast<FaceId>(f));
    } catch (const std::exception& e) {
      errors[f] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ValidationError(e);

  // Ownership: later (higher) faces overwrite earlier claims.
  const int w = atlas.image.width();
  std::vector<FaceId> owner(static_cast<std::size_t>(w) * atlas.image.height(), kNoFace);
  CorrectedAtlas out;
  for (FaceId f = 0; f < faces; ++f)
    for (const TexelPos& p : patches[f].positions) {
      FaceId& o = owner[static_cast<std::size_t>(p.y) * w + p.x];
      if (o != kNoFace) ++out.contested_texels;
      o = f;
    }

  std::vector<PatchCorrection> corrections(faces);
  out.report.resize(faces);
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(config.workers))
  for (std::int64_t f = 0; f < n; ++f) {
    FaceCorrectionReport& r = out.report[f];
    r.face = static_cast<FaceId>(f);
    const TexturePatch& patch = patches[f];
    const FaceColor& target = colors.faces[f];
    if (patch.skipped || patch.size() == 0) continue;
    r.mean = patch_mean(patch);
    if (!target.colored()) continue;
    r.target = target.value;
    corrections[f] = correct_patch(patch, target.value, config.min_mean);
    r.ratio = corrections[f].ratio;
    r.clamped = corrections[f].clamped;
    r.skipped = corrections[f].skipped;
  }

  out.image = atlas.image;
  const int channels = atlas.image.channels();
  for (FaceId f = 0; f < faces; ++f) {
    if (corrections[f].values.empty()) continue;
    const TexturePatch& patch = patches[f];
    for (std::size_t t = 0; t < patch.size(); ++t) {
      const TexelPos& p = patch.positions[t];
      if (owner[static_cast<std::size_t>(p.y) * w + p.x] != f) continue;
      for (int c = 0; c < channels; ++c) out.image.at(p.x, p.y, c) = corrections[f].values[c][t];
    }
  }
  return out;
}

void write_correction_report(const CorrectedAtlas& corrected, int channels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "face,M_r,M_g,M_b,target_r,target_g,target_b,clamped,skipped\n";
  for (const auto& r : corrected.report) {
    out << r.face;
    for (int c = 0; c < 3; ++c) out << ',' << format_double(r.mean[channels == 1 ? 0 : c]);
    for (int c = 0; c < 3; ++c) out << ',' << format_double(r.target[channels == 1 ? 0 : c]);
    out << ',' << r.clamped << ',' << (r.skipped ? 1 : 0) << '\n';
  }
}

}  // namespace mvcolor
