#include "mvcolor/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvcolor/visibility.hpp"

namespace mvcolor::synth {
namespace {

double plain_trimmed_mean(std::vector<double> v, double alpha) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const auto k = static_cast<std::size_t>(std::floor(n * alpha + 1e-9));
  if (n - 2 * k == 0 || 2 * k > n) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / n;
  }
  double s = 0.0;
  for (std::size_t i = k; i < n - k; ++i) s += v[i];
  return s / static_cast<double>(n - 2 * k);
}

// Moller-Trumbore from the camera origin; edges inclusive. Returns hit z or NaN.
double intersect(const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (det == 0.0) return nan;
  const double inv = 1.0 / det;
  const Vec3 s = -a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return nan;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return nan;
  const double t = e2.dot(q) * inv;
  return t * dir.z();
}

}  // namespace

RaycastBuffer raycast_face_ids(const TriangleMesh& mesh, const PinholeView& view) {
  RaycastBuffer out;
  out.width = view.width;
  out.height = view.height;
  const std::size_t pixels = static_cast<std::size_t>(view.width) * view.height;
  out.face_id.assign(pixels, kNoFace);
  out.depth.assign(pixels, std::numeric_limits<double>::infinity());
  out.tie.assign(pixels, false);
  out.tie_partner.assign(pixels, kNoFace);
  out.footprint.assign(mesh.face_count(), 0);

  // Camera-space triangles that face the camera.
  const Vec3 eye = -view.rotation.transpose() * view.translation;
  std::vector<std::array<Vec3, 3>> tris(mesh.face_count());
  std::vector<bool> usable(mesh.face_count(), false);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& idx = mesh.faces[f];
    const Vec3 a = mesh.vertices[idx[0]], b = mesh.vertices[idx[1]], c = mesh.vertices[idx[2]];
    const Vec3 n = (b - a).cross(c - a);
    if (0.5 * n.norm() < kDegenerateArea) continue;
    if (n.dot((a + b + c) / 3.0 - eye) >= 0.0) continue;
    usable[f] = true;
    tris[f] = {view.rotation * a + view.translation, view.rotation * b + view.translation,
               view.rotation * c + view.translation};
  }

  const Mat3 k_inv = view.intrinsics.inverse();
  for (int y = 0; y < view.height; ++y)
    for (int x = 0; x < view.width; ++x) {
      const Vec3 dir = k_inv * Vec3(x + 0.5, y + 0.5, 1.0);
      double best = std::numeric_limits<double>::infinity();
      double second = std::numeric_limits<double>::infinity();
      FaceId winner = kNoFace;
      FaceId runner = kNoFace;
      for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        if (!usable[f]) continue;
        const double z = intersect(dir, tris[f][0], tris[f][1], tris[f][2]);
        if (!(z >= kNearPlane)) continue;
        ++out.footprint[f];
        if (z < best) {
          second = best;
          runner = winner;
          best = z;
          winner = static_cast<FaceId>(f);
        } else if (z < second) {
          second = z;
          runner = static_cast<FaceId>(f);
        }
      }
      const std::size_t i = static_cast<std::size_t>(y) * view.width + x;
      out.face_id[i] = winner;
      out.depth[i] = best;
      if (winner != kNoFace && runner != kNoFace && second - best <= kTieEpsilon) {
        out.tie[i] = true;
        out.tie_partner[i] = runner;
      }
    }
  return out;
}

OracleResult oracle_estimate(const TriangleMesh& mesh, const std::vector<PinholeView>& input_views,
                             const PipelineConfig& config) {
  const std::size_t r = mesh.face_count();
  const std::size_t n = input_views.size();
  if (r > kOracleMaxFaces || n > kOracleMaxViews)
    throw ValidationError("instance too large for the oracle");
  for (const auto& v : input_views)
    if (v.width > kOracleMaxImageSide || v.height > kOracleMaxImageSide)
      throw ValidationError("instance too large for the oracle (image side > 64)");

  std::vector<PinholeView> views = input_views;
  if (config.channels == ChannelMode::Gray)
    for (auto& v : views) v.image = v.image.to_gray();
  const int channels = n ? views.front().image.channels() : 3;

  OracleResult result;
  result.tie_faces.assign(r, false);

  // observed[i][k], mean[i][k][c]
  std::vector<std::vector<bool>> observed(n, std::vector<bool>(r, false));
  std::vector<std::vector<Color>> mean(n, std::vector<Color>(r, Color{}));
  for (std::size_t i = 0; i < n; ++i) {
    const RaycastBuffer buf = raycast_face_ids(mesh, views[i]);
    std::vector<std::uint32_t> winning(r, 0);
    for (std::size_t p = 0; p < buf.face_id.size(); ++p) {
      if (buf.face_id[p] != kNoFace) ++winning[buf.face_id[p]];
      if (buf.tie[p]) {
        result.tie_faces[buf.face_id[p]] = true;
        result.tie_faces[buf.tie_partner[p]] = true;
      }
    }
    for (std::size_t k = 0; k < r; ++k) {
      const double fp = buf.footprint[k];
      observed[i][k] = buf.footprint[k] > 0 && buf.footprint[k] >= config.min_pixels &&
                       winning[k] >= config.min_pixels && winning[k] >= config.visibility_fraction * fp;
      if (!observed[i][k]) continue;
      for (int c = 0; c < channels; ++c) {
        std::vector<double> samples;
        for (int y = 0; y < buf.height; ++y)
          for (int x = 0; x < buf.width; ++x)
            if (buf.face_id[static_cast<std::size_t>(y) * buf.width + x] == k)
              samples.push_back(views[i].image.at(x, y, c));
        mean[i][k][c] = plain_trimmed_mean(samples, config.alpha);
      }
    }
  }

  auto clipped = [&](const Color& m) {
    for (int c = 0; c < channels; ++c)
      if (m[c] >= config.saturation_level) return true;
    return false;
  };
  const double eps = ConsistencyParams{}.ratio_epsilon;

  // Pairwise gains over the jointly observed faces.
  std::vector<std::vector<bool>> has_w(n, std::vector<bool>(n, false));
  std::vector<std::vector<Color>> w(n, std::vector<Color>(n, Color{}));
  std::vector<std::vector<Color>> agree(n, std::vector<Color>(n, Color{}));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      Color sum{};
      std::size_t l = 0;
      for (std::size_t k = 0; k < r; ++k) {
        if (!observed[i][k] || !observed[j][k]) continue;
        if (clipped(mean[i][k]) || clipped(mean[j][k])) continue;
        bool ok = true;
        for (int c = 0; c < channels; ++c) ok = ok && mean[i][k][c] > eps && mean[j][k][c] > eps;
        if (!ok) continue;
        for (int c = 0; c < channels; ++c) sum[c] += mean[i][k][c] / mean[j][k][c];
        ++l;
      }
      if (l == 0 || l < config.min_overlap) continue;
      has_w[i][j] = true;
      for (int c = 0; c < channels; ++c) {
        w[i][j][c] = sum[c] / l;
        agree[i][j][c] = std::min(w[i][j][c], 1.0 / w[i][j][c]);
      }
    }

  // Direct entries.
  std::vector<std::vector<bool>> direct(r, std::vector<bool>(n, false));
  std::vector<std::vector<Color>> cmat(r, std::vector<Color>(n, Color{}));
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (observed[i][k] && !clipped(mean[i][k])) {
        direct[k][i] = true;
        cmat[k][i] = mean[i][k];
      }

  // Infill from direct donors only, then the row trimmed mean.
  result.colors.channels = channels;
  result.colors.faces.assign(r, FaceColor{});
  for (std::size_t k = 0; k < r; ++k) {
    std::vector<Color> row;
    for (std::size_t i = 0; i < n; ++i) {
      if (direct[k][i]) {
        row.push_back(cmat[k][i]);
        continue;
      }
      Color num{}, den{};
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (!direct[k][j] || !has_w[i][j]) continue;
        bool ok = true;
        for (int c = 0; c < channels; ++c) ok = ok && agree[i][j][c] >= config.agreement_threshold;
        if (!ok) continue;
        any = true;
        for (int c = 0; c < channels; ++c) {
          num[c] += agree[i][j][c] * cmat[k][j][c] * w[i][j][c];
          den[c] += agree[i][j][c];
        }
      }
      if (!any) continue;
      Color v{};
      for (int c = 0; c < channels; ++c) v[c] = num[c] / den[c];
      row.push_back(v);
    }
    if (row.empty()) continue;
    FaceColor& fc = result.colors.faces[k];
    fc.support = row.size();
    for (int c = 0; c < channels; ++c) {
      std::vector<double> vals;
      for (const auto& e : row) vals.push_back(e[c]);
      fc.value[c] = plain_trimmed_mean(vals, config.alpha);
    }
  }
  return result;
}

}  // namespace mvcolor::synth
