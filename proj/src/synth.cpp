#include "mvcolor/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <omp.h>

#include "mvcolor/raster.hpp"
#include "mvcolor/texture_correct.hpp"
#include "mvcolor/visibility.hpp"

namespace mvcolor::synth {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent streams for albedos, rig jitter and each rendered view.
constexpr std::uint64_t kAlbedoStream = 0xA1BED0ull;
constexpr std::uint64_t kRigStream = 0x51Aull;
constexpr std::uint64_t kGainStream = 0x6A1Aull;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) { return std::mt19937_64(splitmix64(seed ^ splitmix64(stream))); }

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

void add_box(TriangleMesh& mesh, double half, int subdivisions, bool inward) {
  struct Side {
    Vec3 n, u, v;
  };
  const Side sides[6] = {{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()},  {-Vec3::UnitX(), Vec3::UnitZ(), Vec3::UnitY()},
                         {Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitX()},  {-Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ()},
                         {Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()},  {-Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitX()}};
  const int cells = subdivisions + 1;
  for (const Side& s : sides) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int j = 0; j <= cells; ++j)
      for (int i = 0; i <= cells; ++i) {
        const double a = -1.0 + 2.0 * i / cells;
        const double b = -1.0 + 2.0 * j / cells;
        mesh.vertices.push_back(half * (s.n + a * s.u + b * s.v));
      }
    auto id = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (cells + 1) + i); };
    for (int j = 0; j < cells; ++j)
      for (int i = 0; i < cells; ++i) {
        const std::uint32_t p00 = id(i, j), p10 = id(i + 1, j), p11 = id(i + 1, j + 1), p01 = id(i, j + 1);
        if (inward) {
          mesh.faces.push_back({p00, p11, p10});
          mesh.faces.push_back({p00, p01, p11});
        } else {
          mesh.faces.push_back({p00, p10, p11});
          mesh.faces.push_back({p00, p11, p01});
        }
      }
  }
}

void add_icosphere(TriangleMesh& mesh, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<std::uint32_t, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto id = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    for (const auto& tri : f) {
      const std::uint32_t a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  mesh.vertices = v;
  mesh.faces = f;
  // Orient every face outward.
  for (auto& tri : mesh.faces) {
    const Vec3 n = (v[tri[1]] - v[tri[0]]).cross(v[tri[2]] - v[tri[0]]);
    if (n.dot(v[tri[0]] + v[tri[1]] + v[tri[2]]) < 0.0) std::swap(tri[1], tri[2]);
  }
}

PinholeView make_camera(const Vec3& eye, const Vec3& target, int width, int height, double half_fov) {
  PinholeView view;
  view.width = width;
  view.height = height;
  const double f = 0.5 * std::max(width, height) / std::tan(half_fov);
  view.intrinsics << f, 0, 0.5 * width, 0, f, 0.5 * height, 0, 0, 1;
  look_at(view, eye, target);
  return view;
}

}  // namespace

SceneKind parse_scene(const std::string& name) {
  if (name == "cube") return SceneKind::Cube;
  if (name == "icosphere") return SceneKind::Icosphere;
  if (name == "room-box" || name == "room") return SceneKind::RoomBox;
  throw ValidationError("unknown scene '" + name + "' (cube, icosphere, room-box)");
}

RigKind parse_rig(const std::string& name) {
  if (name == "orbit") return RigKind::Orbit;
  if (name == "sparse-wide") return RigKind::SparseWide;
  throw ValidationError("unknown rig '" + name + "' (orbit, sparse-wide)");
}

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::Cube: return "cube";
    case SceneKind::Icosphere: return "icosphere";
    case SceneKind::RoomBox: return "room-box";
  }
  return "?";
}

std::string to_string(RigKind kind) { return kind == RigKind::Orbit ? "orbit" : "sparse-wide"; }

void SynthConfig::validate() const {
  if (view_count < 1) throw ValidationError("view_count must be >= 1");
  if (rig == RigKind::SparseWide && (view_count < 4 || view_count > 6))
    throw ValidationError("sparse-wide rig uses 4 to 6 views");
  if (subdivisions < 0 || subdivisions > 6) throw ValidationError("subdivisions must lie in [0, 6]");
  if (width < 1 || height < 1) throw ValidationError("image size must be positive");
  if (!gains.empty() && gains.size() != static_cast<std::size_t>(view_count))
    throw ValidationError("need one gain per view");
  for (const auto& g : gains)
    for (double c : g)
      if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("gains must be positive and finite");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be non-negative");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) throw ValidationError("outlier_fraction must lie in [0, 1)");
}

std::vector<Color> sample_gains(int view_count, double lo, double hi, std::uint64_t seed) {
  if (!(lo > 0.0 && hi >= lo)) throw ValidationError("gain range must satisfy 0 < lo <= hi");
  auto rng = make_rng(seed, kGainStream);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<Color> gains(view_count);
  for (auto& g : gains)
    for (double& c : g) c = lo == hi ? lo : dist(rng);
  return gains;
}

SynthScene generate_scene(const SynthConfig& config) {
  config.validate();
  SynthScene scene;
  double radius = 1.0;
  switch (config.scene) {
    case SceneKind::Cube:
      add_box(scene.mesh, 1.0, config.subdivisions, false);
      radius = std::sqrt(3.0);
      break;
    case SceneKind::Icosphere:
      add_icosphere(scene.mesh, config.subdivisions);
      radius = 1.0;
      break;
    case SceneKind::RoomBox:
      add_box(scene.mesh, 2.0, config.subdivisions, true);
      radius = 2.0 * std::sqrt(3.0);
      break;
  }

  auto albedo_rng = make_rng(config.seed, kAlbedoStream);
  std::uniform_real_distribution<double> albedo(kAlbedoMin, kAlbedoMax);
  scene.truth.albedo.resize(scene.mesh.face_count());
  for (auto& a : scene.truth.albedo)
    for (double& c : a) c = albedo(albedo_rng);
  scene.truth.gains = config.gains.empty() ? std::vector<Color>(config.view_count, Color{1.0, 1.0, 1.0}) : config.gains;

  const int n = config.view_count;
  const Vec3 center = Vec3::Zero();
  constexpr double pi = std::numbers::pi;
  if (config.scene == SceneKind::RoomBox) {
    // Inside the room on a small circle, each camera looking through the
    // centroid at the far wall; elevation alternates to catch floor and ceiling.
    for (int i = 0; i < n; ++i) {
      const double az = 2.0 * pi * i / n;
      const double z = (n == 1 ? 0.0 : (i % 2 == 0 ? 0.5 : -0.5));
      const Vec3 eye(0.8 * std::cos(az), 0.8 * std::sin(az), z);
      scene.views.push_back(make_camera(eye, center, config.width, config.height, 55.0 * pi / 180.0));
    }
    return scene;
  }

  const double distance = 1.5 * radius;
  // Half field of view that keeps the bounding sphere in frame, plus margin.
  const double half_fov = std::atan(std::tan(std::asin(radius / distance)) * 1.08);
  if (config.rig == RigKind::Orbit) {
    // Two stacked rings sharing azimuths, above and below the equator. With
    // eight views on a cube these are the corner directions: every camera sees
    // three sides and cameras one ring step apart share two of them.
    const double elevation = std::atan(1.0 / std::sqrt(2.0));
    const int per_ring = (n + 1) / 2;
    for (int i = 0; i < n; ++i) {
      const double az = pi / 4.0 + 2.0 * pi * (i / 2) / per_ring;
      const double el = (i % 2 == 0) ? elevation : -elevation;
      const Vec3 eye = distance * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      scene.views.push_back(make_camera(eye, center, config.width, config.height, half_fov));
    }
  } else {
    auto rng = make_rng(config.seed, kRigStream);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec3> dirs;
    const double min_cos = std::cos(60.0 * pi / 180.0);
    for (int attempt = 0; static_cast<int>(dirs.size()) < n; ++attempt) {
      if (attempt > 100000) throw ValidationError("could not place sparse-wide cameras");
      const Vec3 d = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
      const bool far_enough = std::all_of(dirs.begin(), dirs.end(), [&](const Vec3& o) { return o.dot(d) <= min_cos; });
      if (far_enough) dirs.push_back(d);
    }
    for (const Vec3& d : dirs)
      scene.views.push_back(make_camera(distance * d, center, config.width, config.height, half_fov));
  }
  return scene;
}

ImageBuffer render_view(const TriangleMesh& mesh, const GroundTruth& truth, const PinholeView& pose,
                        const Color& gain, double noise_sigma, double outlier_fraction, std::uint64_t seed,
                        ViewId view_id) {
  if (truth.albedo.size() != mesh.face_count()) throw ValidationError("one albedo per face required");
  const DepthBuffer buf = rasterize_depth(mesh, pose);
  ImageBuffer img(pose.width, pose.height, 3, 0.0);
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(0x7E4DE5ull + view_id)));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  for (int y = 0; y < pose.height; ++y)
    for (int x = 0; x < pose.width; ++x) {
      const FaceId f = buf.face_at(x, y);
      if (f == kNoFace) continue;
      const bool outlier = outlier_fraction > 0.0 && uniform(rng) < outlier_fraction;
      for (int c = 0; c < 3; ++c) {
        double v;
        if (outlier) {
          v = uniform(rng);
        } else {
          v = truth.albedo[f][c] * gain[c];
          if (noise_sigma > 0.0) v += noise(rng);
        }
        img.at(x, y, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  return img;
}

void render_views(SynthScene& scene, const SynthConfig& config, int workers) {
  const auto n = static_cast<std::int64_t>(scene.views.size());
#pragma omp parallel for schedule(dynamic) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    scene.views[i].image = render_view(scene.mesh, scene.truth, scene.views[i], scene.truth.gains[i],
                                       config.noise_sigma, config.outlier_fraction, config.seed,
                                       static_cast<ViewId>(i));
  }
}

SynthMetrics evaluate(const FaceColorTable& recovered, const GroundTruth& truth) {
  if (recovered.size() != truth.albedo.size()) throw ValidationError("face count mismatch in evaluate");
  SynthMetrics m;
  m.channels = recovered.channels;
  std::vector<std::vector<double>> ratios(m.channels);
  for (std::size_t k = 0; k < recovered.size(); ++k) {
    const FaceColor& fc = recovered.faces[k];
    if (!fc.colored()) {
      ++m.uncolored;
      continue;
    }
    const Color& a = truth.albedo[k];
    if (m.channels == 1) {
      ratios[0].push_back(fc.value[0] / (0.299 * a[0] + 0.587 * a[1] + 0.114 * a[2]));
    } else {
      for (int c = 0; c < m.channels; ++c) ratios[c].push_back(fc.value[c] / a[c]);
    }
  }
  for (int c = 0; c < m.channels; ++c) {
    auto& r = ratios[c];
    if (r.empty()) continue;
    std::sort(r.begin(), r.end());
    const std::size_t n = r.size();
    m.median_ratio[c] = n % 2 ? r[n / 2] : 0.5 * (r[n / 2 - 1] + r[n / 2]);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    double max_dev = 0.0;
    for (double v : r) {
      var += (v - mean) * (v - mean);
      max_dev = std::max(max_dev, std::abs(v - mean));
    }
    var /= static_cast<double>(n);
    m.cov[c] = std::sqrt(var) / mean;
    m.max_rel_dev[c] = max_dev / mean;
  }
  return m;
}

ImageBuffer bake_best_view_atlas(TriangleMesh& mesh, const std::vector<PinholeView>& views, int cell_size) {
  if (cell_size < 4) throw ValidationError("atlas cell size must be >= 4");
  const std::size_t faces = mesh.face_count();
  const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(faces)))));
  const int rows = std::max(1, static_cast<int>((faces + cols - 1) / cols));
  const int width = cols * cell_size;
  const int height = rows * cell_size;

  // Best view per face: most winning pixels.
  std::vector<int> best(faces, -1);
  std::vector<std::uint32_t> best_count(faces, 0);
  std::vector<DepthBuffer> buffers;
  for (std::size_t v = 0; v < views.size(); ++v) {
    buffers.push_back(rasterize_depth(mesh, views[v]));
    for (const auto& s : visibility_stats(buffers.back()))
      if (s.winning > best_count[s.face]) {
        best_count[s.face] = s.winning;
        best[s.face] = static_cast<int>(v);
      }
  }

  ImageBuffer atlas(width, height, 3, 0.0);
  mesh.uv_faces.assign(faces, UvTriangle::missing());
  for (std::size_t f = 0; f < faces; ++f) {
    const int x0 = static_cast<int>(f % cols) * cell_size;
    const int y0 = static_cast<int>(f / cols) * cell_size;
    const std::array<Vec2, 3> texel{Vec2(x0 + 1.0, y0 + 1.0), Vec2(x0 + cell_size - 1.0, y0 + 1.0),
                                    Vec2(x0 + 1.0, y0 + cell_size - 1.0)};
    UvTriangle uv;
    for (int c = 0; c < 3; ++c) uv.uv[c] = Vec2(texel[c].x() / width, 1.0 - texel[c].y() / height);
    mesh.uv_faces[f] = uv;
    if (best[f] < 0) continue;
    const PinholeView& view = views[best[f]];
    const FaceGeometry g = face_world_data(mesh, static_cast<FaceId>(f));
    rasterize_triangle(texel, width, height, [&](int x, int y, const std::array<double, 3>& b) {
      const Vec3 p = b[0] * g.corners[0] + b[1] * g.corners[1] + b[2] * g.corners[2];
      const Vec2 px = project_point(view, p).pixel;
      const int ix = std::clamp(static_cast<int>(std::floor(px.x())), 0, view.width - 1);
      const int iy = std::clamp(static_cast<int>(std::floor(px.y())), 0, view.height - 1);
      for (int c = 0; c < 3; ++c) atlas.at(x, y, c) = view.image.at(ix, iy, c);
    });
  }
  return atlas;
}

ImageBuffer render_face_colors(const TriangleMesh& mesh, const std::vector<Color>& colors, int channels,
                               const PinholeView& pose) {
  if (colors.size() != mesh.face_count()) throw ValidationError("one color per face required");
  const DepthBuffer buf = rasterize_depth(mesh, pose);
  ImageBuffer img(pose.width, pose.height, 3, 0.0);
  for (int y = 0; y < pose.height; ++y)
    for (int x = 0; x < pose.width; ++x) {
      const FaceId f = buf.face_at(x, y);
      if (f == kNoFace) continue;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = std::clamp(colors[f][channels == 1 ? 0 : c], 0.0, 1.0);
    }
  return img;
}

ImageBuffer render_textured(const TriangleMesh& mesh, const ImageBuffer& atlas, const PinholeView& pose) {
  if (!mesh.has_uvs()) throw ValidationError("mesh has no UVs");
  const DepthBuffer buf = rasterize_depth(mesh, pose);
  ImageBuffer img(pose.width, pose.height, 3, 0.0);
  const Mat3 k_inv = pose.intrinsics.inverse();
  const Vec3 origin = pose.center();
  for (int y = 0; y < pose.height; ++y)
    for (int x = 0; x < pose.width; ++x) {
      const FaceId f = buf.face_at(x, y);
      if (f == kNoFace || !mesh.uv_faces[f].present()) continue;
      const FaceGeometry g = face_world_data(mesh, f);
      const Vec3 dir = pose.rotation.transpose() * (k_inv * Vec3(x + 0.5, y + 0.5, 1.0));
      const double t = g.normal.dot(g.corners[0] - origin) / g.normal.dot(dir);
      const Vec3 p = origin + t * dir;
      // Barycentrics from sub-triangle areas.
      const Vec3 n = (g.corners[1] - g.corners[0]).cross(g.corners[2] - g.corners[0]);
      const double inv = 1.0 / n.squaredNorm();
      const double b1 = (g.corners[2] - g.corners[0]).cross(p - g.corners[0]).dot(n) * -inv;
      const double b2 = (g.corners[1] - g.corners[0]).cross(p - g.corners[0]).dot(n) * inv;
      const double b0 = 1.0 - b1 - b2;
      const auto& uv = mesh.uv_faces[f].uv;
      const Vec2 q = uv_to_atlas(b0 * uv[0] + b1 * uv[1] + b2 * uv[2], atlas.width(), atlas.height());
      const int tx = std::clamp(static_cast<int>(std::floor(q.x())), 0, atlas.width() - 1);
      const int ty = std::clamp(static_cast<int>(std::floor(q.y())), 0, atlas.height() - 1);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = atlas.at(tx, ty, atlas.channels() == 1 ? 0 : c);
    }
  return img;
}

}  // namespace mvcolor::synth
