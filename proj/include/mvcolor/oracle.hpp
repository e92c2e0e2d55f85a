#pragma once

#include <vector>

#include "mvcolor/pipeline.hpp"

namespace mvcolor::synth {

// Brute-force reference path. Visibility is found by casting one ray per
// pixel center against every face; the color equations are evaluated with
// plain nested loops over dense arrays. Deliberately slow and serial.

inline constexpr double kTieEpsilon = 1e-9;
inline constexpr std::size_t kOracleMaxFaces = 50;
inline constexpr std::size_t kOracleMaxViews = 8;
inline constexpr int kOracleMaxImageSide = 64;

struct RaycastBuffer {
  int width = 0;
  int height = 0;
  std::vector<FaceId> face_id;          // nearest front-facing hit, kNoFace if none
  std::vector<double> depth;            // camera-space z of that hit
  std::vector<bool> tie;                // runner-up within kTieEpsilon of the winner
  std::vector<FaceId> tie_partner;      // runner-up face at tie pixels
  std::vector<std::uint32_t> footprint; // per face: pixels whose ray hits it (front-facing, z >= near)
};

RaycastBuffer raycast_face_ids(const TriangleMesh& mesh, const PinholeView& view);

struct OracleResult {
  FaceColorTable colors;
  std::vector<bool> tie_faces;  // faces touching a visibility tie in any view
};

/// Throws ValidationError when the instance exceeds the oracle's size limits.
OracleResult oracle_estimate(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                             const PipelineConfig& config);

}  // namespace mvcolor::synth
