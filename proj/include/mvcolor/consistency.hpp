#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mvcolor/face_colors.hpp"
#include "mvcolor/visibility.hpp"

namespace mvcolor {

struct TrimParams {
  double alpha = 0.3;  // fraction trimmed from each end, in [0, 0.5)

  void validate() const;
};

/// Number of samples dropped from each end: floor(n * alpha).
std::size_t trim_count(std::size_t n, double alpha);

/// Sorts, drops floor(n*alpha) samples from each end and averages the rest.
/// Throws ValidationError on empty input or when nothing survives.
double trimmed_mean(std::span<const double> samples, const TrimParams& params = {});

struct ConsistencyParams {
  TrimParams trim;
  std::size_t min_overlap = 3;       // jointly observed faces needed for a gain entry
  double agreement_threshold = 0.0;  // donors need agreement >= this in every channel
  double ratio_epsilon = 1e-6;       // per-face trimmed means must exceed this to enter a ratio
  // Optional clip rule: observations whose trimmed mean reaches this level in
  // any channel enter neither gains nor direct color entries. Off by default.
  double saturation_level = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// Per-view trimmed means of every observed face.
struct ViewFaceMeans {
  ViewId view = 0;
  int channels = 0;
  std::vector<FaceId> faces;   // ascending, same as the observation's `observed`
  std::vector<Color> means;    // aligned with `faces`

  const Color* find(FaceId face) const;
};

ViewFaceMeans face_means(const FaceObservationSet& obs, const TrimParams& params);
std::vector<ViewFaceMeans> face_means(const std::vector<FaceObservationSet>& all_obs, const TrimParams& params,
                                      int workers = 0);

/// Faces observed in both views (ascending).
std::vector<FaceId> overlap_faces(const FaceObservationSet& obs_i, const FaceObservationSet& obs_j);

struct PairGain {
  Color gain{};
  std::size_t overlap = 0;  // faces that entered the ratio average
};

/// Mean over the usable overlap faces of mean_i / mean_j, per channel.
/// A face is usable when both trimmed means exceed ratio_epsilon and neither
/// is clipped, in every channel. Returns nullopt when no face is usable.
std::optional<PairGain> pairwise_gain(const ViewFaceMeans& view_i, const ViewFaceMeans& view_j,
                                      const ConsistencyParams& params);
std::optional<PairGain> pairwise_gain(const FaceObservationSet& obs_i, const FaceObservationSet& obs_j,
                                      const ConsistencyParams& params);

struct GainEntry {
  Color gain{};       // converts view-j intensities to view-i scale
  Color agreement{};  // min(gain, 1/gain), in (0,1]
  std::size_t overlap = 0;
};

/// Dense n x n storage of the sparse pairwise gain matrix.
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(std::size_t view_count, int channels);

  std::size_t view_count() const noexcept { return n_; }
  int channels() const noexcept { return channels_; }
  std::size_t entry_count() const noexcept { return count_; }

  const GainEntry* find(ViewId i, ViewId j) const;
  void set(ViewId i, ViewId j, const GainEntry& entry);

  /// Stored (i, j) pairs in row-major order.
  std::vector<std::pair<ViewId, ViewId>> pairs() const;

 private:
  std::size_t n_ = 0;
  int channels_ = 0;
  std::size_t count_ = 0;
  std::vector<std::optional<GainEntry>> cells_;
};

GainMatrix build_gain_matrix(const std::vector<ViewFaceMeans>& means, const ConsistencyParams& params,
                             int workers = 0);
GainMatrix build_gain_matrix(const std::vector<FaceObservationSet>& all_obs, const ConsistencyParams& params,
                             int workers = 0);

enum class Provenance { Direct, Infilled };

struct ColorCell {
  ViewId view = 0;
  Color value{};
  Provenance provenance = Provenance::Direct;

  bool operator==(const ColorCell&) const = default;
};

/// Sparse faces x views matrix; each row is sorted by view.
struct ColorMatrix {
  std::size_t face_count = 0;
  std::size_t view_count = 0;
  int channels = 0;
  std::vector<std::vector<ColorCell>> rows;

  const ColorCell* find(FaceId face, ViewId view) const;
  std::size_t count(Provenance p) const;
};

ColorMatrix build_color_matrix(const std::vector<ViewFaceMeans>& means, std::size_t face_count,
                               const ConsistencyParams& params);
ColorMatrix build_color_matrix(const std::vector<FaceObservationSet>& all_obs, const ConsistencyParams& params);

/// Fills every empty cell (k, i) from the direct entries C[k][j] of donor views
/// j that have a gain entry (i, j) with agreement >= threshold in all channels:
/// the agreement-weighted mean of C[k][j] * w_ij. Single pass; direct cells
/// are never modified and infilled cells never act as donors.
ColorMatrix infill_color_matrix(const ColorMatrix& matrix, const GainMatrix& gains, double agreement_threshold,
                                int workers = 0);

/// Per face and channel, the trimmed mean of the row entries.
FaceColorTable aggregate_face_colors(const ColorMatrix& matrix, const TrimParams& params, int workers = 0);

}  // namespace mvcolor
