#include "mvcolor/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <omp.h>

namespace mvcolor {
namespace {

int resolve_workers(int workers) { return workers > 0 ? workers : omp_get_max_threads(); }

bool is_clipped(const Color& c, int channels, double level) {
  for (int ch = 0; ch < channels; ++ch)
    if (c[ch] >= level) return true;
  return false;
}

// Weighted mean with the terms summed in sorted order, so the result does not
// depend on the order donors were visited in.
double ordered_weighted_mean(std::vector<std::pair<double, double>>& weight_value) {
  std::sort(weight_value.begin(), weight_value.end());
  double num = 0.0;
  double den = 0.0;
  for (const auto& [w, v] : weight_value) {
    num += w * v;
    den += w;
  }
  return num / den;
}

}  // namespace

void TrimParams::validate() const {
  if (!(alpha >= 0.0 && alpha < 0.5)) throw ValidationError("alpha must lie in [0, 0.5), got " + std::to_string(alpha));
}

void ConsistencyParams::validate() const {
  trim.validate();
  if (min_overlap < 1) throw ValidationError("min_overlap must be >= 1");
  if (!(agreement_threshold >= 0.0 && agreement_threshold <= 1.0))
    throw ValidationError("agreement_threshold must lie in [0, 1]");
  if (!(ratio_epsilon >= 0.0)) throw ValidationError("ratio_epsilon must be non-negative");
  if (!(saturation_level > 0.0)) throw ValidationError("saturation_level must be positive");
}

std::size_t trim_count(std::size_t n, double alpha) {
  // The small offset absorbs representation error in n*alpha (e.g. 10*0.3).
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * alpha + 1e-9));
}

double trimmed_mean(std::span<const double> samples, const TrimParams& params) {
  if (samples.empty()) throw ValidationError("trimmed mean of an empty sample vector");
  params.validate();
  const std::size_t n = samples.size();
  const std::size_t k = trim_count(n, params.alpha);
  if (2 * k >= n) throw ValidationError("trimmed mean truncates all " + std::to_string(n) + " samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = k; i < n - k; ++i) sum += sorted[i];
  return sum / static_cast<double>(n - 2 * k);
}

// ---------------------------------------------------------------- face means

const Color* ViewFaceMeans::find(FaceId face) const {
  const auto it = std::lower_bound(faces.begin(), faces.end(), face);
  if (it == faces.end() || *it != face) return nullptr;
  return &means[static_cast<std::size_t>(it - faces.begin())];
}

ViewFaceMeans face_means(const FaceObservationSet& obs, const TrimParams& params) {
  ViewFaceMeans out;
  out.view = obs.view_id;
  out.faces = obs.observed;
  out.means.resize(obs.observed.size());
  if (obs.samples.size() != obs.observed.size())
    throw ValidationError("observation set for view " + std::to_string(obs.view_id) + " has not been sampled");
  out.channels = obs.samples.empty() ? 0 : obs.samples.front().channels();
  for (std::size_t i = 0; i < obs.observed.size(); ++i) {
    const PixelSampleVector& s = obs.samples[i];
    if (s.channels() != out.channels) throw ValidationError("inconsistent channel counts within a view");
    Color c{};
    for (int ch = 0; ch < s.channels(); ++ch) c[ch] = trimmed_mean(s.samples[ch], params);
    out.means[i] = c;
  }
  return out;
}

std::vector<ViewFaceMeans> face_means(const std::vector<FaceObservationSet>& all_obs, const TrimParams& params,
                                      int workers) {
  std::vector<ViewFaceMeans> out(all_obs.size());
  const auto n = static_cast<std::int64_t>(all_obs.size());
  // Exceptions must not escape an OpenMP region; capture the first one.
  std::vector<std::string> errors(all_obs.size());
#pragma omp parallel for schedule(dynamic) num_threads(resolve_workers(workers))
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      out[i] = face_means(all_obs[i], params);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw ValidationError(e);
  return out;
}

// ---------------------------------------------------------------- gains

std::vector<FaceId> overlap_faces(const FaceObservationSet& obs_i, const FaceObservationSet& obs_j) {
  std::vector<FaceId> out;
  std::set_intersection(obs_i.observed.begin(), obs_i.observed.end(), obs_j.observed.begin(), obs_j.observed.end(),
                        std::back_inserter(out));
  return out;
}

std::optional<PairGain> pairwise_gain(const ViewFaceMeans& view_i, const ViewFaceMeans& view_j,
                                      const ConsistencyParams& params) {
  const int channels = std::max(view_i.channels, view_j.channels);
  if (view_i.channels != view_j.channels && !view_i.faces.empty() && !view_j.faces.empty())
    throw ValidationError("views " + std::to_string(view_i.view) + " and " + std::to_string(view_j.view) +
                          " have different channel counts");
  Color sum{};
  std::size_t used = 0;
  std::size_t a = 0, b = 0;
  while (a < view_i.faces.size() && b < view_j.faces.size()) {
    if (view_i.faces[a] < view_j.faces[b]) {
      ++a;
    } else if (view_j.faces[b] < view_i.faces[a]) {
      ++b;
    } else {
      const Color& mi = view_i.means[a];
      const Color& mj = view_j.means[b];
      bool usable = !is_clipped(mi, channels, params.saturation_level) &&
                    !is_clipped(mj, channels, params.saturation_level);
      for (int c = 0; c < channels && usable; ++c)
        usable = mi[c] > params.ratio_epsilon && mj[c] > params.ratio_epsilon;
      if (usable) {
        for (int c = 0; c < channels; ++c) sum[c] += mi[c] / mj[c];
        ++used;
      }
      ++a;
      ++b;
    }
  }
  if (used == 0) return std::nullopt;
  PairGain out;
  out.overlap = used;
  for (int c = 0; c < channels; ++c) out.gain[c] = sum[c] / static_cast<double>(used);
  return out;
}

std::optional<PairGain> pairwise_gain(const FaceObservationSet& obs_i, const FaceObservationSet& obs_j,
                                      const ConsistencyParams& params) {
  return pairwise_gain(face_means(obs_i, params.trim), face_means(obs_j, params.trim), params);
}

GainMatrix::GainMatrix(std::size_t view_count, int channels)
    : n_(view_count), channels_(channels), cells_(view_count * view_count) {}

const GainEntry* GainMatrix::find(ViewId i, ViewId j) const {
  if (i >= n_ || j >= n_) return nullptr;
  const auto& cell = cells_[static_cast<std::size_t>(i) * n_ + j];
  return cell ? &*cell : nullptr;
}

void GainMatrix::set(ViewId i, ViewId j, const GainEntry& entry) {
  if (i >= n_ || j >= n_ || i == j) throw ValidationError("gain matrix index out of range");
  auto& cell = cells_[static_cast<std::size_t>(i) * n_ + j];
  if (!cell) ++count_;
  cell = entry;
}

std::vector<std::pair<ViewId, ViewId>> GainMatrix::pairs() const {
  std::vector<std::pair<ViewId, ViewId>> out;
  out.reserve(count_);
  for (ViewId i = 0; i < n_; ++i)
    for (ViewId j = 0; j < n_; ++j)
      if (cells_[static_cast<std::size_t>(i) * n_ + j]) out.emplace_back(i, j);
  return out;
}

GainMatrix build_gain_matrix(const std::vector<ViewFaceMeans>& means, const ConsistencyParams& params, int workers) {
  params.validate();
  const std::size_t n = means.size();
  int channels = 0;
  for (const auto& m : means) channels = std::max(channels, m.channels);
  for (const auto& m : means)
    if (!m.faces.empty() && m.channels != channels)
      throw ValidationError("view " + std::to_string(m.view) + " has a different channel count");
  GainMatrix matrix(n, channels);
  std::vector<std::optional<GainEntry>> slots(n * n);
  const auto total = static_cast<std::int64_t>(n * n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(resolve_workers(workers))
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const std::size_t i = static_cast<std::size_t>(idx) / n;
    const std::size_t j = static_cast<std::size_t>(idx) % n;
    if (i == j) continue;
    const auto pg = pairwise_gain(means[i], means[j], params);
    if (!pg || pg->overlap < params.min_overlap) continue;
    GainEntry e;
    e.gain = pg->gain;
    e.overlap = pg->overlap;
    for (int c = 0; c < channels; ++c) e.agreement[c] = std::min(pg->gain[c], 1.0 / pg->gain[c]);
    slots[idx] = e;
  }
  for (std::size_t idx = 0; idx < n * n; ++idx)
    if (slots[idx]) matrix.set(static_cast<ViewId>(idx / n), static_cast<ViewId>(idx % n), *slots[idx]);
  return matrix;
}

GainMatrix build_gain_matrix(const std::vector<FaceObservationSet>& all_obs, const ConsistencyParams& params,
                             int workers) {
  return build_gain_matrix(face_means(all_obs, params.trim, workers), params, workers);
}

// ---------------------------------------------------------------- color matrix

const ColorCell* ColorMatrix::find(FaceId face, ViewId view) const {
  if (face >= rows.size()) return nullptr;
  const auto& row = rows[face];
  const auto it = std::lower_bound(row.begin(), row.end(), view,
                                   [](const ColorCell& c, ViewId v) { return c.view < v; });
  return (it != row.end() && it->view == view) ? &*it : nullptr;
}

std::size_t ColorMatrix::count(Provenance p) const {
  std::size_t n = 0;
  for (const auto& row : rows)
    for (const auto& cell : row) n += cell.provenance == p ? 1 : 0;
  return n;
}

ColorMatrix build_color_matrix(const std::vector<ViewFaceMeans>& means, std::size_t face_count,
                               const ConsistencyParams& params) {
  ColorMatrix m;
  m.face_count = face_count;
  m.view_count = means.size();
  for (const auto& v : means) m.channels = std::max(m.channels, v.channels);
  m.rows.assign(face_count, {});
  // Views are visited in ascending order, so rows come out sorted.
  for (std::size_t i = 0; i < means.size(); ++i) {
    const ViewFaceMeans& v = means[i];
    for (std::size_t k = 0; k < v.faces.size(); ++k) {
      if (v.faces[k] >= face_count) throw ValidationError("observed face id out of range");
      if (is_clipped(v.means[k], v.channels, params.saturation_level)) continue;
      m.rows[v.faces[k]].push_back(ColorCell{static_cast<ViewId>(i), v.means[k], Provenance::Direct});
    }
  }
  return m;
}

ColorMatrix build_color_matrix(const std::vector<FaceObservationSet>& all_obs, const ConsistencyParams& params) {
  const std::size_t faces = all_obs.empty() ? 0 : all_obs.front().observed.size() + all_obs.front().unobserved.size();
  return build_color_matrix(face_means(all_obs, params.trim), faces, params);
}

ColorMatrix infill_color_matrix(const ColorMatrix& matrix, const GainMatrix& gains, double agreement_threshold,
                                int workers) {
  if (gains.view_count() != matrix.view_count && gains.view_count() != 0)
    throw ValidationError("gain matrix and color matrix disagree on view count");
  ColorMatrix out = matrix;
  const int channels = matrix.channels;
  const auto rows = static_cast<std::int64_t>(matrix.rows.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(workers))
  for (std::int64_t k = 0; k < rows; ++k) {
    const auto& row = matrix.rows[k];
    if (row.empty()) continue;
    std::vector<ColorCell> filled;
    std::vector<std::pair<double, double>> terms;
    std::size_t cursor = 0;
    for (ViewId i = 0; i < matrix.view_count; ++i) {
      while (cursor < row.size() && row[cursor].view < i) ++cursor;
      if (cursor < row.size() && row[cursor].view == i) continue;  // direct entry present

      std::vector<std::pair<const ColorCell*, const GainEntry*>> donors;
      for (const ColorCell& cell : row) {
        if (cell.provenance != Provenance::Direct) continue;
        const GainEntry* e = gains.find(i, cell.view);
        if (!e) continue;
        bool agree = true;
        for (int c = 0; c < channels && agree; ++c) agree = e->agreement[c] >= agreement_threshold;
        if (agree) donors.emplace_back(&cell, e);
      }
      if (donors.empty()) continue;
      ColorCell cell{i, {}, Provenance::Infilled};
      for (int c = 0; c < channels; ++c) {
        terms.clear();
        for (const auto& [d, e] : donors) terms.emplace_back(e->agreement[c], d->value[c] * e->gain[c]);
        cell.value[c] = ordered_weighted_mean(terms);
      }
      filled.push_back(cell);
    }
    if (filled.empty()) continue;
    auto& dst = out.rows[k];
    dst.insert(dst.end(), filled.begin(), filled.end());
    std::sort(dst.begin(), dst.end(), [](const ColorCell& a, const ColorCell& b) { return a.view < b.view; });
  }
  return out;
}

FaceColorTable aggregate_face_colors(const ColorMatrix& matrix, const TrimParams& params, int workers) {
  params.validate();
  FaceColorTable table;
  table.channels = matrix.channels == 0 ? 3 : matrix.channels;
  table.faces.assign(matrix.rows.size(), FaceColor{});
  const auto rows = static_cast<std::int64_t>(matrix.rows.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(resolve_workers(workers))
  for (std::int64_t k = 0; k < rows; ++k) {
    const auto& row = matrix.rows[k];
    if (row.empty()) continue;
    FaceColor fc;
    fc.support = row.size();
    std::vector<double> values(row.size());
    for (int c = 0; c < matrix.channels; ++c) {
      for (std::size_t e = 0; e < row.size(); ++e) values[e] = row[e].value[c];
      if (2 * trim_count(values.size(), params.alpha) >= values.size()) {
        std::sort(values.begin(), values.end());
        fc.value[c] = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      } else {
        fc.value[c] = trimmed_mean(values, params);
      }
    }
    table.faces[k] = fc;
  }
  return table;
}

}  // namespace mvcolor
