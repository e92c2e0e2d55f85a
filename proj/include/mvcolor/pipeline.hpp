#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvcolor/consistency.hpp"

namespace mvcolor {

enum class ChannelMode { Rgb, Gray };

/// Every knob of a run. Serializes to flat `key=value` text so a run can be
/// reproduced from its inputs plus this file.
struct PipelineConfig {
  double alpha = 0.3;
  std::size_t min_pixels = 5;
  double visibility_fraction = 0.75;
  std::size_t min_overlap = 3;
  double agreement_threshold = 0.0;
  double saturation_level = std::numeric_limits<double>::infinity();  // off
  ChannelMode channels = ChannelMode::Rgb;
  int workers = 0;  // 0 = OpenMP default
  bool dump_gains = false;
  bool dump_color_matrix = false;
  bool dump_visibility = false;
  std::uint64_t seed = 1;

  void validate() const;
  VisibilityParams visibility() const { return {min_pixels, visibility_fraction}; }
  ConsistencyParams consistency() const;

  bool operator==(const PipelineConfig&) const = default;
};

std::string to_config_text(const PipelineConfig& config);
/// Applies the keys present in `text` on top of `base`. Unknown keys and
/// malformed values throw ValidationError.
PipelineConfig parse_config_text(const std::string& text, PipelineConfig base = {});
/// Assigns one field by its config key.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

struct EstimateResult {
  std::vector<std::size_t> observed_per_view;
  GainMatrix gains;
  ColorMatrix color_matrix;  // direct + infilled entries
  FaceColorTable colors;
};

/// visibility -> gain matrix -> direct color matrix -> infill -> aggregation.
EstimateResult estimate_face_colors_detailed(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                                             const PipelineConfig& config);
FaceColorTable estimate_face_colors(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                                    const PipelineConfig& config);

/// Views with images converted for the configured channel mode.
std::vector<PinholeView> prepare_views(const std::vector<PinholeView>& views, ChannelMode mode);

}  // namespace mvcolor
