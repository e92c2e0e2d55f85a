#include "mvcolor/pipeline.hpp"

#include <sstream>

#include "mvcolor/text.hpp"

namespace mvcolor {
namespace {

template <class T>
T parse_or_throw(const std::string& key, const std::string& value) {
  const auto v = parse_number<T>(value);
  if (!v) throw ValidationError("config key '" + key + "': malformed value '" + value + "'");
  return *v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ValidationError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void PipelineConfig::validate() const {
  consistency().validate();
  if (min_pixels < 1) throw ValidationError("min_pixels must be >= 1");
  if (!(visibility_fraction >= 0.0 && visibility_fraction <= 1.0))
    throw ValidationError("visibility_fraction must lie in [0, 1]");
  if (workers < 0) throw ValidationError("workers must be >= 0");
}

ConsistencyParams PipelineConfig::consistency() const {
  ConsistencyParams p;
  p.trim.alpha = alpha;
  p.min_overlap = min_overlap;
  p.agreement_threshold = agreement_threshold;
  p.saturation_level = saturation_level;
  return p;
}

std::vector<std::string> config_keys() {
  return {"alpha",   "min_pixels", "visibility_fraction", "min_overlap",       "agreement_threshold",
          "saturation_level", "channels", "workers", "dump_gains", "dump_color_matrix",
          "dump_visibility", "seed"};
}

void set_config_value(PipelineConfig& c, const std::string& key, const std::string& value) {
  if (key == "alpha") c.alpha = parse_or_throw<double>(key, value);
  else if (key == "min_pixels") c.min_pixels = parse_or_throw<std::size_t>(key, value);
  else if (key == "visibility_fraction") c.visibility_fraction = parse_or_throw<double>(key, value);
  else if (key == "min_overlap") c.min_overlap = parse_or_throw<std::size_t>(key, value);
  else if (key == "agreement_threshold") c.agreement_threshold = parse_or_throw<double>(key, value);
  else if (key == "saturation_level") c.saturation_level = parse_or_throw<double>(key, value);
  else if (key == "channels") {
    if (value == "rgb") c.channels = ChannelMode::Rgb;
    else if (value == "gray") c.channels = ChannelMode::Gray;
    else throw ValidationError("config key 'channels': expected rgb or gray, got '" + value + "'");
  } else if (key == "workers") c.workers = parse_or_throw<int>(key, value);
  else if (key == "dump_gains") c.dump_gains = parse_bool(key, value);
  else if (key == "dump_color_matrix") c.dump_color_matrix = parse_bool(key, value);
  else if (key == "dump_visibility") c.dump_visibility = parse_bool(key, value);
  else if (key == "seed") c.seed = parse_or_throw<std::uint64_t>(key, value);
  else throw ValidationError("unknown config key '" + key + "'");
}

std::string to_config_text(const PipelineConfig& c) {
  std::ostringstream out;
  out << "alpha=" << format_double(c.alpha) << '\n'
      << "min_pixels=" << c.min_pixels << '\n'
      << "visibility_fraction=" << format_double(c.visibility_fraction) << '\n'
      << "min_overlap=" << c.min_overlap << '\n'
      << "agreement_threshold=" << format_double(c.agreement_threshold) << '\n'
      << "saturation_level=" << format_double(c.saturation_level) << '\n'
      << "channels=" << (c.channels == ChannelMode::Rgb ? "rgb" : "gray") << '\n'
      << "workers=" << c.workers << '\n'
      << "dump_gains=" << (c.dump_gains ? "true" : "false") << '\n'
      << "dump_color_matrix=" << (c.dump_color_matrix ? "true" : "false") << '\n'
      << "dump_visibility=" << (c.dump_visibility ? "true" : "false") << '\n'
      << "seed=" << c.seed << '\n';
  return out.str();
}

PipelineConfig parse_config_text(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
    set_config_value(base, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return base;
}

std::vector<PinholeView> prepare_views(const std::vector<PinholeView>& views, ChannelMode mode) {
  std::vector<PinholeView> out = views;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].image.empty())
      throw ValidationError("view " + std::to_string(i) + " has no image");
    if (mode == ChannelMode::Gray) out[i].image = out[i].image.to_gray();
    if (out[i].image.channels() != out.front().image.channels())
      throw ValidationError("views mix 1- and 3-channel images; use channels=gray");
  }
  return out;
}

EstimateResult estimate_face_colors_detailed(const TriangleMesh& mesh, const std::vector<PinholeView>& input_views,
                                             const PipelineConfig& config) {
  config.validate();
  mesh.validate();
  const std::vector<PinholeView> views = prepare_views(input_views, config.channels);
  const ConsistencyParams params = config.consistency();

  const auto observations = observe_views(mesh, views, config.visibility(), config.workers);
  const auto means = face_means(observations, params.trim, config.workers);

  EstimateResult result;
  for (const auto& o : observations) result.observed_per_view.push_back(o.observed.size());
  result.gains = build_gain_matrix(means, params, config.workers);
  const ColorMatrix direct = build_color_matrix(means, mesh.face_count(), params);
  result.color_matrix = infill_color_matrix(direct, result.gains, params.agreement_threshold, config.workers);
  result.colors = aggregate_face_colors(result.color_matrix, params.trim, config.workers);
  if (!views.empty()) result.colors.channels = views.front().image.channels();
  return result;
}

FaceColorTable estimate_face_colors(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                                    const PipelineConfig& config) {
  return estimate_face_colors_detailed(mesh, views, config).colors;
}

}  // namespace mvcolor
