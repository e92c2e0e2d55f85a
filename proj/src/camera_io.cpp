#include "mvcolor/camera_io.hpp"

#include <fstream>

#include <json.hpp>

#include "mvcolor/image_io.hpp"

namespace mvcolor {
namespace {

using json = nlohmann::json;

Mat3 read_mat3(const json& entry, const char* key, std::size_t index) {
  const auto& arr = entry.at(key);
  if (!arr.is_array() || arr.size() != 9)
    throw ValidationError("camera " + std::to_string(index) + ": '" + key + "' must hold 9 numbers");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = arr.at(r * 3 + c).get<double>();
  return m;
}

json mat3_json(const Mat3& m) {
  json arr = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) arr.push_back(m(r, c));
  return arr;
}

}  // namespace

std::vector<PinholeView> load_views(const std::filesystem::path& path, bool load_images) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read cameras '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed camera JSON '" + path.string() + "': " + e.what());
  }
  if (!doc.is_array()) throw ValidationError("camera JSON must be an array");

  std::vector<PinholeView> views;
  views.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    PinholeView view;
    std::string image_rel;
    try {
      view.intrinsics = read_mat3(entry, "intrinsics", i);
      view.rotation = read_mat3(entry, "rotation", i);
      const auto& t = entry.at("translation");
      if (!t.is_array() || t.size() != 3)
        throw ValidationError("camera " + std::to_string(i) + ": 'translation' must hold 3 numbers");
      view.translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
      view.width = entry.at("width").get<int>();
      view.height = entry.at("height").get<int>();
      image_rel = entry.at("image").get<std::string>();
    } catch (const json::exception& e) {
      throw ValidationError("malformed camera entry " + std::to_string(i) + ": " + e.what());
    }
    try {
      view.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("camera " + std::to_string(i) + ": " + e.what());
    }
    if (load_images) {
      const auto image_path = path.parent_path() / image_rel;
      if (!std::filesystem::exists(image_path))
        throw IoError("camera " + std::to_string(i) + ": missing image '" + image_path.string() + "'");
      view.image = read_image(image_path);
      view.validate();
    }
    views.push_back(std::move(view));
  }
  return views;
}

void save_views(const std::vector<PinholeView>& views, const std::vector<std::string>& image_paths,
                const std::filesystem::path& path) {
  if (image_paths.size() != views.size()) throw ValidationError("one image path per view required");
  json doc = json::array();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    doc.push_back({{"intrinsics", mat3_json(v.intrinsics)},
                   {"rotation", mat3_json(v.rotation)},
                   {"translation", {v.translation.x(), v.translation.y(), v.translation.z()}},
                   {"width", v.width},
                   {"height", v.height},
                   {"image", image_paths[i]}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write cameras '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace mvcolor
