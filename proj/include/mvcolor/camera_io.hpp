#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mvcolor/camera.hpp"

namespace mvcolor {

/// Reads the camera JSON array. Each entry:
///   {"intrinsics": [9], "rotation": [9], "translation": [3],
///    "width": int, "height": int, "image": "relative/path.png"}
/// Matrices are row-major, rotation is world-to-camera, image paths are
/// resolved against the JSON file's directory.
std::vector<PinholeView> load_views(const std::filesystem::path& path, bool load_images = true);

/// Writes the camera JSON; `image_paths[i]` is stored verbatim for view i.
void save_views(const std::vector<PinholeView>& views, const std::vector<std::string>& image_paths,
                const std::filesystem::path& path);

}  // namespace mvcolor
