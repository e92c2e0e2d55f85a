#pragma once

#include <filesystem>
#include <vector>

#include "mvcolor/consistency.hpp"
#include "mvcolor/synth.hpp"

namespace mvcolor {

// CSV writers for intermediate products. All throw IoError when the file
// cannot be created.

/// i,j,channel,gain,agreement,overlap
void write_gains_csv(const GainMatrix& gains, const std::filesystem::path& path);
/// face,view,channel,value,provenance
void write_color_matrix_csv(const ColorMatrix& matrix, const std::filesystem::path& path);
/// face,r,g,b,support (gray tables repeat the value). Uncolored rows are empty.
void write_face_colors_csv(const FaceColorTable& colors, const std::filesystem::path& path);
/// view_id,face_id,pixel_count,visible_fraction plus one face-id PNG per view
/// named `<stem>_view<i>.png` next to the CSV.
void write_visibility_dump(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                           const std::filesystem::path& csv_path);
/// face,r,g,b with the true albedos.
void write_truth_csv(const synth::GroundTruth& truth, const std::filesystem::path& path);
/// view,r,g,b with the true gains.
void write_gains_truth_csv(const synth::GroundTruth& truth, const std::filesystem::path& path);

}  // namespace mvcolor
