#include "mvcolor/dump.hpp"

#include <fstream>

#include "mvcolor/image_io.hpp"
#include "mvcolor/text.hpp"
#include "mvcolor/visibility.hpp"

namespace mvcolor {
namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_rgb_rows(std::ofstream& out, const std::vector<Color>& rows) {
  out << "r,g,b\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << i << ',' << format_double(rows[i][0]) << ',' << format_double(rows[i][1]) << ','
        << format_double(rows[i][2]) << '\n';
}

}  // namespace

void write_gains_csv(const GainMatrix& gains, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "i,j,channel,gain,agreement,overlap\n";
  for (const auto& [i, j] : gains.pairs()) {
    const GainEntry* e = gains.find(i, j);
    for (int c = 0; c < gains.channels(); ++c)
      out << i << ',' << j << ',' << c << ',' << format_double(e->gain[c]) << ','
          << format_double(e->agreement[c]) << ',' << e->overlap << '\n';
  }
}

void write_color_matrix_csv(const ColorMatrix& matrix, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "face,view,channel,value,provenance\n";
  for (std::size_t k = 0; k < matrix.rows.size(); ++k)
    for (const ColorCell& cell : matrix.rows[k])
      for (int c = 0; c < matrix.channels; ++c)
        out << k << ',' << cell.view << ',' << c << ',' << format_double(cell.value[c]) << ','
            << (cell.provenance == Provenance::Direct ? "direct" : "infilled") << '\n';
}

void write_face_colors_csv(const FaceColorTable& colors, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "face,r,g,b,support\n";
  for (std::size_t k = 0; k < colors.size(); ++k) {
    const FaceColor& fc = colors.faces[k];
    out << k;
    for (int c = 0; c < 3; ++c) {
      out << ',';
      if (fc.colored()) out << format_double(fc.value[colors.channels == 1 ? 0 : c]);
    }
    out << ',' << fc.support << '\n';
  }
}

void write_visibility_dump(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                           const std::filesystem::path& csv_path) {
  auto out = open_csv(csv_path);
  out << "view_id,face_id,pixel_count,visible_fraction\n";
  const auto dir = csv_path.parent_path();
  const auto stem = csv_path.stem().string();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const DepthBuffer buf = rasterize_depth(mesh, views[i]);
    for (const FaceVisibilityStat& s : visibility_stats(buf))
      out << i << ',' << s.face << ',' << s.winning << ',' << format_double(s.visible_fraction()) << '\n';
    write_png(face_id_image(buf), dir / (stem + "_view" + std::to_string(i) + ".png"));
  }
}

void write_truth_csv(const synth::GroundTruth& truth, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "face,";
  write_rgb_rows(out, truth.albedo);
}

void write_gains_truth_csv(const synth::GroundTruth& truth, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "view,";
  write_rgb_rows(out, truth.gains);
}

}  // namespace mvcolor
