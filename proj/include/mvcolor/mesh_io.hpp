#pragma once

#include <filesystem>

#include "mvcolor/face_colors.hpp"
#include "mvcolor/mesh.hpp"

namespace mvcolor {

/// Loads OBJ (v/vt/f, mtllib map_Kd) or PLY (ascii, binary little endian).
/// Faces must be triangles; UVs and PLY face colors are loaded when present.
TriangleMesh load_mesh(const std::filesystem::path& path);
TriangleMesh load_obj(const std::filesystem::path& path);
TriangleMesh load_ply(const std::filesystem::path& path);

/// ASCII PLY with double vertex positions and 8-bit per-face RGB.
/// Uncolored faces are written black; gray tables are replicated to RGB.
void export_face_colored_mesh(const TriangleMesh& mesh, const FaceColorTable& colors,
                              const std::filesystem::path& path);

/// Geometry-only ASCII PLY.
void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path);

/// OBJ with UVs plus a sibling MTL whose map_Kd names `texture_file`
/// (written relative to the OBJ directory).
void write_textured_obj(const TriangleMesh& mesh, const std::filesystem::path& obj_path,
                        const std::string& texture_file);

}  // namespace mvcolor
