#include "mvcolor/mesh_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mvcolor/image_io.hpp"
#include "mvcolor/text.hpp"

namespace mvcolor {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string list_ids(const std::vector<std::size_t>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + std::to_string(ids[i]);
  if (ids.size() > shown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

// ---------------------------------------------------------------- OBJ

std::map<std::string, std::string> read_mtl_textures(const std::filesystem::path& path) {
  std::map<std::string, std::string> textures;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read material library '" + path.string() + "'");
  std::string line, current;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "newmtl") {
      ss >> current;
    } else if (key == "map_Kd") {
      // The file name is the last token; options such as -s may precede it.
      std::string tok, last;
      while (ss >> tok) last = tok;
      if (!last.empty()) textures[current] = (path.parent_path() / last).string();
    }
  }
  return textures;
}

// Resolves an OBJ index token (1-based, negative = relative) to 0-based.
long resolve_obj_index(const std::string& tok, std::size_t count) {
  const auto v = parse_number<long>(tok);
  if (!v || *v == 0) return -1;
  return *v > 0 ? *v - 1 : static_cast<long>(count) + *v;
}

}  // namespace

TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read mesh '" + path.string() + "'");

  TriangleMesh mesh;
  std::vector<Vec2> texcoords;
  std::vector<std::array<long, 3>> uv_index;
  std::vector<std::size_t> non_triangles;
  std::vector<std::size_t> dangling;
  std::map<std::string, std::string> textures;
  std::string first_material;
  bool any_uv = false;

  std::string line;
  std::size_t face_counter = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key) || key[0] == '#') continue;
    if (key == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) throw ValidationError("malformed vertex record: " + line);
      mesh.vertices.push_back(p);
    } else if (key == "vt") {
      Vec2 t;
      if (!(ss >> t.x() >> t.y())) throw ValidationError("malformed vt record: " + line);
      texcoords.push_back(t);
    } else if (key == "f") {
      std::vector<std::string> corners;
      std::string tok;
      while (ss >> tok) corners.push_back(tok);
      const std::size_t face = face_counter++;
      if (corners.size() != 3) {
        non_triangles.push_back(face);
        continue;
      }
      std::array<std::uint32_t, 3> idx{};
      std::array<long, 3> uv{-1, -1, -1};
      bool ok = true;
      for (int c = 0; c < 3; ++c) {
        const std::string& corner = corners[c];
        const auto slash = corner.find('/');
        const long vi = resolve_obj_index(corner.substr(0, slash), mesh.vertices.size());
        if (vi < 0 || static_cast<std::size_t>(vi) >= mesh.vertices.size()) ok = false;
        idx[c] = static_cast<std::uint32_t>(std::max(vi, 0L));
        if (slash != std::string::npos) {
          const auto slash2 = corner.find('/', slash + 1);
          const std::string vt = corner.substr(slash + 1, slash2 == std::string::npos ? std::string::npos
                                                                                      : slash2 - slash - 1);
          if (!vt.empty()) {
            uv[c] = resolve_obj_index(vt, texcoords.size());
            if (uv[c] < 0 || static_cast<std::size_t>(uv[c]) >= texcoords.size()) ok = false;
          }
        }
      }
      if (!ok) dangling.push_back(face);
      mesh.faces.push_back(idx);
      uv_index.push_back(uv);
      any_uv = any_uv || (uv[0] >= 0 && uv[1] >= 0 && uv[2] >= 0);
    } else if (key == "mtllib") {
      std::string name;
      std::getline(ss >> std::ws, name);
      while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
      const auto mtl_path = path.parent_path() / name;
      if (std::filesystem::exists(mtl_path)) {
        auto t = read_mtl_textures(mtl_path);
        textures.insert(t.begin(), t.end());
      }
    } else if (key == "usemtl") {
      std::string name;
      ss >> name;
      if (first_material.empty() && textures.count(name)) first_material = name;
    }
  }

  if (!non_triangles.empty())
    throw ValidationError("non-triangulated faces (only triangles supported): " + list_ids(non_triangles));
  if (!dangling.empty()) throw ValidationError("dangling index in faces: " + list_ids(dangling));

  if (any_uv) {
    mesh.uv_faces.reserve(mesh.faces.size());
    for (const auto& uv : uv_index) {
      if (uv[0] < 0 || uv[1] < 0 || uv[2] < 0) {
        mesh.uv_faces.push_back(UvTriangle::missing());
      } else {
        mesh.uv_faces.push_back(UvTriangle{{texcoords[uv[0]], texcoords[uv[1]], texcoords[uv[2]]}});
      }
    }
  }
  if (!first_material.empty()) {
    mesh.atlas_path = textures[first_material];
  } else if (textures.size() == 1) {
    mesh.atlas_path = textures.begin()->second;
  }
  mesh.validate();
  return mesh;
}

// ---------------------------------------------------------------- PLY

namespace {

enum class PlyFormat { Ascii, BinaryLE };

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw ValidationError("unknown PLY property type '" + t + "'");
}

bool ply_is_integer(const std::string& t) { return t != "float" && t != "float32" && t != "double" && t != "float64"; }

class PlyReader {
 public:
  PlyReader(std::istream& in, PlyFormat format) : in_(in), format_(format) {}

  double read(const std::string& type) {
    if (format_ == PlyFormat::Ascii) {
      std::string tok;
      if (!(in_ >> tok)) throw ValidationError("unexpected end of PLY data");
      const auto v = parse_number<double>(tok);
      if (!v) throw ValidationError("malformed PLY value '" + tok + "'");
      return *v;
    }
    unsigned char buf[8];
    const std::size_t n = ply_type_size(type);
    if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n)))
      throw ValidationError("unexpected end of PLY data");
    if (type == "char" || type == "int8") return static_cast<std::int8_t>(buf[0]);
    if (type == "uchar" || type == "uint8") return buf[0];
    if (type == "short" || type == "int16") return load<std::int16_t>(buf);
    if (type == "ushort" || type == "uint16") return load<std::uint16_t>(buf);
    if (type == "int" || type == "int32") return load<std::int32_t>(buf);
    if (type == "uint" || type == "uint32") return load<std::uint32_t>(buf);
    if (type == "float" || type == "float32") return load<float>(buf);
    return load<double>(buf);
  }

 private:
  template <class T>
  static T load(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::istream& in_;
  PlyFormat format_;
};

}  // namespace

TriangleMesh load_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read mesh '" + path.string() + "'");

  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw ValidationError("not a PLY file: '" + path.string() + "'");

  PlyFormat format = PlyFormat::Ascii;
  std::vector<PlyElement> elements;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii") {
        format = PlyFormat::Ascii;
      } else if (fmt == "binary_little_endian") {
        format = PlyFormat::BinaryLE;
      } else {
        throw ValidationError("unsupported PLY format '" + fmt + "'");
      }
    } else if (key == "element") {
      PlyElement e;
      ss >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) throw ValidationError("PLY property before element");
      PlyProperty p;
      std::string t;
      ss >> t;
      if (t == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ss >> p.name;
      }
      ply_type_size(p.type);
      elements.back().props.push_back(p);
    } else if (key == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw ValidationError("PLY header missing end_header");

  TriangleMesh mesh;
  PlyReader reader(in, format);
  std::vector<std::size_t> non_triangles;
  bool face_has_color = false;
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      mesh.vertices.reserve(e.count);
      for (std::size_t i = 0; i < e.count; ++i) {
        Vec3 p = Vec3::Zero();
        for (const auto& prop : e.props) {
          if (prop.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(prop.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(prop.type);
            continue;
          }
          const double v = reader.read(prop.type);
          if (prop.name == "x") p.x() = v;
          else if (prop.name == "y") p.y() = v;
          else if (prop.name == "z") p.z() = v;
        }
        mesh.vertices.push_back(p);
      }
    } else if (e.name == "face") {
      mesh.faces.reserve(e.count);
      for (const auto& prop : e.props)
        if (prop.name == "red" || prop.name == "green" || prop.name == "blue") face_has_color = true;
      for (std::size_t i = 0; i < e.count; ++i) {
        std::array<std::uint32_t, 3> idx{};
        Color color{};
        for (const auto& prop : e.props) {
          if (prop.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(prop.count_type));
            std::vector<double> values(n);
            for (auto& v : values) v = reader.read(prop.type);
            if (prop.name == "vertex_indices" || prop.name == "vertex_index") {
              if (n != 3) {
                non_triangles.push_back(i);
              } else {
                for (int c = 0; c < 3; ++c) {
                  if (values[c] < 0) throw ValidationError("dangling index: negative vertex index in face " +
                                                           std::to_string(i));
                  idx[c] = static_cast<std::uint32_t>(values[c]);
                }
              }
            }
            continue;
          }
          const double v = reader.read(prop.type);
          const double scaled = ply_is_integer(prop.type) ? v / 255.0 : v;
          if (prop.name == "red") color[0] = scaled;
          else if (prop.name == "green") color[1] = scaled;
          else if (prop.name == "blue") color[2] = scaled;
        }
        mesh.faces.push_back(idx);
        if (face_has_color) mesh.face_colors.push_back(color);
      }
    } else {
      for (std::size_t i = 0; i < e.count; ++i)
        for (const auto& prop : e.props) {
          if (prop.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(prop.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(prop.type);
          } else {
            reader.read(prop.type);
          }
        }
    }
  }
  if (!non_triangles.empty())
    throw ValidationError("non-triangulated faces (only triangles supported): " + list_ids(non_triangles));
  mesh.validate();
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot read mesh '" + path.string() + "': no such file");
  const std::string ext = lower(path.extension().string());
  if (ext == ".obj") return load_obj(path);
  if (ext == ".ply") return load_ply(path);
  throw ValidationError("unsupported mesh format '" + ext + "' (expected .obj or .ply)");
}

// ---------------------------------------------------------------- writers

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_ply_impl(const TriangleMesh& mesh, const FaceColorTable* colors, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\n";
  if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& idx = mesh.faces[f];
    out << "3 " << idx[0] << ' ' << idx[1] << ' ' << idx[2];
    if (colors) {
      const FaceColor& fc = colors->faces[f];
      for (int c = 0; c < 3; ++c) {
        const double v = fc.colored() ? fc.value[colors->channels == 1 ? 0 : c] : 0.0;
        out << ' ' << static_cast<int>(quantize_unit(v));
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void export_face_colored_mesh(const TriangleMesh& mesh, const FaceColorTable& colors,
                              const std::filesystem::path& path) {
  if (colors.size() != mesh.face_count())
    throw ValidationError("color table has " + std::to_string(colors.size()) + " entries for " +
                          std::to_string(mesh.face_count()) + " faces");
  write_ply_impl(mesh, &colors, path);
}

void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path) { write_ply_impl(mesh, nullptr, path); }

void write_textured_obj(const TriangleMesh& mesh, const std::filesystem::path& obj_path,
                        const std::string& texture_file) {
  if (!mesh.has_uvs()) throw ValidationError("mesh has no UVs to write");
  const std::string mtl_name = obj_path.stem().string() + ".mtl";
  {
    std::ofstream mtl = open_out(obj_path.parent_path() / mtl_name);
    mtl << "newmtl atlas\nKa 1 1 1\nKd 1 1 1\nmap_Kd " << texture_file << "\n";
  }
  std::ofstream out = open_out(obj_path);
  out << "mtllib " << mtl_name << "\n";
  for (const auto& v : mesh.vertices)
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (const auto& t : mesh.uv_faces)
    for (const auto& uv : t.uv) {
      const Vec2 w = t.present() ? uv : Vec2(0.0, 0.0);
      out << "vt " << format_double(w.x()) << ' ' << format_double(w.y()) << '\n';
    }
  out << "usemtl atlas\n";
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& idx = mesh.faces[f];
    out << 'f';
    for (int c = 0; c < 3; ++c) out << ' ' << idx[c] + 1 << '/' << 3 * f + c + 1;
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + obj_path.string() + "'");
}

}  // namespace mvcolor
