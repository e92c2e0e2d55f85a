#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mvcolor/camera_io.hpp"
#include "mvcolor/dump.hpp"
#include "mvcolor/image_io.hpp"
#include "mvcolor/mesh_io.hpp"
#include "mvcolor/pipeline.hpp"
#include "mvcolor/synth.hpp"
#include "mvcolor/text.hpp"
#include "mvcolor/texture_correct.hpp"

namespace fs = std::filesystem;

namespace mvcolor::cli {
namespace {

// Prefixes errors with the pipeline stage that raised them.
struct StageError : Error {
  StageError(const std::string& stage, const Error& e) : Error(e.kind(), stage + ": " + e.what()) {}
};

template <class F>
auto stage(const std::string& name, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

// Pipeline options shared by estimate and correct-texture. Each flag maps to
// exactly one config key; values are applied after the file and environment.
struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> flags;
  std::map<std::string, bool> switches;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "flat key=value config file");
    for (const std::string& key : config_keys()) {
      if (key.rfind("dump_", 0) == 0) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        app.add_flag_callback(flag, [this, key] { switches[key] = true; }, "write " + key.substr(5) + " dump");
        continue;
      }
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      app.add_option_function<std::string>(flag, [this, key](const std::string& v) { flags[key] = v; },
                                            "config key " + key);
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig config;
    if (!config_file.empty()) config = parse_config_text(read_text(config_file));
    if (const char* env = std::getenv(kWorkersEnv); env && *env) set_config_value(config, "workers", env);
    for (const auto& [key, value] : flags) set_config_value(config, key, value);
    for (const auto& [key, on] : switches) set_config_value(config, key, on ? "true" : "false");
    config.validate();
    return config;
  }
};

std::string summary_line(const TriangleMesh& mesh, const std::vector<PinholeView>& views, const EstimateResult& r) {
  const std::size_t n = views.size();
  const std::size_t possible = n > 1 ? n * (n - 1) : 0;
  const std::size_t colored = r.colors.colored_count();
  std::ostringstream s;
  s << "faces=" << mesh.face_count() << " colored=" << colored << " uncolored=" << mesh.face_count() - colored
    << " views=" << n << " gain_entries=" << r.gains.entry_count() << '/' << possible << " gain_density="
    << format_double(possible ? static_cast<double>(r.gains.entry_count()) / possible : 0.0);
  return s.str();
}

struct EstimateInputs {
  std::string mesh;
  std::string cameras;
  std::string out = ".";
  ConfigOptions options;
};

TriangleMesh load_mesh_stage(const std::string& path) {
  return stage("load mesh", [&] { return load_mesh(path); });
}

std::vector<PinholeView> load_views_stage(const std::string& path, bool images) {
  return stage("load cameras", [&] {
    if (!fs::exists(path)) throw IoError("cannot read cameras '" + path + "'");
    return load_views(path, images);
  });
}

EstimateResult estimate_stage(const TriangleMesh& mesh, const std::vector<PinholeView>& views,
                              const PipelineConfig& config, const fs::path& out) {
  if (mesh.face_count() == 0) std::cerr << "warning: mesh has no faces; writing empty outputs\n";
  EstimateResult result = stage("estimate", [&] { return estimate_face_colors_detailed(mesh, views, config); });
  stage("write dumps", [&] {
    write_face_colors_csv(result.colors, out / "face_colors.csv");
    if (config.dump_gains) write_gains_csv(result.gains, out / "gains.csv");
    if (config.dump_color_matrix) write_color_matrix_csv(result.color_matrix, out / "color_matrix.csv");
    if (config.dump_visibility) write_visibility_dump(mesh, prepare_views(views, config.channels), out / "visibility.csv");
    return 0;
  });
  return result;
}

int cmd_estimate(const EstimateInputs& in) {
  const PipelineConfig config = stage("config", [&] { return in.options.resolve(); });
  const fs::path out = in.out;
  stage("output", [&] { ensure_dir(out); return 0; });
  stage("output", [&] { write_text(out / "effective_config.txt", to_config_text(config)); return 0; });
  const TriangleMesh mesh = load_mesh_stage(in.mesh);
  const auto views = load_views_stage(in.cameras, true);
  const EstimateResult result = estimate_stage(mesh, views, config, out);
  stage("export", [&] { export_face_colored_mesh(mesh, result.colors, out / "colored.ply"); return 0; });
  std::cout << summary_line(mesh, views, result) << '\n';
  return kOk;
}

int cmd_correct_texture(const EstimateInputs& in) {
  const PipelineConfig config = stage("config", [&] { return in.options.resolve(); });
  const fs::path out = in.out;
  stage("output", [&] { ensure_dir(out); return 0; });
  stage("output", [&] { write_text(out / "effective_config.txt", to_config_text(config)); return 0; });
  TriangleMesh mesh = load_mesh_stage(in.mesh);
  stage("load texture", [&] {
    if (!mesh.has_uvs()) throw ValidationError("mesh has no UVs (no vt records); texture correction needs them");
    if (mesh.atlas_path.empty()) throw ValidationError("mesh material names no texture atlas (map_Kd)");
    return 0;
  });
  TextureAtlas atlas{stage("load texture", [&] { return read_image(mesh.atlas_path); })};
  if (config.channels == ChannelMode::Gray) atlas.image = atlas.image.to_gray();
  const auto views = load_views_stage(in.cameras, true);
  const EstimateResult result = estimate_stage(mesh, views, config, out);
  const CorrectedAtlas corrected = stage("correct texture", [&] {
    return correct_atlas(atlas, mesh, result.colors, TextureCorrectConfig{kDefaultMinPatchMean, config.workers});
  });
  stage("export", [&] {
    write_png(corrected.image, out / "atlas_corrected.png");
    write_textured_obj(mesh, out / "mesh.obj", "atlas_corrected.png");
    write_correction_report(corrected, corrected.image.channels(), out / "correction_report.csv");
    return 0;
  });
  std::size_t clamped = 0, corrected_faces = 0;
  for (const auto& r : corrected.report) {
    clamped += r.clamped;
    corrected_faces += r.skipped ? 0 : 1;
  }
  std::cout << summary_line(mesh, views, result) << " corrected_faces=" << corrected_faces
            << " clamped_texels=" << clamped << " contested_texels=" << corrected.contested_texels << '\n';
  return kOk;
}

struct RenderInputs {
  std::string mesh;
  std::string cameras;
  int camera_index = 0;
  std::string out = "render.png";
};

int cmd_render(const RenderInputs& in) {
  const TriangleMesh mesh = load_mesh_stage(in.mesh);
  const auto views = load_views_stage(in.cameras, false);
  const PinholeView& pose = stage("render", [&]() -> const PinholeView& {
    if (in.camera_index < 0 || static_cast<std::size_t>(in.camera_index) >= views.size())
      throw ValidationError("camera index " + std::to_string(in.camera_index) + " out of range (" +
                            std::to_string(views.size()) + " cameras)");
    return views[in.camera_index];
  });
  const ImageBuffer image = stage("render", [&] {
    if (mesh.has_uvs() && !mesh.atlas_path.empty()) return synth::render_textured(mesh, read_image(mesh.atlas_path), pose);
    std::vector<Color> colors = mesh.face_colors;
    if (colors.size() != mesh.face_count()) {
      if (mesh.face_count() > 0) std::cerr << "warning: mesh carries no face colors; rendering white\n";
      colors.assign(mesh.face_count(), Color{1.0, 1.0, 1.0});
    }
    return synth::render_face_colors(mesh, colors, 3, pose);
  });
  stage("export", [&] { write_png(image, in.out); return 0; });
  return kOk;
}

struct SynthInputs {
  std::string scene = "cube";
  std::string rig = "orbit";
  int subdivisions = 0;
  int views = 8;
  int width = 64;
  int height = 64;
  double gain_min = 1.0;
  double gain_max = 1.0;
  double noise = 0.0;
  double outliers = 0.0;
  std::uint64_t seed = 1;
  std::string workers;
  bool atlas = false;
  std::string out = "synth";
};

int cmd_synth(const SynthInputs& in) {
  synth::SynthConfig config;
  int workers = 0;
  stage("config", [&] {
    config.scene = synth::parse_scene(in.scene);
    config.rig = synth::parse_rig(in.rig);
    config.subdivisions = in.subdivisions;
    config.view_count = in.views;
    config.width = in.width;
    config.height = in.height;
    config.noise_sigma = in.noise;
    config.outlier_fraction = in.outliers;
    config.seed = in.seed;
    if (!(in.gain_min > 0.0 && in.gain_min <= in.gain_max))
      throw ValidationError("gain range must satisfy 0 < gain-min <= gain-max");
    config.gains = synth::sample_gains(in.views, in.gain_min, in.gain_max, in.seed);
    config.validate();
    PipelineConfig p;
    if (const char* env = std::getenv(kWorkersEnv); env && *env) set_config_value(p, "workers", env);
    if (!in.workers.empty()) set_config_value(p, "workers", in.workers);
    p.validate();
    workers = p.workers;
    return 0;
  });

  synth::SynthScene scene = stage("generate", [&] { return synth::generate_scene(config); });
  stage("render", [&] { synth::render_views(scene, config, workers); return 0; });

  const fs::path out = in.out;
  stage("export", [&] {
    ensure_dir(out / "images");
    std::vector<std::string> names;
    for (std::size_t i = 0; i < scene.views.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "images/view_%03zu.png", i);
      names.emplace_back(name);
      write_png(scene.views[i].image, out / name);
    }
    write_ply(scene.mesh, out / "mesh.ply");
    save_views(scene.views, names, out / "cameras.json");
    write_truth_csv(scene.truth, out / "truth.csv");
    write_gains_truth_csv(scene.truth, out / "gains.csv");

    std::ostringstream cfg;
    cfg << "scene=" << synth::to_string(config.scene) << "\nrig=" << synth::to_string(config.rig)
        << "\nsubdivisions=" << config.subdivisions << "\nviews=" << config.view_count << "\nwidth=" << config.width
        << "\nheight=" << config.height << "\ngain_min=" << format_double(in.gain_min)
        << "\ngain_max=" << format_double(in.gain_max) << "\nnoise=" << format_double(config.noise_sigma)
        << "\noutliers=" << format_double(config.outlier_fraction) << "\nseed=" << config.seed << '\n';
    write_text(out / "synth_config.txt", cfg.str());

    if (in.atlas) {
      ensure_dir(out / "textured");
      TriangleMesh textured = scene.mesh;
      const ImageBuffer atlas = synth::bake_best_view_atlas(textured, scene.views);
      write_png(atlas, out / "textured" / "atlas.png");
      write_textured_obj(textured, out / "textured" / "mesh.obj", "atlas.png");
    }
    return 0;
  });
  std::cout << "faces=" << scene.mesh.face_count() << " views=" << scene.views.size() << " out=" << out.string()
            << '\n';
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Consistent per-face colors and texture correction for multi-view meshes", "mvcolor"};
  app.require_subcommand(1);

  EstimateInputs est;
  auto* estimate = app.add_subcommand("estimate", "estimate per-face colors and write a colored PLY");
  estimate->add_option("--mesh", est.mesh, "triangle mesh (OBJ or PLY)")->required();
  estimate->add_option("--cameras", est.cameras, "camera JSON")->required();
  estimate->add_option("--out", est.out, "output directory");
  est.options.attach(*estimate);

  EstimateInputs tex;
  auto* correct = app.add_subcommand("correct-texture", "shift texture patches toward the estimated face colors");
  correct->add_option("--mesh", tex.mesh, "textured OBJ with vt records and an MTL")->required();
  correct->add_option("--cameras", tex.cameras, "camera JSON")->required();
  correct->add_option("--out", tex.out, "output directory");
  tex.options.attach(*correct);

  RenderInputs ren;
  auto* render = app.add_subcommand("render", "flat render of a colored PLY or textured OBJ");
  render->add_option("--mesh", ren.mesh, "colored PLY or textured OBJ")->required();
  render->add_option("--cameras", ren.cameras, "camera JSON")->required();
  render->add_option("--camera-index", ren.camera_index, "camera to render from");
  render->add_option("--out", ren.out, "output PNG");

  SynthInputs syn;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset with ground truth");
  synth_cmd->add_option("--scene", syn.scene, "cube | icosphere | room-box");
  synth_cmd->add_option("--rig", syn.rig, "orbit | sparse-wide");
  synth_cmd->add_option("--subdivisions", syn.subdivisions);
  synth_cmd->add_option("--views", syn.views);
  synth_cmd->add_option("--width", syn.width);
  synth_cmd->add_option("--height", syn.height);
  synth_cmd->add_option("--gain-min", syn.gain_min, "per-view gains are uniform in [gain-min, gain-max]");
  synth_cmd->add_option("--gain-max", syn.gain_max);
  synth_cmd->add_option("--noise", syn.noise, "Gaussian noise sigma");
  synth_cmd->add_option("--outliers", syn.outliers, "fraction of covered pixels replaced by uniform noise");
  synth_cmd->add_option("--seed", syn.seed);
  synth_cmd->add_option("--workers", syn.workers);
  synth_cmd->add_flag("--atlas", syn.atlas, "also bake a best-view textured bundle");
  synth_cmd->add_option("--out", syn.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationFailure;
  }

  try {
    if (*estimate) return cmd_estimate(est);
    if (*correct) return cmd_correct_texture(tex);
    if (*render) return cmd_render(ren);
    if (*synth_cmd) return cmd_synth(syn);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Io ? kIoFailure : kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kValidationFailure;
}

}  // namespace mvcolor::cli
