#include <lidreg/commands.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include <lidreg/image_io.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

namespace fs = std::filesystem;

namespace {

std::atomic<int> g_log_level{static_cast<int>(LogLevel::Warn)};

constexpr double kDeg = std::numbers::pi / 180.0;

fs::path out_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create output directory " + cfg.out.string() + ": " + ec.message());
  return cfg.out;
}

std::string pose_hash(const CameraPose& pose) { return fnv1a_hex(format_pose(pose)); }

void write_raster_pair(const fs::path& dir, const std::string& stem, const Raster& r, const std::string& channel,
                       const CameraPose& pose) {
  write_float_raster(dir / (stem + ".f32"), r, channel, pose_hash(pose));
  write_png_gray16(dir / (stem + ".png"), scale_to_u16(r));
}

void warn_unconverged(const SuperResolved& s, const std::string& what) {
  if (!s.converged) log_message(LogLevel::Warn, what + ": propagation stopped at k_max before converging");
}

CameraPose read_theta_global(const PipelineConfig& cfg) {
  const fs::path p = cfg.out / "theta_global.txt";
  if (!fs::exists(p)) throw Error(ErrorKind::IoError, "missing " + p.string() + "; run coarse first");
  return read_pose(p);
}

std::vector<Point2> correspondence_pixels(const PipelineConfig& cfg) {
  std::vector<Point2> px;
  const fs::path p = cfg.out / "correspondences.txt";
  if (!fs::exists(p)) return px;
  for (const auto& c : parse_correspondences(read_text_file(p))) px.push_back(c.image_px);
  return px;
}

}  // namespace

LogLevel log_level_from_env() {
  const char* v = std::getenv("REGISTRAR_LOG");
  if (!v) return LogLevel::Warn;
  const std::string s(v);
  if (s == "error") return LogLevel::Error;
  if (s == "info") return LogLevel::Info;
  if (s == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

void set_log_level(LogLevel level) { g_log_level = static_cast<int>(level); }

void log_message(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) > g_log_level) return;
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << '[' << names[static_cast<int>(level)] << "] " << message << '\n';
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidSpec:
    case ErrorKind::UnknownBuilding:
      return kExitConfig;
    case ErrorKind::IoError:
      return kExitIo;
    case ErrorKind::NonConvergence:
      return kExitNonConvergence;
    default:
      return kExitDegenerate;
  }
}

Workspace load_workspace(const PipelineConfig& cfg) {
  Workspace ws;
  if (cfg.cloud.empty()) {
    log_message(LogLevel::Info, "generating synthetic scene");
    Scene scene = generate_scene(cfg.synth);
    ws.cloud = std::move(scene.cloud);
    ws.image = std::move(scene.image);
    ws.truth = std::move(scene.truth);
  } else {
    if (cfg.image.empty()) throw Error(ErrorKind::InvalidConfig, "image is required when cloud is set");
    ws.cloud = read_cloud(cfg.cloud);
    ws.image.pixels = read_rgb_image(cfg.image);
    ws.image.gsd = cfg.gsd;
    if (!cfg.truth.empty()) {
      log_message(LogLevel::Info, "regenerating truth from " + cfg.truth.string());
      ws.truth = generate_scene(parse_scene_spec(read_text_file(cfg.truth))).truth;
      if (ws.truth->source.size() != ws.cloud.size()) {
        throw Error(ErrorKind::FrameMismatch, "truth scene does not match the configured cloud");
      }
    }
  }
  if (!cfg.pose_hint.empty()) {
    ws.pose_hint = read_pose(cfg.pose_hint);
  } else if (ws.truth) {
    ws.pose_hint = perturb_pose(ws.truth->pose, cfg.perturb_translation, cfg.perturb_angle_deg * kDeg, cfg.seed);
  } else {
    throw Error(ErrorKind::InvalidConfig, "pose_hint is required without a synthetic truth");
  }
  return ws;
}

std::string cmd_synth(const PipelineConfig& cfg) {
  const fs::path dir = out_dir(cfg);
  const Scene scene = generate_scene(cfg.synth);
  write_cloud(dir / "cloud.txt", scene.cloud);
  write_rgb_image(dir / "image.png", scene.image.pixels);
  write_pose(dir / "truth_pose.txt", scene.truth.pose);
  write_text_file(dir / "buildings.csv", format_buildings_csv(scene.truth));
  write_text_file(dir / "edges.csv", format_edges_csv(scene.truth));
  write_text_file(dir / "scene.txt", format_scene_spec(cfg.synth));
  std::ostringstream s;
  s << "buildings " << scene.truth.buildings.size() << "\ntrees " << scene.truth.trees.size() << "\npoints "
    << scene.cloud.size() << "\nimage " << scene.image.pixels.cols() << "x" << scene.image.pixels.rows() << "\n";
  return s.str();
}

std::string cmd_extract_lidar(const PipelineConfig& cfg) {
  const Workspace ws = load_workspace(cfg);
  const LidarStage stage = run_lidar_extraction(ws.cloud, cfg);
  write_text_file(out_dir(cfg) / "regions.wkt", format_regions_wkt(stage.regions));
  return "regions " + std::to_string(stage.regions.size()) + "\n";
}

std::string cmd_extract_image(const PipelineConfig& cfg) {
  const Workspace ws = load_workspace(cfg);
  const ImageStage stage = run_image_extraction(ws.image, cfg);
  write_text_file(out_dir(cfg) / "segments.csv", format_segment_table(stage.segments));
  return "segments " + std::to_string(stage.segments.size()) + "\n";
}

std::string cmd_match(const PipelineConfig& cfg) {
  const Workspace ws = load_workspace(cfg);
  const LidarStage lidar = run_lidar_extraction(ws.cloud, cfg);
  const ImageStage image = run_image_extraction(ws.image, cfg);
  const MatchStage m = run_matching(lidar, image, ws.pose_hint, cfg);
  write_text_file(out_dir(cfg) / "correspondences.txt", format_correspondences(m.validated));
  std::ostringstream s;
  s << "initial " << m.initial.size() << "\nfiltered " << m.filtered.size() << "\nvalidated " << m.validated.size()
    << "\nguided " << (m.guided ? "yes" : "no") << "\n";
  return s.str();
}

std::string cmd_coarse(const PipelineConfig& cfg) {
  const Workspace ws = load_workspace(cfg);
  const fs::path dir = out_dir(cfg);
  const CoarseResult r = run_coarse(ws.cloud, ws.image, ws.pose_hint, cfg);
  write_pose(dir / "pose_hint.txt", ws.pose_hint);
  write_pose(dir / "theta_global.txt", r.estimate.pose);
  write_text_file(dir / "correspondences.txt", format_correspondences(r.match.validated));
  std::ostringstream fit;
  fit << "pairs = " << r.correspondences.size() << "\ndlt_rmse_px = " << format_double(r.estimate.dlt_rmse)
      << "\nrmse_px = " << format_double(r.estimate.rmse) << "\niterations = " << r.estimate.iterations << "\n";
  write_text_file(dir / "coarse_fit.txt", fit.str());
  std::string summary = fit.str();
  if (ws.truth) {
    const std::string report = format_extraction_report(score_coarse(r, *ws.truth, ws.cloud));
    write_text_file(dir / "extraction_report.csv", report);
    summary += report;
  }
  return summary;
}

std::string cmd_superres(const PipelineConfig& cfg) {
  const Workspace ws = load_workspace(cfg);
  const fs::path dir = out_dir(cfg);
  const bool have_global = fs::exists(dir / "theta_global.txt");
  const CameraPose pose = have_global ? read_pose(dir / "theta_global.txt") : ws.pose_hint;
  const Window full{0, 0, ws.image.pixels.rows(), ws.image.pixels.cols()};
  const SuperResolved z = super_resolve(ws.cloud, pose, full, Channel::Elevation, cfg.fista);
  const SuperResolved i = super_resolve(ws.cloud, pose, full, Channel::Intensity, cfg.fista);
  warn_unconverged(z, "z-image");
  warn_unconverged(i, "i-image");
  write_raster_pair(dir, "z_image", z.dense, "elevation", pose);
  write_raster_pair(dir, "i_image", i.dense, "intensity", pose);
  std::ostringstream s;
  s << "pose " << (have_global ? "theta_global" : "pose_hint") << "\nz_iterations " << z.iterations
    << "\ni_iterations " << i.iterations << "\n";
  return s.str();
}

std::string cmd_fine(const PipelineConfig& cfg) {
  const CameraPose theta_global = read_theta_global(cfg);
  const Workspace ws = load_workspace(cfg);
  const fs::path dir = out_dir(cfg);
  const FineResult r = run_fine(ws.cloud, ws.image, theta_global, cfg);
  int flagged = 0;
  for (const auto& p : r.field.grid.patches) {
    if (!p.flagged) continue;
    ++flagged;
    log_message(LogLevel::Warn, "patch " + std::to_string(p.index + 1) + " kept theta_global" +
                                    (p.failure.empty() ? std::string() : ": " + p.failure));
  }
  if (flagged == static_cast<int>(r.field.grid.patches.size())) {
    throw Error(ErrorKind::NonConvergence, "fine: no patch could be optimized");
  }
  warn_unconverged(r.elevation, "z-image");
  warn_unconverged(r.intensity, "i-image");
  write_text_file(dir / "pose_field.txt", format_pose_field(r.field));
  const std::string report = format_patch_report(r.field.grid, correspondence_pixels(cfg));
  write_text_file(dir / "patches.csv", report);
  const CameraPose center = idw_pose(Point2(ws.image.pixels.cols() / 2.0, ws.image.pixels.rows() / 2.0), r.field);
  write_raster_pair(dir, "z_fine", r.elevation.dense, "elevation", center);
  write_raster_pair(dir, "i_fine", r.intensity.dense, "intensity", center);
  return "objective " + to_string(cfg.objective) + "\n" + report;
}

std::string cmd_eval(const PipelineConfig& cfg) {
  const Workspace ws = load_workspace(cfg);
  if (!ws.truth) throw Error(ErrorKind::InvalidConfig, "eval needs a synthetic truth (set truth or omit cloud)");
  const fs::path dir = out_dir(cfg);
  const GroundTruth& truth = *ws.truth;
  const double gsd = ws.image.gsd;

  std::vector<std::pair<std::string, Projector>> stages;
  stages.emplace_back("before", pose_projector(ws.pose_hint));
  std::optional<CameraPose> global;
  if (fs::exists(dir / "theta_global.txt")) {
    global = read_pose(dir / "theta_global.txt");
    stages.emplace_back("coarse", pose_projector(*global));
  }
  std::optional<PoseField> field;
  if (fs::exists(dir / "pose_field.txt")) {
    field = parse_pose_field(read_text_file(dir / "pose_field.txt"));
    stages.emplace_back("fine-" + to_string(cfg.objective), field_projector(*field));
  }

  std::vector<StageRow> centroid_rows, line_rows;
  for (const auto& [name, proj] : stages) {
    centroid_rows.push_back({name, centroid_discrepancy(centroid_check_points(truth, proj, gsd))});
    line_rows.push_back({name, pair_line_report(edge_check_lines(truth, proj, gsd))});
  }
  const std::string centroids = format_stage_table(centroid_rows);
  const std::string lines = format_stage_table(line_rows);
  write_text_file(dir / "centroids.csv", centroids);
  write_text_file(dir / "lines.csv", lines);

  Raster gray;
  if (fs::exists(dir / "i_fine.f32")) {
    gray = read_float_raster(dir / "i_fine.f32");
  } else if (fs::exists(dir / "i_image.f32")) {
    gray = read_float_raster(dir / "i_image.f32");
  } else {
    const Window full{0, 0, ws.image.pixels.rows(), ws.image.pixels.cols()};
    gray = super_resolve(ws.cloud, global ? *global : ws.pose_hint, full, Channel::Intensity, cfg.fista).dense;
  }
  write_rgb_image(dir / "overlay.png", checkerboard_overlay(ws.image.pixels, gray));
  return "centroids\n" + centroids + "lines\n" + lines;
}

std::string cmd_pipeline(const PipelineConfig& cfg) {
  PipelineConfig run = cfg;
  std::string summary;
  if (run.cloud.empty()) {
    summary += cmd_synth(run);
    run.cloud = run.out / "cloud.txt";
    run.image = run.out / "image.png";
    run.truth = run.out / "scene.txt";
    run.gsd = run.synth.gsd;
  }
  write_text_file(out_dir(run) / "config.txt", format_pipeline_config(run));
  log_message(LogLevel::Info, "coarse registration");
  summary += cmd_coarse(run);
  log_message(LogLevel::Info, "fine registration");
  summary += cmd_fine(run);
  log_message(LogLevel::Info, "evaluation");
  summary += cmd_eval(run);
  return summary;
}

}  // namespace lidreg
