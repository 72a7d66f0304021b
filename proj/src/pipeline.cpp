#include <lidreg/pipeline.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Field {
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

std::map<std::string, Field> config_fields(PipelineConfig& c) {
  std::map<std::string, Field> f;
  const auto real = [&](const std::string& key, double& v) {
    f[key] = {[&v, key](std::string_view s) { v = parse_double(s, key); }, [&v] { return format_double(v); }};
  };
  const auto degrees = [&](const std::string& key, double& v) {
    f[key] = {[&v, key](std::string_view s) { v = parse_double(s, key) * kDeg; },
              [&v] { return format_double(v / kDeg); }};
  };
  const auto integer = [&](const std::string& key, int& v) {
    f[key] = {[&v, key](std::string_view s) { v = static_cast<int>(parse_integer(s, key)); },
              [&v] { return std::to_string(v); }};
  };
  const auto path = [&](const std::string& key, std::filesystem::path& v) {
    f[key] = {[&v](std::string_view s) { v = std::string(s); }, [&v] { return v.string(); }};
  };
  path("cloud", c.cloud);
  path("image", c.image);
  path("pose_hint", c.pose_hint);
  path("truth", c.truth);
  path("out", c.out);
  real("gsd", c.gsd);
  f["seed"] = {[&c](std::string_view s) {
                 const long long v = parse_integer(s, "seed");
                 if (v < 0) throw Error(ErrorKind::InvalidConfig, "seed must be non-negative");
                 c.seed = static_cast<std::uint64_t>(v);
               },
               [&c] { return std::to_string(c.seed); }};

  real("extraction.relief_factor", c.extraction.relief_factor);
  real("extraction.grid_resolution", c.extraction.grid_resolution);
  real("extraction.min_segment_area", c.extraction.min_segment_area);
  integer("extraction.opening_radius", c.extraction.opening_radius);

  real("segmentation.spatial_bandwidth", c.segmentation.spatial_bandwidth);
  real("segmentation.range_bandwidth", c.segmentation.range_bandwidth);
  integer("segmentation.min_region", c.segmentation.min_region);
  integer("segmentation.max_iterations", c.segmentation.max_iterations);

  real("refine.min_area", c.refine.min_area);
  real("refine.max_area", c.refine.max_area);
  real("refine.mbr_threshold", c.refine.mbr_threshold);

  integer("matching.gtm_k", c.matching.gtm_k);
  real("matching.area_tolerance", c.matching.area_tolerance);
  degrees("matching.direction_tolerance_deg", c.matching.direction_tolerance);
  real("matching.dominance", c.dominance);
  f["matching.filter"] = {[&c](std::string_view s) {
                            if (s == "gtm") c.filter = MatchFilter::Gtm;
                            else if (s == "ransac") c.filter = MatchFilter::Ransac;
                            else throw Error(ErrorKind::InvalidConfig, "matching.filter must be gtm or ransac");
                          },
                          [&c] { return std::string(c.filter == MatchFilter::Gtm ? "gtm" : "ransac"); }};
  real("matching.ransac_threshold", c.ransac_threshold);
  integer("matching.ransac_iterations", c.ransac_iterations);
  integer("pose.max_iterations", c.pose_iterations);

  real("fista.lambda", c.fista.lambda);
  real("fista.gamma", c.fista.gamma);
  integer("fista.k_max", c.fista.k_max);
  real("fista.epsilon", c.fista.epsilon);
  real("fine.fista_lambda", c.fine_fista.lambda);
  real("fine.fista_gamma", c.fine_fista.gamma);
  integer("fine.fista_k_max", c.fine_fista.k_max);
  real("fine.fista_epsilon", c.fine_fista.epsilon);

  integer("histogram.bins", c.histogram.bins);
  integer("histogram.ncmi_bins", c.histogram.ncmi_bins);

  f["fine.objective"] = {[&c](std::string_view s) { c.objective = parse_objective(s); },
                         [&c] { return to_string(c.objective); }};
  integer("fine.patch_width", c.patch.width);
  integer("fine.patch_height", c.patch.height);
  integer("fine.margin", c.patch.margin);
  integer("fine.neighborhood", c.neighborhood);
  integer("fine.threads", c.threads);
  real("fine.position_step", c.position_step);
  real("fine.angle_step_deg", c.angle_step_deg);
  real("nelder_mead.tolerance", c.nelder_mead.tolerance);
  integer("nelder_mead.max_evaluations", c.nelder_mead.max_evaluations);

  real("perturb.translation", c.perturb_translation);
  real("perturb.angle_deg", c.perturb_angle_deg);
  return f;
}

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.detail());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidConfig, what);
  };
  require(gsd > 0, "gsd must be positive");
  require(extraction.valid(), "extraction.* values must be positive");
  require(segmentation.valid(), "segmentation.* bandwidths must be positive");
  require(refine.valid(), "refine.* requires 0 < min_area < max_area");
  require(matching.valid(), "matching.* values must be positive");
  require(dominance >= 1, "matching.dominance must be at least 1");
  require(ransac_threshold > 0 && ransac_iterations > 0, "RANSAC settings must be positive");
  require(pose_iterations >= 0, "pose.max_iterations must be non-negative");
  require(fista.valid(), "fista.* requires lambda >= 0, 0 < gamma <= 1/16, k_max >= 1");
  require(fine_fista.valid(), "fine.fista_* requires lambda >= 0, 0 < gamma <= 1/16, k_max >= 1");
  require(histogram.valid(), "histogram bins must be at least 2");
  require(patch.valid(), "patch size must be positive");
  require(nelder_mead.valid(), "nelder_mead.* is invalid");
  require(position_step > 0 && angle_step_deg > 0, "simplex steps must be positive");
  const int side = static_cast<int>(std::lround(std::sqrt(std::max(neighborhood, 0))));
  require(neighborhood >= 1 && side * side == neighborhood && side % 2 == 1,
          "fine.neighborhood must be an odd square (1, 9, 25, ...)");
  require(threads >= 1, "fine.threads must be at least 1");
  require(perturb_translation >= 0 && perturb_angle_deg >= 0, "perturbation magnitudes must be non-negative");
  synth.validate();
}

FineConfig PipelineConfig::fine_config() const {
  FineConfig f;
  f.objective = objective;
  f.histogram = histogram;
  f.fista = fine_fista;
  f.nelder_mead = nelder_mead;
  f.position_step = position_step;
  f.angle_step = angle_step_deg * kDeg;
  f.threads = threads;
  return f;
}

PipelineConfig parse_pipeline_config(std::string_view text) {
  PipelineConfig cfg;
  auto fields = config_fields(cfg);
  std::string synth_keys;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key.rfind("synth.", 0) == 0) {
      synth_keys += key + " = " + value + "\n";
      continue;
    }
    const auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorKind::InvalidConfig, "unknown configuration key '" + key + "'");
    it->second.set(value);
  }
  try {
    cfg.synth = parse_scene_spec(synth_keys);
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidConfig, e.detail());
  }
  cfg.validate();
  return cfg;
}

std::string format_pipeline_config(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  std::string out;
  for (const auto& [key, field] : config_fields(copy)) out += key + " = " + field.get() + "\n";
  return out + format_scene_spec(cfg.synth);
}

LidarStage run_lidar_extraction(const PointCloud& cloud, const PipelineConfig& cfg) {
  return in_stage("extract-lidar", [&] { return LidarStage{extract_building_regions(cloud, cfg.extraction)}; });
}

ImageStage run_image_extraction(const OpticalImage& image, const PipelineConfig& cfg) {
  return in_stage("extract-image", [&] {
    ImageStage stage;
    stage.labels = mean_shift_segment(rgb_to_lab(image.pixels), cfg.segmentation);
    stage.segments = refine_segments(stage.labels, image.gsd, cfg.refine);
    return stage;
  });
}

MatchStage run_matching(const LidarStage& lidar, const ImageStage& image, const CameraPose& pose_hint,
                        const PipelineConfig& cfg) {
  return in_stage("match", [&] {
    MatchStage m;
    m.lidar = lidar_candidates(lidar.regions, pose_hint);
    m.image = image_candidates(image.segments);
    if (m.lidar.empty() || m.image.empty()) {
      throw Error(ErrorKind::TooFewCorrespondences, "no building candidates to match");
    }
    try {
      m.translation = largest_segment_translation(m.lidar, m.image, cfg.dominance);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AmbiguousLargest) throw;
      m.translation = Point2::Zero();
      m.guided = false;
    }
    m.initial = initial_match(m.lidar, m.image, m.translation);
    if (cfg.filter == MatchFilter::Gtm) {
      m.filtered = gtm_filter(m.initial, cfg.matching.gtm_k, m.translation);
    } else {
      m.filtered = ransac_filter(m.initial, cfg.ransac_threshold, cfg.ransac_iterations, cfg.seed);
    }
    m.validated = validate_area_direction(m.filtered, m.lidar, m.image, cfg.matching);
    return m;
  });
}

std::vector<Corr3D2D> correspondence_points(const MatchStage& match, const LidarStage& lidar) {
  std::unordered_map<int, const BuildingRegion*> regions;
  for (const auto& r : lidar.regions) regions[r.id] = &r;
  std::vector<Corr3D2D> out;
  for (const auto& c : match.validated) {
    const auto it = regions.find(c.lidar_id);
    if (it == regions.end()) continue;
    const BuildingRegion& r = *it->second;
    out.push_back({Eigen::Vector3d(r.centroid.x(), r.centroid.y(), r.mean_elevation), c.image_px});
  }
  return out;
}

CoarseResult run_coarse(const PointCloud& cloud, const OpticalImage& image, const CameraPose& pose_hint,
                        const PipelineConfig& cfg) {
  CoarseResult out;
  out.lidar = run_lidar_extraction(cloud, cfg);
  out.image = run_image_extraction(image, cfg);
  out.match = run_matching(out.lidar, out.image, pose_hint, cfg);
  out.correspondences = correspondence_points(out.match, out.lidar);
  out.estimate = in_stage("pose", [&] { return gold_standard(out.correspondences, cfg.pose_iterations); });
  return out;
}

FineResult run_fine(const PointCloud& cloud, const OpticalImage& image, const CameraPose& theta_global,
                    const PipelineConfig& cfg, bool render) {
  return in_stage("fine", [&] {
    FineResult out;
    const Raster gray = luma(image.pixels);
    out.field.neighborhood = cfg.neighborhood;
    out.field.grid = partition_patches(gray.frame(), cloud, theta_global, cfg.patch);
    optimize_patches(out.field.grid, cloud, gray, cfg.fine_config());
    if (render) {
      const Window full{0, 0, gray.rows(), gray.cols()};
      out.intensity = render_registered(cloud, out.field, full, Channel::Intensity, cfg.fista);
      out.elevation = render_registered(cloud, out.field, full, Channel::Elevation, cfg.fista);
    }
    return out;
  });
}

Projector field_projector(const PoseField& field) {
  return [&field, hint = build_camera_matrix(field.grid.pose_hint)](const Eigen::Vector3d& x) {
    return project_point(build_camera_matrix(idw_pose(project_point(hint, x), field)), x);
  };
}

double DetectionCounts::precision() const {
  const int d = true_positive + false_alarm;
  return d > 0 ? static_cast<double>(true_positive) / d : 0.0;
}

double DetectionCounts::recall() const {
  const int d = true_positive + missed;
  return d > 0 ? static_cast<double>(true_positive) / d : 0.0;
}

ExtractionReport score_coarse(const CoarseResult& coarse, const GroundTruth& truth, const PointCloud& cloud) {
  if (truth.source.size() != cloud.size()) {
    throw Error(ErrorKind::FrameMismatch, "truth source labels do not match the cloud");
  }
  ExtractionReport report;
  std::set<int> building_ids;
  for (const auto& b : truth.buildings) building_ids.insert(b.id);

  // A region belongs to the building that supplies most of its points.
  std::map<int, int> region_building;
  std::set<int> lidar_found;
  for (const auto& r : coarse.lidar.regions) {
    std::map<int, std::size_t> votes;
    for (const auto i : r.members) ++votes[truth.source[i]];
    int best = kSourceGround;
    std::size_t best_votes = 0;
    for (const auto& [src, n] : votes) {
      if (n > best_votes) {
        best = src;
        best_votes = n;
      }
    }
    const bool hit = building_ids.count(best) && 2 * best_votes > r.members.size() && !lidar_found.count(best);
    region_building[r.id] = hit ? best : -1;
    if (hit) {
      lidar_found.insert(best);
      ++report.lidar.true_positive;
    } else {
      ++report.lidar.false_alarm;
    }
  }
  report.lidar.missed = static_cast<int>(building_ids.size() - lidar_found.size());

  // A segment belongs to the building whose projected roof holds its centroid.
  const ProjectionMatrix P = build_camera_matrix(truth.pose);
  std::vector<std::pair<int, Polygon>> roofs;
  for (const auto& b : truth.buildings) {
    Polygon poly;
    for (const auto& p : b.footprint()) poly.push_back(project_point(P, Eigen::Vector3d(p.x(), p.y(), b.eave_height)));
    roofs.emplace_back(b.id, convex_hull(poly));
  }
  std::map<int, int> segment_building;
  std::set<int> image_found;
  for (const auto& s : coarse.image.segments) {
    int owner = -1;
    for (const auto& [id, poly] : roofs) {
      if (convex_contains(poly, s.centroid, 1e-9)) owner = id;
    }
    const bool hit = owner >= 0 && !image_found.count(owner);
    segment_building[s.id] = hit ? owner : -1;
    if (hit) {
      image_found.insert(owner);
      ++report.image.true_positive;
    } else {
      ++report.image.false_alarm;
    }
  }
  report.image.missed = static_cast<int>(building_ids.size() - image_found.size());

  std::set<int> matched;
  for (const auto& c : coarse.match.validated) {
    const int a = region_building.count(c.lidar_id) ? region_building[c.lidar_id] : -1;
    const int b = segment_building.count(c.image_id) ? segment_building[c.image_id] : -1;
    if (a >= 0 && a == b) {
      matched.insert(a);
      ++report.matching.true_positive;
    } else {
      ++report.matching.false_alarm;
    }
  }
  int matchable = 0;
  for (const int id : lidar_found) matchable += image_found.count(id) ? 1 : 0;
  report.matching.missed = matchable - static_cast<int>(matched.size());
  return report;
}

std::string format_extraction_report(const ExtractionReport& report) {
  std::ostringstream out;
  out << "stage,tp,fa,m,precision,recall\n";
  const auto row = [&](const char* name, const DetectionCounts& c) {
    out << name << ',' << c.true_positive << ',' << c.false_alarm << ',' << c.missed << ','
        << format_double(c.precision()) << ',' << format_double(c.recall()) << '\n';
  };
  row("lidar", report.lidar);
  row("image", report.image);
  row("matching", report.matching);
  return out.str();
}

RgbImage checkerboard_overlay(const RgbImage& image, const Raster& gray, int tile) {
  if (image.frame() != gray.frame()) throw Error(ErrorKind::FrameMismatch, "overlay inputs differ in size");
  if (tile < 1) throw Error(ErrorKind::InvalidConfig, "tile size must be positive");
  double lo = 0.0, hi = 1.0;
  if (!gray.empty()) {
    const auto [mn, mx] = std::minmax_element(gray.values().begin(), gray.values().end());
    lo = *mn;
    hi = *mx > *mn ? *mx : *mn + 1.0;
  }
  RgbImage out = image;
  for (int r = 0; r < image.rows(); ++r) {
    for (int c = 0; c < image.cols(); ++c) {
      if (((r / tile) + (c / tile)) % 2 == 0) continue;
      const auto v = static_cast<std::uint8_t>(std::lround(255.0 * (gray(r, c) - lo) / (hi - lo)));
      out(r, c) = {v, v, v};
    }
  }
  return out;
}

}  // namespace lidreg
