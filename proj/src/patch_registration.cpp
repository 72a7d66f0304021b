#include <lidreg/patch_registration.hpp>

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

Objective parse_objective(std::string_view text) {
  if (text == "mi" || text == "MI") return Objective::MI;
  if (text == "ncmi" || text == "NCMI") return Objective::NCMI;
  throw Error(ErrorKind::InvalidConfig, "objective must be 'mi' or 'ncmi', got '" + std::string(text) + "'");
}

std::string to_string(Objective objective) { return objective == Objective::MI ? "mi" : "ncmi"; }

std::pair<int, int> PatchGrid::cell_of(const Point2& p) const {
  const int col = static_cast<int>(std::floor(p.x() + 0.5));
  const int row = static_cast<int>(std::floor(p.y() + 0.5));
  const int gc = std::clamp(col / std::max(config.width, 1), 0, grid_cols - 1);
  const int gr = std::clamp(row / std::max(config.height, 1), 0, grid_rows - 1);
  return {gr, gc};
}

PatchGrid partition_patches(const Frame& frame, const PointCloud& cloud, const CameraPose& pose_hint,
                            const PatchConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorKind::InvalidConfig, "patch size must be positive and margin non-negative");
  PatchGrid grid;
  grid.frame = frame;
  grid.config = cfg;
  grid.pose_hint = pose_hint;
  grid.grid_cols = frame.cols / cfg.width;
  grid.grid_rows = frame.rows / cfg.height;
  if (grid.grid_cols < 1 || grid.grid_rows < 1) {
    throw Error(ErrorKind::FrameTooSmall, std::to_string(frame.cols) + "x" + std::to_string(frame.rows) +
                                              " frame is smaller than one " + std::to_string(cfg.width) + "x" +
                                              std::to_string(cfg.height) + " patch");
  }

  for (int gr = 0; gr < grid.grid_rows; ++gr) {
    for (int gc = 0; gc < grid.grid_cols; ++gc) {
      Patch p;
      p.index = gr * grid.grid_cols + gc;
      p.grid_row = gr;
      p.grid_col = gc;
      p.window.row0 = gr * cfg.height;
      p.window.col0 = gc * cfg.width;
      p.window.rows = gr + 1 == grid.grid_rows ? frame.rows - p.window.row0 : cfg.height;
      p.window.cols = gc + 1 == grid.grid_cols ? frame.cols - p.window.col0 : cfg.width;
      p.center = {p.window.col0 + (p.window.cols - 1) / 2.0, p.window.row0 + (p.window.rows - 1) / 2.0};
      p.theta_star = pose_hint;
      grid.patches.push_back(std::move(p));
    }
  }

  const ProjectionMatrix P = build_camera_matrix(pose_hint);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& pt = cloud.points[i];
    const Eigen::Vector3d X(pt.x, pt.y, pt.z);
    if (!(point_depth(P, X) > 0)) continue;
    const Eigen::Vector3d h = P.leftCols<3>() * X + P.col(3);
    const double u = h.x() / h.z(), v = h.y() / h.z();
    if (!std::isfinite(u) || !std::isfinite(v)) continue;
    for (auto& patch : grid.patches) {
      const Window& w = patch.window;
      if (u >= w.col0 - 0.5 - cfg.margin && u < w.col0 + w.cols - 0.5 + cfg.margin && v >= w.row0 - 0.5 - cfg.margin &&
          v < w.row0 + w.rows - 0.5 + cfg.margin) {
        patch.points.push_back(i);
      }
    }
  }
  return grid;
}

double evaluate_objective(const PointCloud& cloud, std::span<const std::size_t> points, const CameraPose& pose,
                          const Window& window, const Raster& luma_window, const FineConfig& cfg) {
  try {
    const SuperResolved i_image = super_resolve(cloud, points, pose, window, Channel::Intensity, cfg.fista);
    if (cfg.objective == Objective::MI) return mutual_information(i_image.dense, luma_window, cfg.histogram);
    const SuperResolved z_image = super_resolve(cloud, points, pose, window, Channel::Elevation, cfg.fista);
    return ncmi(i_image.dense, z_image.dense, luma_window, cfg.histogram);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NoVisiblePoints || e.kind() == ErrorKind::DegenerateEntropy) return 0.0;
    throw;
  }
}

namespace {

CameraPose with_externals(const CameraPose& base, const std::vector<double>& x) {
  CameraPose p = base;
  p.x0 = x[0];
  p.y0 = x[1];
  p.z0 = x[2];
  p.omega = wrap_angle(x[3]);
  p.phi = x[4];
  p.kappa = wrap_angle(x[5]);
  return p;
}

}  // namespace

PatchOutcome optimize_patch(const PointCloud& cloud, const Patch& patch, const CameraPose& theta_init,
                            const Raster& luma, const FineConfig& cfg) {
  if (!cfg.nelder_mead.valid()) throw Error(ErrorKind::InvalidConfig, "invalid Nelder-Mead settings");
  const Raster target = luma.crop(patch.window);
  PatchOutcome out;
  out.theta_star = theta_init;
  if (patch.points.empty()) {
    out.initial_value = out.value = evaluate_objective(cloud, patch.points, theta_init, patch.window, target, cfg);
    out.flagged = true;
    return out;
  }

  const auto cost = [&](const std::vector<double>& x) {
    return -evaluate_objective(cloud, patch.points, with_externals(theta_init, x), patch.window, target, cfg);
  };
  const std::vector<double> x0 = {theta_init.x0, theta_init.y0, theta_init.z0,
                                  theta_init.omega, theta_init.phi, theta_init.kappa};
  const double ps = cfg.position_step, as = cfg.angle_step;
  const NelderMeadResult nm = nelder_mead(cost, x0, {ps, ps, ps, as, as, as}, cfg.nelder_mead);
  out.initial_value = -nm.initial_value;
  out.value = -nm.value;
  out.evaluations = nm.evaluations;
  out.theta_star = nm.value < nm.initial_value ? with_externals(theta_init, nm.x) : theta_init;
  if (nm.value >= nm.initial_value) out.value = out.initial_value;
  return out;
}

void optimize_patches(PatchGrid& grid, const PointCloud& cloud, const Raster& luma, const FineConfig& cfg) {
  if (luma.frame() != grid.frame) throw Error(ErrorKind::FrameMismatch, "image frame differs from the patch grid");
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < grid.patches.size(); i = next++) {
      Patch& patch = grid.patches[i];
      try {
        const PatchOutcome o = optimize_patch(cloud, patch, grid.pose_hint, luma, cfg);
        patch.theta_star = o.theta_star;
        patch.initial_value = o.initial_value;
        patch.value = o.value;
        patch.evaluations = o.evaluations;
        patch.flagged = o.flagged;
      } catch (const std::exception& e) {
        patch.theta_star = grid.pose_hint;
        patch.flagged = true;
        patch.failure = e.what();
      }
    }
  };
  const int threads = std::clamp(cfg.threads, 1, static_cast<int>(grid.patches.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
}

CameraPose idw_pose(const Point2& p, const PoseField& field) {
  const PatchGrid& g = field.grid;
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(field.neighborhood))));
  if (field.neighborhood < 1 || side * side != field.neighborhood || side % 2 == 0) {
    throw Error(ErrorKind::InvalidConfig, "IDW neighborhood must be an odd square (1, 9, 25, ...)");
  }
  const int radius = side / 2;
  const auto [gr, gc] = g.cell_of(p);

  std::vector<const Patch*> members;
  std::vector<double> weights;
  for (int r = std::max(0, gr - radius); r <= std::min(g.grid_rows - 1, gr + radius); ++r) {
    for (int c = std::max(0, gc - radius); c <= std::min(g.grid_cols - 1, gc + radius); ++c) {
      const Patch& patch = g.at(r, c);
      const double d2 = (p - patch.center).squaredNorm();
      if (d2 == 0.0) return patch.theta_star;
      members.push_back(&patch);
      weights.push_back(1.0 / d2);
    }
  }

  double total = 0.0;
  for (const double w : weights) total += w;
  const auto ref = members.front()->theta_star.to_array();
  std::array<double, CameraPose::kParameterCount> blend{};
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto v = members[m]->theta_star.to_array();
    for (std::size_t k = 0; k < v.size(); ++k) {
      double value = v[k];
      if (k >= 8) value = ref[k] + wrap_angle(v[k] - ref[k]);  // angles, unwrapped around the first member
      blend[k] += weights[m] / total * value;
    }
  }
  for (std::size_t k = 8; k < blend.size(); ++k) blend[k] = wrap_angle(blend[k]);
  return CameraPose::from_array(blend);
}

SuperResolved render_registered(const PointCloud& cloud, const PoseField& field, const Window& window,
                                Channel channel, const FistaConfig& cfg) {
  const ProjectionMatrix hint = build_camera_matrix(field.grid.pose_hint);
  std::vector<ProjectionMatrix> projections(cloud.size(), hint);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& pt = cloud.points[i];
    const Eigen::Vector3d X(pt.x, pt.y, pt.z);
    if (!(point_depth(hint, X) > 0)) continue;
    const Eigen::Vector3d h = hint.leftCols<3>() * X + hint.col(3);
    const Point2 at = h.head<2>() / h.z();
    if (!at.allFinite()) continue;
    projections[i] = build_camera_matrix(idw_pose(at, field));
  }
  return densify(transfer_values(cloud, projections, window, channel), channel, cfg);
}

std::string format_patch_report(const PatchGrid& grid, const std::vector<Point2>& correspondence_pixels) {
  std::ostringstream out;
  out << "patch,correspondences,initial,final,gain_percent,flagged\n";
  for (const auto& p : grid.patches) {
    int count = 0;
    for (const auto& px : correspondence_pixels) {
      if (p.window.contains(static_cast<int>(std::floor(px.y() + 0.5)), static_cast<int>(std::floor(px.x() + 0.5)))) {
        ++count;
      }
    }
    const double gain = p.initial_value > 0 ? (p.value / p.initial_value - 1.0) * 100.0 : 0.0;
    out << p.index + 1 << ',' << count << ',' << format_double(p.initial_value) << ',' << format_double(p.value) << ','
        << format_double(gain) << ',' << (p.flagged ? 1 : 0) << '\n';
  }
  return out.str();
}

namespace {

void put(std::ostringstream& out, const std::string& key, const std::string& value) {
  out << key << " = " << value << '\n';
}

void put_pose(std::ostringstream& out, const std::string& prefix, const CameraPose& pose) {
  const auto v = pose.to_array();
  for (std::size_t k = 0; k < v.size(); ++k) put(out, prefix + std::string(CameraPose::kNames[k]), format_double(v[k]));
}

}  // namespace

std::string format_pose_field(const PoseField& field) {
  const PatchGrid& g = field.grid;
  std::ostringstream out;
  put(out, "frame_rows", std::to_string(g.frame.rows));
  put(out, "frame_cols", std::to_string(g.frame.cols));
  put(out, "patch_width", std::to_string(g.config.width));
  put(out, "patch_height", std::to_string(g.config.height));
  put(out, "margin", std::to_string(g.config.margin));
  put(out, "neighborhood", std::to_string(field.neighborhood));
  put_pose(out, "hint.", g.pose_hint);
  for (const auto& p : g.patches) {
    const std::string prefix = "patch." + std::to_string(p.index) + ".";
    put(out, prefix + "initial", format_double(p.initial_value));
    put(out, prefix + "final", format_double(p.value));
    put(out, prefix + "evaluations", std::to_string(p.evaluations));
    put(out, prefix + "flagged", p.flagged ? "1" : "0");
    put_pose(out, prefix, p.theta_star);
  }
  return out.str();
}

PoseField parse_pose_field(std::string_view text) {
  const auto kv = parse_key_values(text);
  const auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::InvalidConfig, "pose field is missing '" + key + "'");
    return it->second;
  };
  const auto get_pose = [&](const std::string& prefix) {
    std::array<double, CameraPose::kParameterCount> v{};
    for (std::size_t k = 0; k < v.size(); ++k) {
      const std::string key = prefix + std::string(CameraPose::kNames[k]);
      v[k] = parse_double(get(key), key);
    }
    return CameraPose::from_array(v);
  };

  const Frame frame{static_cast<int>(parse_integer(get("frame_rows"), "frame_rows")),
                    static_cast<int>(parse_integer(get("frame_cols"), "frame_cols"))};
  PatchConfig cfg;
  cfg.width = static_cast<int>(parse_integer(get("patch_width"), "patch_width"));
  cfg.height = static_cast<int>(parse_integer(get("patch_height"), "patch_height"));
  cfg.margin = static_cast<int>(parse_integer(get("margin"), "margin"));

  PoseField field;
  field.neighborhood = static_cast<int>(parse_integer(get("neighborhood"), "neighborhood"));
  field.grid = partition_patches(frame, PointCloud{}, get_pose("hint."), cfg);
  for (auto& p : field.grid.patches) {
    const std::string prefix = "patch." + std::to_string(p.index) + ".";
    p.initial_value = parse_double(get(prefix + "initial"), prefix + "initial");
    p.value = parse_double(get(prefix + "final"), prefix + "final");
    p.evaluations = static_cast<int>(parse_integer(get(prefix + "evaluations"), prefix + "evaluations"));
    p.flagged = get(prefix + "flagged") == "1";
    p.theta_star = get_pose(prefix);
  }
  return field;
}

}  // namespace lidreg
