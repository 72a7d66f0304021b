#include <lidreg/superres.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/LU>

#include <lidreg/error.hpp>

namespace lidreg {

std::size_t SparseRaster::transferred() const {
  return static_cast<std::size_t>(std::count(mask.values().begin(), mask.values().end(), std::uint8_t{1}));
}

bool FistaConfig::valid() const {
  return lambda >= 0 && gamma > 0 && gamma <= 1.0 / kSsdgLipschitz + 1e-15 && k_max >= 1 && epsilon >= 0;
}

namespace {

class DepthBuffer {
public:
  DepthBuffer(const Window& window, Channel channel)
      : window_(window), channel_(channel), depth_(window.frame(), std::numeric_limits<double>::infinity()) {
    out_.values = Raster(window.frame(), 0.0);
    out_.mask = BinaryGrid(window.frame(), 0);
  }

  void splat(const ProjectionMatrix& P, double sign, double inv_norm, const LidarPoint& p) {
    const double X = p.x, Y = p.y, Z = p.z;
    const double w = P(2, 0) * X + P(2, 1) * Y + P(2, 2) * Z + P(2, 3);
    const double depth = sign * w * inv_norm;
    if (!(depth > 0)) return;
    const double u = (P(0, 0) * X + P(0, 1) * Y + P(0, 2) * Z + P(0, 3)) / w;
    const double v = (P(1, 0) * X + P(1, 1) * Y + P(1, 2) * Z + P(1, 3)) / w;
    if (!std::isfinite(u) || !std::isfinite(v)) return;
    const double cf = std::floor(u + 0.5) - window_.col0;
    const double rf = std::floor(v + 0.5) - window_.row0;
    if (cf < 0 || rf < 0 || cf >= window_.cols || rf >= window_.rows) return;
    const int c = static_cast<int>(cf), r = static_cast<int>(rf);
    if (depth < depth_(r, c)) {
      depth_(r, c) = depth;
      out_.values(r, c) = channel_ == Channel::Elevation ? p.z : p.intensity / 255.0;
      out_.mask(r, c) = 1;
    }
  }

  SparseRaster finish() {
    if (out_.transferred() == 0) {
      throw Error(ErrorKind::NoVisiblePoints, "no LiDAR point projects inside the frame");
    }
    return std::move(out_);
  }

private:
  Window window_;
  Channel channel_;
  Raster depth_;
  SparseRaster out_;
};

struct PoseTerms {
  ProjectionMatrix P;
  double sign;
  double inv_norm;
};

PoseTerms pose_terms(const ProjectionMatrix& P) {
  return {P, P.leftCols<3>().determinant() < 0 ? -1.0 : 1.0, 1.0 / P.row(2).head<3>().norm()};
}

}  // namespace

SparseRaster transfer_values(const PointCloud& cloud, const CameraPose& pose, const Window& window, Channel channel) {
  std::vector<std::size_t> all(cloud.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return transfer_values(cloud, all, pose, window, channel);
}

SparseRaster transfer_values(const PointCloud& cloud, std::span<const std::size_t> subset, const CameraPose& pose,
                             const Window& window, Channel channel) {
  const PoseTerms t = pose_terms(build_camera_matrix(pose));
  DepthBuffer buffer(window, channel);
  for (const auto i : subset) buffer.splat(t.P, t.sign, t.inv_norm, cloud.points[i]);
  return buffer.finish();
}

SparseRaster transfer_values(const PointCloud& cloud, std::span<const ProjectionMatrix> projections,
                             const Window& window, Channel channel) {
  if (projections.size() != cloud.size()) {
    throw Error(ErrorKind::FrameMismatch, "one projection matrix per point is required");
  }
  DepthBuffer buffer(window, channel);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const PoseTerms t = pose_terms(projections[i]);
    buffer.splat(t.P, t.sign, t.inv_norm, cloud.points[i]);
  }
  return buffer.finish();
}

std::pair<double, Raster> ssdg_value_and_gradient(const Raster& phi) {
  const int rows = phi.rows(), cols = phi.cols();
  Raster grad(phi.frame(), 0.0);
  double cost = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = phi(r, c);
      if (c + 1 < cols) {
        const double d = phi(r, c + 1) - v;
        cost += d * d;
        grad(r, c) -= 2.0 * d;
        grad(r, c + 1) += 2.0 * d;
      }
      if (r + 1 < rows) {
        const double d = phi(r + 1, c) - v;
        cost += d * d;
        grad(r, c) -= 2.0 * d;
        grad(r + 1, c) += 2.0 * d;
      }
    }
  }
  return {cost, std::move(grad)};
}

double fista_objective(const Raster& raster, double lambda) {
  double l1 = 0.0;
  for (const double v : raster.values()) l1 += std::abs(v);
  return ssdg_value_and_gradient(raster).first + lambda * l1;
}

FistaResult propagate_fista(const SparseRaster& sparse, const FistaConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorKind::InvalidConfig, "FISTA config requires lambda >= 0, 0 < gamma <= 1/16, k_max >= 1");
  const int rows = sparse.values.rows(), cols = sparse.values.cols();
  const std::size_t n = sparse.values.size();
  const double* spa = sparse.values.data();
  const std::uint8_t* fixed = sparse.mask.data();

  std::vector<double> y(spa, spa + n), y_next(n), x_prev(spa, spa + n);
  const double gamma = cfg.gamma, threshold = cfg.lambda * cfg.gamma;
  double t_prev = 1.0;

  FistaResult result;
  const bool any_free = std::any_of(fixed, fixed + n, [](std::uint8_t m) { return m == 0; });
  if (!any_free) {
    result.dense = sparse.values;
    result.converged = true;
    return result;
  }

  for (int k = 1; k <= cfg.k_max; ++k) {
    const double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    const double beta = (t_prev - 1.0) / t;
    double change = 0.0;
    // Replicate boundary: a missing neighbor is the pixel itself, which
    // contributes zero to the Laplacian. Fixed pixels are computed and then
    // overwritten so the interior loop stays branch-free.
    const auto update = [&](std::size_t i, double v, double left, double right, double up, double down) {
      const double lap = (v - left) + (v - right) + (v - up) + (v - down);
      const double g = v - gamma * 2.0 * lap;
      const double x = std::copysign(std::max(std::abs(g) - threshold, 0.0), g);
      const double yn = fixed[i] ? v : x + beta * (x - x_prev[i]);
      x_prev[i] = x;
      y_next[i] = yn;
      change += (yn - v) * (yn - v);
    };
    for (int r = 0; r < rows; ++r) {
      const std::size_t base = static_cast<std::size_t>(r) * cols;
      const double* row = y.data() + base;
      const double* up = r > 0 ? row - cols : row;
      const double* down = r + 1 < rows ? row + cols : row;
      if (cols == 1) {
        update(base, row[0], row[0], row[0], up[0], down[0]);
        continue;
      }
      update(base, row[0], row[0], row[1], up[0], down[0]);
      for (int c = 1; c + 1 < cols; ++c) update(base + c, row[c], row[c - 1], row[c + 1], up[c], down[c]);
      update(base + cols - 1, row[cols - 1], row[cols - 2], row[cols - 1], up[cols - 1], down[cols - 1]);
    }
    y.swap(y_next);
    t_prev = t;
    const double rms = std::sqrt(change / static_cast<double>(n));
    result.change_history.push_back(rms);
    result.iterations = k;
    if (rms < cfg.epsilon) {
      result.converged = true;
      break;
    }
  }

  result.dense = Raster(sparse.values.frame());
  for (std::size_t i = 0; i < n; ++i) result.dense[i] = fixed[i] ? spa[i] : y[i];
  return result;
}

SuperResolved densify(SparseRaster sparse, Channel channel, const FistaConfig& cfg) {
  FistaResult fista = propagate_fista(sparse, cfg);
  SuperResolved out;
  out.dense = std::move(fista.dense);
  if (channel == Channel::Intensity) {
    for (auto& v : out.dense.values()) v *= 255.0;
  }
  out.sparse = std::move(sparse);
  out.iterations = fista.iterations;
  out.converged = fista.converged;
  return out;
}

SuperResolved super_resolve(const PointCloud& cloud, const CameraPose& pose, const Window& window, Channel channel,
                            const FistaConfig& cfg) {
  return densify(transfer_values(cloud, pose, window, channel), channel, cfg);
}

SuperResolved super_resolve(const PointCloud& cloud, std::span<const std::size_t> subset, const CameraPose& pose,
                            const Window& window, Channel channel, const FistaConfig& cfg) {
  return densify(transfer_values(cloud, subset, pose, window, channel), channel, cfg);
}

}  // namespace lidreg
