#include <lidreg/pose_estimate.hpp>

#include <cmath>

#include <Eigen/Dense>

#include <lidreg/error.hpp>

namespace lidreg {
namespace {

using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;

ProjectionMatrix unpack(const Vector12& p) {
  ProjectionMatrix P;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) P(r, c) = p(4 * r + c);
  }
  return P;
}

double sum_squared_error(const ProjectionMatrix& P, const std::vector<Eigen::Vector4d>& X,
                         const std::vector<Eigen::Vector2d>& x) {
  double sse = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const Eigen::Vector3d h = P * X[i];
    sse += (h.head<2>() / h.z() - x[i]).squaredNorm();
  }
  return sse;
}

}  // namespace

double reprojection_rmse(const ProjectionMatrix& P, std::span<const Corr3D2D> correspondences) {
  if (correspondences.empty()) return 0.0;
  double sse = 0.0;
  for (const auto& c : correspondences) sse += (project_point(P, c.world) - c.image).squaredNorm();
  return std::sqrt(sse / static_cast<double>(correspondences.size()));
}

double reprojection_rmse(const CameraPose& pose, std::span<const Corr3D2D> correspondences) {
  return reprojection_rmse(build_camera_matrix(pose), correspondences);
}

GoldStandardResult gold_standard(std::span<const Corr3D2D> correspondences, int max_iterations) {
  const std::size_t n = correspondences.size();
  if (n < 6) {
    throw Error(ErrorKind::TooFewCorrespondences, "pose estimation needs at least 6 correspondences, got " + std::to_string(n));
  }

  // Similarity normalization: centroid at the origin, RMS distance sqrt(3)
  // in the world and sqrt(2) in the image.
  Eigen::Vector3d wmean = Eigen::Vector3d::Zero();
  Eigen::Vector2d imean = Eigen::Vector2d::Zero();
  for (const auto& c : correspondences) {
    wmean += c.world;
    imean += c.image;
  }
  wmean /= static_cast<double>(n);
  imean /= static_cast<double>(n);
  double wrms = 0.0, irms = 0.0;
  for (const auto& c : correspondences) {
    wrms += (c.world - wmean).squaredNorm();
    irms += (c.image - imean).squaredNorm();
  }
  wrms = std::sqrt(wrms / n);
  irms = std::sqrt(irms / n);
  if (wrms == 0.0 || irms == 0.0) throw Error(ErrorKind::DegenerateConfiguration, "all points coincide");
  const double ws = std::sqrt(3.0) / wrms, is = std::sqrt(2.0) / irms;

  Eigen::Matrix4d U = Eigen::Matrix4d::Identity();
  U.topLeftCorner<3, 3>() *= ws;
  U.topRightCorner<3, 1>() = -ws * wmean;
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  T.topLeftCorner<2, 2>() *= is;
  T.topRightCorner<2, 1>() = -is * imean;

  std::vector<Eigen::Vector4d> X(n);
  std::vector<Eigen::Vector2d> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    X[i] = U * correspondences[i].world.homogeneous();
    x[i] = (T * correspondences[i].image.homogeneous()).head<2>();
  }

  // Linear solve for the algebraic-error minimizer.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(n), 12);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(2 * i);
    A.block<1, 4>(r, 4) = -X[i].transpose();
    A.block<1, 4>(r, 8) = x[i].y() * X[i].transpose();
    A.block<1, 4>(r + 1, 0) = X[i].transpose();
    A.block<1, 4>(r + 1, 8) = -x[i].x() * X[i].transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s.size() < 12 || s(10) <= 1e-9 * s(0)) {
    throw Error(ErrorKind::DegenerateConfiguration, "DLT design matrix is rank-deficient (coplanar or collinear points)");
  }
  Vector12 p = svd.matrixV().col(11);

  GoldStandardResult result;
  const auto denormalize = [&](const Vector12& q) -> ProjectionMatrix { return T.inverse() * unpack(q) * U; };
  result.dlt_rmse = reprojection_rmse(denormalize(p), correspondences);

  // Levenberg-Marquardt on the twelve entries; the free overall scale is
  // pinned by renormalizing after each accepted step.
  double cost = sum_squared_error(unpack(p), X, x);
  double mu = 1e-3;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const ProjectionMatrix P = unpack(p);
    Matrix12 H = Matrix12::Zero();
    Vector12 g = Vector12::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d h = P * X[i];
      const double w = h.z();
      const double u = h.x() / w, v = h.y() / w;
      Eigen::Matrix<double, 2, 12> J = Eigen::Matrix<double, 2, 12>::Zero();
      J.block<1, 4>(0, 0) = X[i].transpose() / w;
      J.block<1, 4>(0, 8) = -u * X[i].transpose() / w;
      J.block<1, 4>(1, 4) = X[i].transpose() / w;
      J.block<1, 4>(1, 8) = -v * X[i].transpose() / w;
      const Eigen::Vector2d r(u - x[i].x(), v - x[i].y());
      H += J.transpose() * J;
      g += J.transpose() * r;
    }
    bool accepted = false;
    double new_cost = cost;
    Vector12 candidate = p;
    while (mu < 1e12) {
      Matrix12 damped = H;
      for (int d = 0; d < 12; ++d) damped(d, d) += mu * (H(d, d) + 1e-12);
      const Vector12 delta = damped.ldlt().solve(-g);
      candidate = p + delta;
      candidate.normalize();
      new_cost = sum_squared_error(unpack(candidate), X, x);
      if (std::isfinite(new_cost) && new_cost < cost) {
        accepted = true;
        mu = std::max(mu / 3.0, 1e-12);
        break;
      }
      mu *= 3.0;
    }
    if (!accepted) break;
    const double old_rmse = std::sqrt(cost / n) / is;
    const double new_rmse = std::sqrt(new_cost / n) / is;
    p = candidate;
    cost = new_cost;
    if (old_rmse - new_rmse < 1e-10) {
      ++it;
      break;
    }
  }

  result.projection = denormalize(p);
  result.pose = decompose_projection(result.projection);
  result.rmse = reprojection_rmse(result.projection, correspondences);
  result.iterations = it;
  return result;
}

}  // namespace lidreg
