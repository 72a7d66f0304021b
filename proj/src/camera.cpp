#include <lidreg/camera.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include <lidreg/error.hpp>
#include <lidreg/text_format.hpp>

namespace lidreg {

std::array<double, CameraPose::kParameterCount> CameraPose::to_array() const {
  return {alpha_x, alpha_y, skew, px, py, x0, y0, z0, omega, phi, kappa};
}

CameraPose CameraPose::from_array(const std::array<double, kParameterCount>& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10]};
}

bool CameraPose::valid() const {
  const auto values = to_array();
  const bool finite = std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
  return finite && alpha_x > 0.0 && alpha_y > 0.0;
}

Eigen::Matrix3d rotation_from_angles(double omega, double phi, double kappa) {
  const double co = std::cos(omega), so = std::sin(omega);
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double ck = std::cos(kappa), sk = std::sin(kappa);
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0, 0, co, -so, 0, so, co;
  ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  rz << ck, -sk, 0, sk, ck, 0, 0, 0, 1;
  return rz * ry * rx;
}

Eigen::Matrix3d calibration_matrix(const CameraPose& pose) {
  Eigen::Matrix3d k;
  k << pose.alpha_x, pose.skew, pose.px, 0, pose.alpha_y, pose.py, 0, 0, 1;
  return k;
}

ProjectionMatrix build_camera_matrix(const CameraPose& pose) {
  const Eigen::Matrix3d kr = calibration_matrix(pose) * rotation_from_angles(pose.omega, pose.phi, pose.kappa);
  ProjectionMatrix p;
  p.leftCols<3>() = kr;
  p.col(3) = -kr * pose.center();
  return p;
}

Eigen::Vector2d project_point(const ProjectionMatrix& P, const Eigen::Vector3d& point) {
  const Eigen::Vector3d h = P.leftCols<3>() * point + P.col(3);
  if (std::abs(h.z()) < 1e-12) {
    throw Error(ErrorKind::DegenerateProjection, "point lies on the principal plane");
  }
  return h.head<2>() / h.z();
}

double point_depth(const ProjectionMatrix& P, const Eigen::Vector3d& point) {
  const double w = P.row(2).head<3>().dot(point) + P(2, 3);
  const double sign = P.leftCols<3>().determinant() < 0.0 ? -1.0 : 1.0;
  return sign * w / P.row(2).head<3>().norm();
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

CameraPose decompose_projection(const ProjectionMatrix& input) {
  ProjectionMatrix P = input;
  Eigen::Matrix3d m = P.leftCols<3>();
  const double det = m.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-12 * std::pow(m.norm(), 3)) {
    throw Error(ErrorKind::SingularCamera, "left 3x3 block of the projection matrix is singular");
  }
  if (det < 0.0) {
    P = -P;
    m = -m;
  }

  // RQ factorization through QR of the row-reversed transpose.
  Eigen::Matrix3d flip;
  flip << 0, 0, 1, 0, 1, 0, 1, 0, 0;
  Eigen::HouseholderQR<Eigen::Matrix3d> qr((flip * m).transpose());
  const Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
  Eigen::Matrix3d k = flip * r.transpose() * flip;
  Eigen::Matrix3d rot = flip * q.transpose();

  const Eigen::Vector3d signs(k(0, 0) < 0 ? -1.0 : 1.0, k(1, 1) < 0 ? -1.0 : 1.0, k(2, 2) < 0 ? -1.0 : 1.0);
  k = k * signs.asDiagonal();
  rot = signs.asDiagonal() * rot;
  k /= k(2, 2);

  const Eigen::Vector3d c = -m.inverse() * P.col(3);

  CameraPose pose;
  pose.alpha_x = k(0, 0);
  pose.alpha_y = k(1, 1);
  pose.skew = k(0, 1);
  pose.px = k(0, 2);
  pose.py = k(1, 2);
  pose.x0 = c.x();
  pose.y0 = c.y();
  pose.z0 = c.z();
  pose.phi = std::asin(std::clamp(-rot(2, 0), -1.0, 1.0));
  pose.omega = wrap_angle(std::atan2(rot(2, 1), rot(2, 2)));
  pose.kappa = wrap_angle(std::atan2(rot(1, 0), rot(0, 0)));
  return pose;
}

CameraPose shift_principal_point(const CameraPose& pose, double dcol, double drow) {
  CameraPose shifted = pose;
  shifted.px -= dcol;
  shifted.py -= drow;
  return shifted;
}

std::string format_pose(const CameraPose& pose) {
  std::ostringstream out;
  const auto values = pose.to_array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << CameraPose::kNames[i] << " = " << format_double(values[i]) << '\n';
  }
  return out.str();
}

CameraPose parse_pose(std::string_view text) {
  const auto record = parse_key_values(text);
  std::array<double, CameraPose::kParameterCount> values{};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto it = record.find(std::string(CameraPose::kNames[i]));
    if (it == record.end()) {
      throw Error(ErrorKind::InvalidConfig, "pose record is missing '" + std::string(CameraPose::kNames[i]) + "'");
    }
    values[i] = parse_double(it->second, CameraPose::kNames[i]);
  }
  const CameraPose pose = CameraPose::from_array(values);
  if (!pose.valid()) {
    throw Error(ErrorKind::InvalidConfig, "pose record violates alpha_x, alpha_y > 0 or has non-finite values");
  }
  return pose;
}

void write_pose(const std::filesystem::path& path, const CameraPose& pose) {
  write_text_file(path, format_pose(pose));
}

CameraPose read_pose(const std::filesystem::path& path) {
  return parse_pose(read_text_file(path));
}

}  // namespace lidreg
