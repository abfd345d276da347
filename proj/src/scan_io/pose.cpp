#include "ringloc/scan_io/pose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ringloc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_two_pi(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2*pi.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

double wrap_pi(double angle) {
  double a = wrap_two_pi(angle + std::numbers::pi) - std::numbers::pi;
  return a;
}

Pose3 Pose3::from_xyz_yaw(double x, double y, double z, double yaw) {
  Pose3 p;
  p.translation = Eigen::Vector3d(x, y, z);
  p.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
  return p;
}

Pose3 Pose3::inverse() const {
  Pose3 inv;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose3 Pose3::operator*(const Pose3& rhs) const {
  Pose3 out;
  out.rotation = (rotation * rhs.rotation).normalized();
  out.translation = rotation * rhs.translation + translation;
  return out;
}

double Pose3::yaw() const {
  const Eigen::Vector3d x_axis = rotation * Eigen::Vector3d::UnitX();
  return wrap_two_pi(std::atan2(x_axis.y(), x_axis.x()));
}

Eigen::Matrix4d Pose3::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.toRotationMatrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

double rotation_angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  // atan2 form stays accurate for tiny angles, where acos(w) does not.
  const Eigen::Quaterniond d = a.normalized().conjugate() * b.normalized();
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

}  // namespace ringloc
