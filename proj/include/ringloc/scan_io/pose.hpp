#ifndef RINGLOC_SCAN_IO_POSE_HPP
#define RINGLOC_SCAN_IO_POSE_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ringloc {

/// Wraps an angle into [0, 2*pi).
double wrap_two_pi(double angle);
/// Wraps an angle into [-pi, pi).
double wrap_pi(double angle);

/// Planar pose; yaw is kept in [0, 2*pi).
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  static Pose2 make(double x, double y, double yaw) { return {x, y, wrap_two_pi(yaw)}; }
};

/// Rigid SE(3) transform p' = R p + t with a unit quaternion rotation.
/// Composition follows function application: (a * b).apply(p) == a.apply(b.apply(p)).
struct Pose3 {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

  static Pose3 identity() { return {}; }
  static Pose3 from_xyz_yaw(double x, double y, double z, double yaw);
  static Pose3 from_planar(const Pose2& p) { return from_xyz_yaw(p.x, p.y, 0.0, p.yaw); }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Pose3 inverse() const;
  Pose3 operator*(const Pose3& rhs) const;

  /// Heading of the rotated x axis projected on the ground plane, in [0, 2*pi).
  double yaw() const;
  Pose2 planar() const { return Pose2::make(translation.x(), translation.y(), yaw()); }
  Eigen::Matrix4d matrix() const;
};

/// Angle of the relative rotation between two orientations, in [0, pi].
double rotation_angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

}  // namespace ringloc

#endif  // RINGLOC_SCAN_IO_POSE_HPP
