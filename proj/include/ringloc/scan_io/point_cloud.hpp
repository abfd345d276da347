#ifndef RINGLOC_SCAN_IO_POINT_CLOUD_HPP
#define RINGLOC_SCAN_IO_POINT_CLOUD_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ringloc/scan_io/pose.hpp"

namespace ringloc {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  float intensity = 0.0F;

  Eigen::Vector3d xyz() const { return {x, y, z}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// Ordered point sequence. Intensity is carried through I/O but not consumed
/// by any feature.
struct PointCloud {
  std::vector<Point3> points;
  std::string frame_id;
  bool has_intensity = false;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

struct ScanRecord {
  std::int64_t id = 0;
  PointCloud cloud;
  Pose3 pose;
  std::optional<double> timestamp;
};

/// Maps every point by pose.rotation then pose.translation.
PointCloud transform_cloud(const PointCloud& cloud, const Pose3& pose);

}  // namespace ringloc

#endif  // RINGLOC_SCAN_IO_POINT_CLOUD_HPP
