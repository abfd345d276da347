#include "ringloc/scan_io/point_cloud.hpp"

namespace ringloc {

PointCloud transform_cloud(const PointCloud& cloud, const Pose3& pose) {
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.has_intensity = cloud.has_intensity;
  out.points.reserve(cloud.size());
  const Eigen::Matrix3d r = pose.rotation.toRotationMatrix();
  for (const Point3& p : cloud.points) {
    const Eigen::Vector3d q = r * p.xyz() + pose.translation;
    out.points.push_back({q.x(), q.y(), q.z(), p.intensity});
  }
  return out;
}

}  // namespace ringloc
