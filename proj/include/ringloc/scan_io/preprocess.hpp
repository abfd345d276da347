#ifndef RINGLOC_SCAN_IO_PREPROCESS_HPP
#define RINGLOC_SCAN_IO_PREPROCESS_HPP

#include <cstdint>
#include <optional>

#include "ringloc/scan_io/point_cloud.hpp"

namespace ringloc {

enum class GroundMode { kZThreshold, kRansacPlane, kNone };

struct PreprocessConfig {
  double range_max = 70.0;  ///< planar radius kept, inclusive
  GroundMode ground_mode = GroundMode::kZThreshold;
  /// Points at or below ground + ground_z are dropped in z-threshold mode.
  double ground_z = 0.3;
  /// Ground height in the sensor frame. When unset it is estimated as the
  /// 5th-percentile z of the range-filtered scan.
  std::optional<double> ground_ref;
  int ransac_iters = 200;
  double ransac_dist = 0.2;
  /// RANSAC planes tilted more than this from horizontal are not ground.
  double ransac_max_tilt_deg = 25.0;
  std::uint64_t ransac_seed = 1;

  bool operator==(const PreprocessConfig&) const = default;
};

/// Range filter followed by ground removal. Throws EmptyCloud on empty input
/// and EmptyAfterFilter when nothing survives.
PointCloud preprocess(const PointCloud& cloud, const PreprocessConfig& cfg);

struct PlaneFit {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  ///< unit, normal.z() >= 0
  double offset = 0.0;                                ///< plane: normal . p + offset = 0
  std::size_t inliers = 0;
};

/// Best near-horizontal plane by inlier count; deterministic for a given seed.
std::optional<PlaneFit> fit_ground_plane(const PointCloud& cloud, const PreprocessConfig& cfg);

}  // namespace ringloc

#endif  // RINGLOC_SCAN_IO_PREPROCESS_HPP
