#ifndef RINGLOC_SYNTHETIC_SYNTHETIC_HPP
#define RINGLOC_SYNTHETIC_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"

#include "ringloc/common/grid3.hpp"
#include "ringloc/features/features.hpp"
#include "ringloc/scan_io/point_cloud.hpp"
#include "ringloc/transforms/transforms.hpp"

namespace ringloc {

/// Random world of walls, boxes and posts in the square [-extent, extent]^2,
/// standing on z = 0.
struct SceneSpec {
  std::uint64_t seed = 1;
  double extent = 110.0;
  int n_walls = 240;
  int n_boxes = 360;
  int n_posts = 720;
  double points_per_m2 = 1.0;
  bool ground = false;
  /// Adds one tall L-shaped structure so no scene is rotationally symmetric.
  bool landmark = true;
  /// Objects are kept out of the annulus |r - corridor_radius| < corridor_halfwidth
  /// so a circular route stays drivable. Disabled when the half-width is 0.
  double corridor_radius = 0.0;
  double corridor_halfwidth = 0.0;
};

struct SensorSpec {
  double range_max = 70.0;
  double dropout = 0.0;
  double noise_sigma = 0.02;
  double height = 1.8;  ///< sensor z above ground in benchmark poses
};

/// Deterministic in spec.seed. Every object surface gets round(area * density)
/// uniformly placed points.
PointCloud generate_scene(const SceneSpec& spec);

/// World points within range_max (planar) of the pose, expressed in the sensor
/// frame, with Gaussian noise and dropout. Throws EmptyScan.
PointCloud render_scan(const PointCloud& world, const Pose3& pose, const SensorSpec& sensor,
                       std::uint64_t seed);

struct BenchmarkParams {
  double loop_length = 200.0;
  double place_density = 20.0;
  double query_spacing = 5.0;
  double lateral_offset = 3.0;  ///< queries are offset uniformly in [-x, x] across the route
  std::uint64_t seed = 7;
};

struct BenchmarkSet {
  SceneSpec scene;
  SensorSpec sensor;
  BenchmarkParams params;
  std::vector<ScanRecord> map_scans;    ///< pose = world pose of the scan
  std::vector<ScanRecord> query_scans;  ///< pose = world pose of the scan
  /// map_rel_poses[i] = T_i^-1 * T_{i+1}, cyclically; their product is identity.
  std::vector<Pose3> map_rel_poses;
  /// Per query: the nearest map scan and T_map^-1 * T_query.
  std::vector<std::size_t> nearest_map;
  std::vector<Pose3> gt_rel_poses;
};

/// Map scans every place_density along a circular loop (heading along the
/// loop), queries every query_spacing starting half a spacing in, with random
/// yaw and lateral offset. The scene corridor is set to the loop.
BenchmarkSet make_benchmark(SceneSpec scene, const BenchmarkParams& params, const SensorSpec& sensor);

/// Layout: map/<id>.bin, query/<id>.bin, map_poses.csv, query_poses.csv,
/// manifest.json (specs, seeds, nearest map per query).
void write_benchmark(const BenchmarkSet& set, const std::filesystem::path& dir);

nlohmann::json to_json(const SceneSpec& s);
nlohmann::json to_json(const SensorSpec& s);
nlohmann::json to_json(const BenchmarkParams& p);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
void from_json(const nlohmann::json& j, SceneSpec& s);
void from_json(const nlohmann::json& j, SensorSpec& s);
void from_json(const nlohmann::json& j, BenchmarkParams& p);

// Brute-force references, meant for small inputs in tests.

/// Each (theta_j, tau_k) bin gathers every nonzero cell with the triangular
/// weight max(0, 1 - d/dtau), d the circular tau distance.
Sinogram oracle_radon(const FeatureBEV& bev);
/// Direct triple sum of circular_corr's definition.
std::vector<double> oracle_corr1d(const Grid3& a, const Grid3& b);
/// Direct quadruple sum of corr2d's definition.
Grid3 oracle_corr2d(const Grid3& a, const Grid3& b);

}  // namespace ringloc

#endif  // RINGLOC_SYNTHETIC_SYNTHETIC_HPP
