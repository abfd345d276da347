#include "ringloc/scan_io/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ringloc/common/error.hpp"
#include "ringloc/common/rng.hpp"

namespace ringloc {

namespace {

// A plane must explain this share of the scan to count as ground.
constexpr double kMinGroundFraction = 0.10;

double percentile_z(const PointCloud& cloud, double q) {
  std::vector<double> z;
  z.reserve(cloud.size());
  for (const auto& p : cloud.points) z.push_back(p.z);
  const auto k = static_cast<std::size_t>(q * static_cast<double>(z.size() - 1));
  std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k), z.end());
  return z[k];
}

}  // namespace

std::optional<PlaneFit> fit_ground_plane(const PointCloud& cloud, const PreprocessConfig& cfg) {
  const std::size_t n = cloud.size();
  if (n < 3) return std::nullopt;
  const double min_nz = std::cos(cfg.ransac_max_tilt_deg * std::numbers::pi / 180.0);
  Rng rng(cfg.ransac_seed);
  std::optional<PlaneFit> best;
  for (int it = 0; it < cfg.ransac_iters; ++it) {
    const Eigen::Vector3d a = cloud.points[rng.below(n)].xyz();
    const Eigen::Vector3d b = cloud.points[rng.below(n)].xyz();
    const Eigen::Vector3d c = cloud.points[rng.below(n)].xyz();
    Eigen::Vector3d normal = (b - a).cross(c - a);
    const double len = normal.norm();
    if (len < 1e-9) continue;
    normal /= len;
    if (normal.z() < 0) normal = -normal;
    if (normal.z() < min_nz) continue;
    const double offset = -normal.dot(a);
    std::size_t inliers = 0;
    for (const auto& p : cloud.points) {
      if (std::abs(normal.dot(p.xyz()) + offset) <= cfg.ransac_dist) ++inliers;
    }
    if (!best || inliers > best->inliers) best = PlaneFit{normal, offset, inliers};
  }
  if (!best) return std::nullopt;

  // Least-squares polish on the consensus set.
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> in;
  for (const auto& p : cloud.points) {
    if (std::abs(best->normal.dot(p.xyz()) + best->offset) <= cfg.ransac_dist) in.push_back(p.xyz());
  }
  for (const auto& p : in) mean += p;
  mean /= static_cast<double>(in.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : in) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Eigen::Vector3d normal = eig.eigenvectors().col(0);
  if (normal.z() < 0) normal = -normal;
  if (normal.z() >= min_nz) {
    best->normal = normal;
    best->offset = -normal.dot(mean);
    best->inliers = 0;
    for (const auto& p : cloud.points) {
      if (std::abs(normal.dot(p.xyz()) + best->offset) <= cfg.ransac_dist) ++best->inliers;
    }
  }
  if (static_cast<double>(best->inliers) < kMinGroundFraction * static_cast<double>(n)) return std::nullopt;
  return best;
}

PointCloud preprocess(const PointCloud& cloud, const PreprocessConfig& cfg) {
  if (cloud.empty()) throw Error(ErrorCode::kEmptyCloud, "preprocess input '" + cloud.frame_id + "'");
  if (!(cfg.range_max > 0.0)) throw Error(ErrorCode::kInvalidArgument, "range_max must be positive");

  PointCloud ranged;
  ranged.frame_id = cloud.frame_id;
  ranged.has_intensity = cloud.has_intensity;
  const double r2 = cfg.range_max * cfg.range_max;
  for (const auto& p : cloud.points) {
    if (p.x * p.x + p.y * p.y <= r2) ranged.points.push_back(p);
  }
  if (ranged.empty()) throw Error(ErrorCode::kEmptyAfterFilter, "no points within range_max");

  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.has_intensity = cloud.has_intensity;
  switch (cfg.ground_mode) {
    case GroundMode::kNone:
      out = std::move(ranged);
      break;
    case GroundMode::kZThreshold: {
      const double ground = cfg.ground_ref ? *cfg.ground_ref : percentile_z(ranged, 0.05);
      const double cut = ground + cfg.ground_z;
      for (const auto& p : ranged.points) {
        if (p.z > cut) out.points.push_back(p);
      }
      break;
    }
    case GroundMode::kRansacPlane: {
      const auto plane = fit_ground_plane(ranged, cfg);
      if (!plane) {
        out = std::move(ranged);
        break;
      }
      for (const auto& p : ranged.points) {
        if (plane->normal.dot(p.xyz()) + plane->offset > cfg.ransac_dist) out.points.push_back(p);
      }
      break;
    }
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyAfterFilter, "ground removal left no points");
  return out;
}

}  // namespace ringloc
