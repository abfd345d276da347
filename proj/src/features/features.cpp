#include "ringloc/features/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "ringloc/common/error.hpp"
#include "ringloc/common/parallel.hpp"
#include "ringloc/features/kdtree.hpp"

namespace ringloc {

std::optional<std::pair<std::size_t, std::size_t>> GridConfig::cell_of(double x, double y) const {
  // Scaling by size / (2 extent) instead of dividing by the rounded
  // resolution keeps cell boundaries such as the origin exact.
  const auto n = static_cast<double>(size);
  const double scale = n / (2.0 * extent);
  const double fx = std::floor((x + extent) * scale);
  const double fy = std::floor((y + extent) * scale);
  if (!(fx >= 0.0 && fx < n && fy >= 0.0 && fy < n)) return std::nullopt;
  return std::pair{static_cast<std::size_t>(fx), static_cast<std::size_t>(fy)};
}

void GridConfig::validate() const {
  if (size < 8 || size % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "grid size must be even and >= 8, got " + std::to_string(size));
  }
  if (!(extent > 0.0)) throw Error(ErrorCode::kInvalidArgument, "grid extent must be positive");
  if (z_bins == 0 || !(z_max > z_min)) throw Error(ErrorCode::kInvalidArgument, "invalid z binning");
}

NeighborLists knn_indices(const PointCloud& cloud, std::size_t k, std::size_t jobs) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (cloud.size() < k) {
    throw Error(ErrorCode::kTooFewPoints,
                "cloud has " + std::to_string(cloud.size()) + " points, need " + std::to_string(k));
  }
  const KdTree3 tree(cloud.points);
  NeighborLists out;
  out.k = k;
  out.indices.resize(cloud.size() * k);
  const std::size_t chunk = 1024;
  const std::size_t n_chunks = (cloud.size() + chunk - 1) / chunk;
  parallel_for(n_chunks, jobs, [&](std::size_t c) {
    std::vector<Neighbor> found;
    const std::size_t end = std::min(cloud.size(), (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) {
      tree.knn(cloud.points[i].xyz(), k, found);
      for (std::size_t j = 0; j < k; ++j) out.indices[i * k + j] = found[j].index;
    }
  });
  return out;
}

namespace {

NeighborhoodStats stats_of(const PointCloud& cloud, std::span<const std::uint32_t> idx) {
  const auto k = static_cast<double>(idx.size());
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (auto i : idx) mean += cloud.points[i].xyz();
  mean /= k;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  NeighborhoodStats s;
  s.z_max = -std::numeric_limits<double>::infinity();
  s.z_min = std::numeric_limits<double>::infinity();
  for (auto i : idx) {
    const Eigen::Vector3d d = cloud.points[i].xyz() - mean;
    cov.noalias() += d * d.transpose();
    s.z_max = std::max(s.z_max, cloud.points[i].z);
    s.z_min = std::min(s.z_min, cloud.points[i].z);
  }
  cov /= k;
  s.z_var = cov(2, 2);

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  for (int j = 0; j < 3; ++j) s.lambda3d[static_cast<std::size_t>(j)] = std::max(0.0, ev(2 - j));

  // 2x2 symmetric eigenvalues in closed form.
  const double a = cov(0, 0), b = cov(0, 1), d = cov(1, 1);
  const double half_tr = 0.5 * (a + d);
  const double disc = std::hypot(0.5 * (a - d), b);
  s.lambda2d = {std::max(0.0, half_tr + disc), std::max(0.0, half_tr - disc)};
  return s;
}

}  // namespace

std::vector<NeighborhoodStats> neighborhood_stats(const PointCloud& cloud, const NeighborLists& nbrs,
                                                  std::size_t jobs) {
  const std::size_t n = nbrs.count();
  std::vector<NeighborhoodStats> out(n);
  const std::size_t chunk = 1024;
  parallel_for((n + chunk - 1) / chunk, jobs, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) out[i] = stats_of(cloud, nbrs.of(i));
  });
  return out;
}

PointFeature point_features(const NeighborhoodStats& s, bool entropy_normalized) {
  PointFeature f;
  const auto& l = s.lambda3d;
  const double sum = l[0] + l[1] + l[2];
  if (sum > 0.0) {
    f.c[0] = l[2] / sum;
    f.c[1] = std::cbrt(l[0] * l[1] * l[2]) / sum;
  }
  double h = 0.0;
  for (double lj : l) {
    const double e = entropy_normalized ? (sum > 0.0 ? lj / sum : 0.0) : lj;
    if (e > 0.0) h -= e * std::log(e);
  }
  f.c[2] = h;
  f.c[3] = s.lambda2d[0] > 0.0 ? s.lambda2d[1] / s.lambda2d[0] : 0.0;
  f.c[4] = s.z_max - s.z_min;
  f.c[5] = s.z_var;
  return f;
}

FeatureBEV rasterize_bev(const PointCloud& cloud, std::span<const PointFeature> feats, const GridConfig& cfg) {
  cfg.validate();
  if (feats.size() != cloud.size()) {
    throw Error(ErrorCode::kLengthMismatch, "feature count does not match point count");
  }
  constexpr double kUnset = -std::numeric_limits<double>::infinity();
  FeatureBEV bev{Grid3(cfg.size, cfg.size, 6, kUnset), cfg};
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto cell = cfg.cell_of(cloud.points[i].x, cloud.points[i].y);
    if (!cell) continue;
    for (std::size_t ch = 0; ch < 6; ++ch) {
      double& v = bev.grid.at(cell->first, cell->second, ch);
      v = std::max(v, feats[i].c[ch]);
    }
  }
  for (double& v : bev.grid.values()) {
    if (v == kUnset) v = 0.0;
  }
  return bev;
}

FeatureBEV occupancy_bev(const PointCloud& cloud, const GridConfig& cfg) {
  cfg.validate();
  const std::size_t cells = cfg.size * cfg.size;
  std::vector<std::uint8_t> voxels(cells * cfg.z_bins, 0);
  const double dz = (cfg.z_max - cfg.z_min) / static_cast<double>(cfg.z_bins);
  for (const auto& p : cloud.points) {
    const auto cell = cfg.cell_of(p.x, p.y);
    if (!cell) continue;
    const double fz = std::floor((p.z - cfg.z_min) / dz);
    if (!(fz >= 0.0 && fz < static_cast<double>(cfg.z_bins))) continue;
    voxels[(cell->first * cfg.size + cell->second) * cfg.z_bins + static_cast<std::size_t>(fz)] = 1;
  }
  FeatureBEV bev{Grid3(cfg.size, cfg.size, 1), cfg};
  auto out = bev.grid.channel(0);
  for (std::size_t c = 0; c < cells; ++c) {
    unsigned count = 0;
    for (std::size_t z = 0; z < cfg.z_bins; ++z) count += voxels[c * cfg.z_bins + z];
    out[c] = count;
  }
  return bev;
}

FeatureBEV make_bev(const PointCloud& cloud, const GridConfig& grid, const FeatureOptions& opts,
                    std::size_t jobs) {
  if (opts.kind == FeatureKind::kOccupancy) return occupancy_bev(cloud, grid);
  const auto nbrs = knn_indices(cloud, opts.k_neighbors, jobs);
  const auto stats = neighborhood_stats(cloud, nbrs, jobs);
  std::vector<PointFeature> feats(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) feats[i] = point_features(stats[i], opts.entropy_normalized);
  return rasterize_bev(cloud, feats, grid);
}

}  // namespace ringloc
