#ifndef RINGLOC_FEATURES_FEATURES_HPP
#define RINGLOC_FEATURES_FEATURES_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ringloc/common/grid3.hpp"
#include "ringloc/scan_io/point_cloud.hpp"

namespace ringloc {

struct GridConfig {
  std::size_t size = 120;  ///< cells per side
  double extent = 70.0;    ///< half-width in meters
  std::size_t z_bins = 20;
  double z_min = -2.0;
  double z_max = 8.0;

  double resolution() const { return 2.0 * extent / static_cast<double>(size); }
  /// Metric coordinate of the center of cell index i along either axis.
  double cell_center(std::size_t i) const {
    return -extent + (static_cast<double>(i) + 0.5) * resolution();
  }
  /// Cell (row from x, col from y) containing the point, if inside the grid.
  std::optional<std::pair<std::size_t, std::size_t>> cell_of(double x, double y) const;

  /// Throws InvalidArgument unless size >= 8 and even, extent > 0, z range valid.
  void validate() const;

  bool operator==(const GridConfig&) const = default;
};

enum class FeatureKind { kOccupancy, kSixChannel };

struct NeighborhoodStats {
  std::array<double, 3> lambda3d{};  ///< descending
  std::array<double, 2> lambda2d{};  ///< descending
  double z_max = 0.0;
  double z_min = 0.0;
  double z_var = 0.0;
};

/// c1 change of curvature, c2 omnivariance, c3 eigen-entropy, c4 2-D
/// linearity, c5 max height difference, c6 height variance.
struct PointFeature {
  std::array<double, 6> c{};
};

/// Flat k-nearest-neighbor table: the list of point i is indices[i*k, (i+1)*k),
/// nearest first, the point itself included.
struct NeighborLists {
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;

  std::size_t count() const { return k == 0 ? 0 : indices.size() / k; }
  std::span<const std::uint32_t> of(std::size_t i) const { return {indices.data() + i * k, k}; }
};

struct FeatureBEV {
  Grid3 grid;
  GridConfig config;
};

/// Exact kNN with ties broken by lower index. Throws TooFewPoints when the
/// cloud holds fewer than k points.
NeighborLists knn_indices(const PointCloud& cloud, std::size_t k, std::size_t jobs = 1);

std::vector<NeighborhoodStats> neighborhood_stats(const PointCloud& cloud, const NeighborLists& nbrs,
                                                  std::size_t jobs = 1);

/// With entropy_normalized the entropy uses eigenvalues divided by their sum;
/// otherwise -sum(l ln l) on the raw eigenvalues.
PointFeature point_features(const NeighborhoodStats& stats, bool entropy_normalized = true);

/// Channel-wise max pooling of per-point features; empty cells are 0.
FeatureBEV rasterize_bev(const PointCloud& cloud, std::span<const PointFeature> feats, const GridConfig& cfg);

/// Number of occupied z-bins in each column.
FeatureBEV occupancy_bev(const PointCloud& cloud, const GridConfig& cfg);

struct FeatureOptions {
  FeatureKind kind = FeatureKind::kSixChannel;
  std::size_t k_neighbors = 30;
  bool entropy_normalized = true;

  bool operator==(const FeatureOptions&) const = default;
};

/// The extractor used by the pipeline: occupancy or the six-channel stack.
FeatureBEV make_bev(const PointCloud& cloud, const GridConfig& grid, const FeatureOptions& opts,
                    std::size_t jobs = 1);

}  // namespace ringloc

#endif  // RINGLOC_FEATURES_FEATURES_HPP
