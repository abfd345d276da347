#ifndef RINGLOC_FEATURES_KDTREE_HPP
#define RINGLOC_FEATURES_KDTREE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ringloc/scan_io/point_cloud.hpp"

namespace ringloc {

struct Neighbor {
  std::uint32_t index = 0;
  double dist2 = 0.0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
  }
};

/// Exact 3-D kd-tree over a borrowed point array. Results are ordered by
/// (squared distance, index) so equal distances resolve deterministically.
class KdTree3 {
 public:
  explicit KdTree3(std::span<const Point3> points);

  /// The k nearest points to q (fewer if the tree holds fewer), sorted.
  void knn(const Eigen::Vector3d& q, std::size_t k, std::vector<Neighbor>& out) const;

  /// Nearest point within sqrt(max_dist2), if any.
  std::optional<Neighbor> nearest(const Eigen::Vector3d& q, double max_dist2) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;  // range into order_
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::span<const Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace ringloc

#endif  // RINGLOC_FEATURES_KDTREE_HPP
