#include "ringloc/features/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace ringloc {

namespace {

constexpr std::uint32_t kLeafSize = 12;

double coord(const Point3& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

double dist2(const Point3& p, const Eigen::Vector3d& q) {
  const double dx = p.x - q.x(), dy = p.y - q.y(), dz = p.z - q.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

KdTree3::KdTree3(std::span<const Point3> points) : points_(points), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), 0U);
  if (!order_.empty()) {
    nodes_.reserve(2 * (order_.size() / kLeafSize + 1));
    build(0, static_cast<std::uint32_t>(order_.size()));
  }
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  double lo[3] = {1e300, 1e300, 1e300}, hi[3] = {-1e300, -1e300, -1e300};
  for (std::uint32_t i = begin; i < end; ++i) {
    const Point3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], coord(p, a));
      hi[a] = std::max(hi[a], coord(p, a));
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident: keep as a leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = coord(points_[a], axis), cb = coord(points_[b], axis);
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = coord(points_[order_[mid]], axis);
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree3::knn(const Eigen::Vector3d& q, std::size_t k, std::vector<Neighbor>& out) const {
  out.clear();
  if (k == 0 || nodes_.empty()) return;
  std::priority_queue<Neighbor> heap;  // top = current worst
  auto consider = [&](std::uint32_t idx) {
    const Neighbor cand{idx, dist2(points_[idx], q)};
    if (heap.size() < k) {
      heap.push(cand);
    } else if (cand < heap.top()) {
      heap.pop();
      heap.push(cand);
    }
  };
  auto bound = [&]() { return heap.size() < k ? 1e300 : heap.top().dist2; };

  std::vector<std::pair<std::int32_t, double>> stack;  // node, squared distance to its half-space
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, d2] = stack.back();
    stack.pop_back();
    if (d2 > bound()) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) consider(order_[i]);
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff < 0 ? node.left : node.right;
    const std::int32_t far = diff < 0 ? node.right : node.left;
    stack.emplace_back(far, std::max(d2, diff * diff));
    stack.emplace_back(near, d2);
  }
  out.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
}

std::optional<Neighbor> KdTree3::nearest(const Eigen::Vector3d& q, double max_dist2) const {
  std::optional<Neighbor> best;
  if (nodes_.empty()) return best;
  double bound = max_dist2;
  std::vector<std::pair<std::int32_t, double>> stack;
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, d2] = stack.back();
    stack.pop_back();
    if (d2 > bound) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Neighbor cand{order_[i], dist2(points_[order_[i]], q)};
        if (cand.dist2 <= max_dist2 && (!best || cand < *best)) {
          best = cand;
          bound = cand.dist2;
        }
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near = diff < 0 ? node.left : node.right;
    const std::int32_t far = diff < 0 ? node.right : node.left;
    stack.emplace_back(far, std::max(d2, diff * diff));
    stack.emplace_back(near, d2);
  }
  return best;
}

}  // namespace ringloc
