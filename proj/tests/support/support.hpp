#ifndef RINGLOC_TESTS_SUPPORT_HPP
#define RINGLOC_TESTS_SUPPORT_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>

#include "ringloc/common/grid3.hpp"
#include "ringloc/common/rng.hpp"
#include "ringloc/features/features.hpp"
#include "ringloc/scan_io/point_cloud.hpp"

namespace ringloc::test {

inline Grid3 random_grid(Rng& rng, std::size_t r, std::size_t c, std::size_t ch, double lo = -1.0, double hi = 1.0) {
  Grid3 g(r, c, ch);
  for (double& v : g.values()) v = rng.uniform(lo, hi);
  return g;
}

/// out(r + dr, c + dc) = g(r, c), both axes circular.
inline Grid3 roll(const Grid3& g, long dr, long dc) {
  Grid3 out(g.rows(), g.cols(), g.channels());
  const long R = static_cast<long>(g.rows()), C = static_cast<long>(g.cols());
  for (std::size_t ch = 0; ch < g.channels(); ++ch) {
    for (long r = 0; r < R; ++r) {
      for (long c = 0; c < C; ++c) {
        out.at(static_cast<std::size_t>(((r + dr) % R + R) % R), static_cast<std::size_t>(((c + dc) % C + C) % C), ch) =
            g.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch);
      }
    }
  }
  return out;
}

/// max |a - b| / max |b|.
inline double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / std::max(scale, 1e-300);
}

/// ||a - b||_F / ||b||_F.
inline double frobenius_rel(const Grid3& a, const Grid3& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    num += d * d;
    den += b.values()[i] * b.values()[i];
  }
  return std::sqrt(num / den);
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, double half = 10.0) {
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) {
    pc.points.push_back({rng.uniform(-half, half), rng.uniform(-half, half), rng.normal(0.0, 2.0), 0.0F});
  }
  return pc;
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("ringloc_" + tag + "_" + std::to_string(rng.next_u64() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

}  // namespace ringloc::test

#endif  // RINGLOC_TESTS_SUPPORT_HPP
