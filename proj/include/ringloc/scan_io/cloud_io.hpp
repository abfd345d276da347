#ifndef RINGLOC_SCAN_IO_CLOUD_IO_HPP
#define RINGLOC_SCAN_IO_CLOUD_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include "ringloc/scan_io/point_cloud.hpp"

namespace ringloc {

enum class CloudFormat {
  kXyzAscii,  ///< "x y z [i]" per line, whitespace separated
  kPcd,       ///< PCD v0.7, DATA ascii or binary
  kBinF32,    ///< headerless little-endian float32 {x, y, z, intensity} records
};

/// Guesses the format from the extension: .xyz/.txt, .pcd, .bin.
CloudFormat format_from_extension(const std::filesystem::path& path);

struct LoadedCloud {
  PointCloud cloud;
  std::size_t dropped_count = 0;  ///< records with a non-finite coordinate
};

/// Throws FileNotFound, FormatError, or EmptyCloud when nothing finite remains.
LoadedCloud load_cloud(const std::filesystem::path& path, CloudFormat format);
inline LoadedCloud load_cloud(const std::filesystem::path& path) {
  return load_cloud(path, format_from_extension(path));
}

enum class PcdEncoding { kAscii, kBinary };

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format,
                PcdEncoding pcd_encoding = PcdEncoding::kBinary);

/// Rows "id,x,y,z,qx,qy,qz,qw" or planar "id,x,y,yaw" (promoted with zero
/// z, roll and pitch). Quaternions are renormalized; a norm off by more than
/// 1e-3 is rejected with NonUnitQuaternion. Ids must be strictly increasing.
std::vector<std::pair<std::int64_t, Pose3>> load_poses(const std::filesystem::path& path);

/// Writes the 8-column form with full double precision.
void save_poses(const std::filesystem::path& path,
                const std::vector<std::pair<std::int64_t, Pose3>>& poses);

}  // namespace ringloc

#endif  // RINGLOC_SCAN_IO_CLOUD_IO_HPP
