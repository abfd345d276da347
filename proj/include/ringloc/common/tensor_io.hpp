#ifndef RINGLOC_COMMON_TENSOR_IO_HPP
#define RINGLOC_COMMON_TENSOR_IO_HPP

#include <cstdint>
#include <filesystem>

#include "ringloc/common/grid3.hpp"

namespace ringloc {

/// Axis tag stored as the 4-byte magic of a tensor file.
enum class TensorKind : std::uint32_t {
  kBev = 0x56454252,       // "RBEV"
  kSinogram = 0x4D475352,  // "RSGM"
  kTing = 0x474E5452,      // "RTNG"
};

/// Layout: 16-byte header {magic, H, W, C} as little-endian uint32, then
/// H*W*C little-endian float32 values in channel-major, row-major order.
void write_tensor(const std::filesystem::path& path, TensorKind kind, const Grid3& grid);

/// Throws FileNotFound, or FormatError on a bad magic, a kind other than
/// `expected`, or a truncated payload.
Grid3 read_tensor(const std::filesystem::path& path, TensorKind expected);

}  // namespace ringloc

#endif  // RINGLOC_COMMON_TENSOR_IO_HPP
