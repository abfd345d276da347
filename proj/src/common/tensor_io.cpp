#include "ringloc/common/tensor_io.hpp"

#include <fstream>
#include <vector>

#include "ringloc/common/endian.hpp"
#include "ringloc/common/error.hpp"

namespace ringloc {

void write_tensor(const std::filesystem::path& path, TensorKind kind, const Grid3& grid) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  endian::put_u32(os, static_cast<std::uint32_t>(kind));
  endian::put_u32(os, static_cast<std::uint32_t>(grid.rows()));
  endian::put_u32(os, static_cast<std::uint32_t>(grid.cols()));
  endian::put_u32(os, static_cast<std::uint32_t>(grid.channels()));
  for (double v : grid.values()) endian::put_f32(os, static_cast<float>(v));
  if (!os) throw Error(ErrorCode::kIoError, "short write on " + path.string());
}

Grid3 read_tensor(const std::filesystem::path& path, TensorKind expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kFileNotFound, path.string());
  std::uint32_t magic = 0, h = 0, w = 0, c = 0;
  if (!endian::get_u32(is, magic) || !endian::get_u32(is, h) || !endian::get_u32(is, w) ||
      !endian::get_u32(is, c)) {
    throw Error(ErrorCode::kFormatError, "truncated tensor header in " + path.string());
  }
  if (magic != static_cast<std::uint32_t>(expected)) {
    throw Error(ErrorCode::kFormatError, "unexpected tensor tag in " + path.string());
  }
  Grid3 grid(h, w, c);
  std::vector<char> bytes(grid.size() * 4);
  if (!is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw Error(ErrorCode::kFormatError, "truncated tensor payload in " + path.string());
  }
  auto values = grid.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = endian::f32_from_le_bytes(bytes.data() + 4 * i);
  }
  return grid;
}

}  // namespace ringloc
