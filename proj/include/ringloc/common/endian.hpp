#ifndef RINGLOC_COMMON_ENDIAN_HPP
#define RINGLOC_COMMON_ENDIAN_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace ringloc::endian {

inline std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000FF00U) | ((v << 8) & 0x00FF0000U) | (v << 24);
}

inline std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return swap32(v);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const std::uint32_t le = to_le(v);
  os.write(reinterpret_cast<const char*>(&le), sizeof(le));
}

inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

inline bool get_u32(std::istream& is, std::uint32_t& v) {
  std::uint32_t raw = 0;
  if (!is.read(reinterpret_cast<char*>(&raw), sizeof(raw))) return false;
  v = to_le(raw);
  return true;
}

inline float f32_from_le_bytes(const char* bytes) {
  std::uint32_t raw = 0;
  std::memcpy(&raw, bytes, sizeof(raw));
  return std::bit_cast<float>(to_le(raw));
}

}  // namespace ringloc::endian

#endif  // RINGLOC_COMMON_ENDIAN_HPP
