#include "ringloc/scan_io/cloud_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "ringloc/common/endian.hpp"
#include "ringloc/common/error.hpp"
#include "ringloc/common/log.hpp"

namespace ringloc {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_char(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    std::string_view tok = line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    out.push_back(tok);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  // from_chars rejects a leading '+', which some writers emit.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // from_chars does not accept "nan"/"inf" spellings with every libstdc++.
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "nan" || lower == "-nan") return std::nan("");
    if (lower == "inf") return HUGE_VAL;
    if (lower == "-inf") return -HUGE_VAL;
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path, std::ios::openmode mode) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kFileNotFound, path.string());
  std::ifstream is(path, mode);
  if (!is) throw Error(ErrorCode::kFileNotFound, path.string());
  return is;
}

void push_point(LoadedCloud& out, double x, double y, double z, float intensity) {
  Point3 p{x, y, z, intensity};
  if (!p.finite()) {
    ++out.dropped_count;
    return;
  }
  out.cloud.points.push_back(p);
}

LoadedCloud load_xyz(const std::filesystem::path& path) {
  std::ifstream is = open_or_throw(path, std::ios::in);
  LoadedCloud out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 3 && tokens.size() != 4) {
      throw Error(ErrorCode::kFormatError,
                  path.string() + ":" + std::to_string(line_no) + ": expected 3 or 4 fields");
    }
    double v[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto parsed = parse_double(tokens[i]);
      if (!parsed) {
        throw Error(ErrorCode::kFormatError,
                    path.string() + ":" + std::to_string(line_no) + ": bad number '" + std::string(tokens[i]) + "'");
      }
      v[i] = *parsed;
    }
    if (tokens.size() == 4) out.cloud.has_intensity = true;
    push_point(out, v[0], v[1], v[2], static_cast<float>(v[3]));
  }
  return out;
}

LoadedCloud load_bin(const std::filesystem::path& path) {
  std::ifstream is = open_or_throw(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::kFormatError, path.string() + ": size is not a multiple of 16 bytes");
  }
  LoadedCloud out;
  out.cloud.has_intensity = true;
  out.cloud.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const char* rec = bytes.data() + off;
    push_point(out, endian::f32_from_le_bytes(rec), endian::f32_from_le_bytes(rec + 4),
               endian::f32_from_le_bytes(rec + 8), endian::f32_from_le_bytes(rec + 12));
  }
  return out;
}

struct PcdField {
  std::string name;
  std::size_t size = 4;
  char type = 'F';
  std::size_t count = 1;
  std::size_t offset = 0;
};

double read_scalar(const char* p, const PcdField& f) {
  if (f.type == 'F' && f.size == 4) return endian::f32_from_le_bytes(p);
  if (f.type == 'F' && f.size == 8) {
    double d = 0;
    std::memcpy(&d, p, 8);
    return d;
  }
  if (f.type == 'U' && f.size == 1) return static_cast<unsigned char>(*p);
  if (f.type == 'I' && f.size == 1) return static_cast<signed char>(*p);
  if (f.type == 'U' && f.size == 2) {
    std::uint16_t v = 0;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (f.type == 'I' && f.size == 2) {
    std::int16_t v = 0;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (f.type == 'U' && f.size == 4) {
    std::uint32_t v = 0;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (f.type == 'I' && f.size == 4) {
    std::int32_t v = 0;
    std::memcpy(&v, p, 4);
    return v;
  }
  throw Error(ErrorCode::kFormatError, "unsupported PCD field type " + std::string(1, f.type) + std::to_string(f.size));
}

LoadedCloud load_pcd(const std::filesystem::path& path) {
  std::ifstream is = open_or_throw(path, std::ios::binary);
  std::vector<PcdField> fields;
  std::size_t points = 0;
  bool have_points = false;
  std::string data;
  std::string line;
  auto fail = [&](const std::string& msg) { throw Error(ErrorCode::kFormatError, path.string() + ": " + msg); };

  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tok = split_ws(line);
    if (tok.empty() || tok.front().front() == '#') continue;
    const std::string_view key = tok.front();
    if (key == "VERSION") {
      continue;
    } else if (key == "FIELDS") {
      fields.clear();
      for (std::size_t i = 1; i < tok.size(); ++i) fields.push_back({std::string(tok[i])});
    } else if (key == "SIZE" || key == "TYPE" || key == "COUNT") {
      if (tok.size() != fields.size() + 1) fail(std::string(key) + " arity does not match FIELDS");
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (key == "TYPE") {
          fields[i - 1].type = tok[i].front();
        } else {
          auto v = parse_int(tok[i]);
          if (!v || *v <= 0) fail("bad " + std::string(key));
          (key == "SIZE" ? fields[i - 1].size : fields[i - 1].count) = static_cast<std::size_t>(*v);
        }
      }
    } else if (key == "WIDTH" || key == "HEIGHT" || key == "VIEWPOINT") {
      continue;
    } else if (key == "POINTS") {
      if (tok.size() != 2) fail("bad POINTS");
      auto v = parse_int(tok[1]);
      if (!v || *v < 0) fail("bad POINTS");
      points = static_cast<std::size_t>(*v);
      have_points = true;
    } else if (key == "DATA") {
      if (tok.size() != 2) fail("bad DATA");
      data = std::string(tok[1]);
      break;
    } else {
      fail("unknown header key '" + std::string(key) + "'");
    }
  }
  if (data.empty() || fields.empty() || !have_points) fail("incomplete header");

  std::size_t point_size = 0;
  for (auto& f : fields) {
    f.offset = point_size;
    point_size += f.size * f.count;
  }
  auto find = [&](std::string_view name) -> const PcdField* {
    for (const auto& f : fields)
      if (f.name == name) return &f;
    return nullptr;
  };
  const PcdField* fx = find("x");
  const PcdField* fy = find("y");
  const PcdField* fz = find("z");
  const PcdField* fi = find("intensity");
  if (!fx || !fy || !fz) fail("missing x/y/z fields");

  LoadedCloud out;
  out.cloud.has_intensity = fi != nullptr;
  out.cloud.points.reserve(points);

  if (data == "ascii") {
    // Column index of the first element of each field.
    std::size_t columns = 0;
    std::vector<std::size_t> column_of(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      column_of[i] = columns;
      columns += fields[i].count;
    }
    auto col = [&](const PcdField* f) { return column_of[static_cast<std::size_t>(f - fields.data())]; };
    std::size_t read = 0;
    while (read < points && std::getline(is, line)) {
      const auto tok = split_ws(line);
      if (tok.empty()) continue;
      if (tok.size() != columns) fail("point " + std::to_string(read) + " has wrong field count");
      auto get = [&](const PcdField* f) {
        auto v = parse_double(tok[col(f)]);
        if (!v) fail("bad number in point " + std::to_string(read));
        return *v;
      };
      push_point(out, get(fx), get(fy), get(fz), fi ? static_cast<float>(get(fi)) : 0.0F);
      ++read;
    }
    if (read != points) fail("expected " + std::to_string(points) + " points, found " + std::to_string(read));
  } else if (data == "binary") {
    std::vector<char> buf(points * point_size);
    if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size()))) fail("truncated binary payload");
    for (std::size_t i = 0; i < points; ++i) {
      const char* rec = buf.data() + i * point_size;
      push_point(out, read_scalar(rec + fx->offset, *fx), read_scalar(rec + fy->offset, *fy),
                 read_scalar(rec + fz->offset, *fz),
                 fi ? static_cast<float>(read_scalar(rec + fi->offset, *fi)) : 0.0F);
    }
  } else {
    fail("unsupported DATA encoding '" + data + "'");
  }
  return out;
}

std::string fmt_g(double v, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

}  // namespace

CloudFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pcd") return CloudFormat::kPcd;
  if (ext == ".bin") return CloudFormat::kBinF32;
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::kXyzAscii;
  throw Error(ErrorCode::kFormatError, "cannot infer cloud format from '" + path.string() + "'");
}

LoadedCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  LoadedCloud out;
  switch (format) {
    case CloudFormat::kXyzAscii: out = load_xyz(path); break;
    case CloudFormat::kPcd: out = load_pcd(path); break;
    case CloudFormat::kBinF32: out = load_bin(path); break;
  }
  out.cloud.frame_id = path.stem().string();
  if (out.dropped_count > 0) {
    logger()->info("{}: dropped {} non-finite points", path.string(), out.dropped_count);
  }
  if (out.cloud.empty()) throw Error(ErrorCode::kEmptyCloud, path.string());
  return out;
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format,
                PcdEncoding pcd_encoding) {
  const bool binary = format == CloudFormat::kBinF32 ||
                      (format == CloudFormat::kPcd && pcd_encoding == PcdEncoding::kBinary);
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());

  switch (format) {
    case CloudFormat::kXyzAscii:
      for (const Point3& p : cloud.points) {
        os << fmt_g(p.x, 17) << ' ' << fmt_g(p.y, 17) << ' ' << fmt_g(p.z, 17);
        if (cloud.has_intensity) os << ' ' << fmt_g(p.intensity, 9);
        os << '\n';
      }
      break;
    case CloudFormat::kBinF32:
      for (const Point3& p : cloud.points) {
        endian::put_f32(os, static_cast<float>(p.x));
        endian::put_f32(os, static_cast<float>(p.y));
        endian::put_f32(os, static_cast<float>(p.z));
        endian::put_f32(os, p.intensity);
      }
      break;
    case CloudFormat::kPcd: {
      const bool with_i = cloud.has_intensity;
      os << "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\n";
      os << (with_i ? "FIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nCOUNT 1 1 1 1\n"
                    : "FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n");
      os << "WIDTH " << cloud.size() << "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\n";
      os << "POINTS " << cloud.size() << "\nDATA " << (binary ? "binary" : "ascii") << '\n';
      for (const Point3& p : cloud.points) {
        const float v[4] = {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z), p.intensity};
        const std::size_t n = with_i ? 4 : 3;
        if (binary) {
          for (std::size_t i = 0; i < n; ++i) endian::put_f32(os, v[i]);
        } else {
          for (std::size_t i = 0; i < n; ++i) os << (i ? " " : "") << fmt_g(v[i], 9);
          os << '\n';
        }
      }
      break;
    }
  }
  if (!os) throw Error(ErrorCode::kIoError, "short write on " + path.string());
}

std::vector<std::pair<std::int64_t, Pose3>> load_poses(const std::filesystem::path& path) {
  std::ifstream is = open_or_throw(path, std::ios::in);
  auto fail = [&](std::size_t line_no, const std::string& msg) {
    throw Error(ErrorCode::kFormatError, path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  std::vector<std::pair<std::int64_t, Pose3>> out;

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tok = split_char(line, ',');
    if (columns == 0) {
      static const std::vector<std::string_view> kFull{"id", "x", "y", "z", "qx", "qy", "qz", "qw"};
      static const std::vector<std::string_view> kPlanar{"id", "x", "y", "yaw"};
      if (tok == kFull) {
        columns = 8;
      } else if (tok == kPlanar) {
        columns = 4;
      } else {
        fail(line_no, "expected header 'id,x,y,z,qx,qy,qz,qw' or 'id,x,y,yaw'");
      }
      continue;
    }
    if (tok.size() != columns) fail(line_no, "expected " + std::to_string(columns) + " columns");
    auto id = parse_int(tok[0]);
    if (!id) fail(line_no, "bad id");
    std::vector<double> v;
    for (std::size_t i = 1; i < tok.size(); ++i) {
      auto d = parse_double(tok[i]);
      if (!d || !std::isfinite(*d)) fail(line_no, "bad number '" + std::string(tok[i]) + "'");
      v.push_back(*d);
    }
    Pose3 pose;
    if (columns == 4) {
      pose = Pose3::from_xyz_yaw(v[0], v[1], 0.0, v[2]);
    } else {
      Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
      const double norm = q.norm();
      if (std::abs(norm - 1.0) > 1e-3) {
        throw Error(ErrorCode::kNonUnitQuaternion,
                    path.string() + ":" + std::to_string(line_no) + ": quaternion norm " + fmt_g(norm, 9));
      }
      pose.translation = Eigen::Vector3d(v[0], v[1], v[2]);
      pose.rotation = q.normalized();
    }
    if (!out.empty() && *id <= out.back().first) fail(line_no, "ids must be strictly increasing");
    out.emplace_back(*id, pose);
  }
  if (columns == 0) fail(line_no, "missing header");
  return out;
}

void save_poses(const std::filesystem::path& path,
                const std::vector<std::pair<std::int64_t, Pose3>>& poses) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  os << "id,x,y,z,qx,qy,qz,qw\n";
  for (const auto& [id, p] : poses) {
    os << id;
    for (double v : {p.translation.x(), p.translation.y(), p.translation.z(), p.rotation.x(), p.rotation.y(),
                     p.rotation.z(), p.rotation.w()}) {
      os << ',' << fmt_g(v, 17);
    }
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::kIoError, "short write on " + path.string());
}

}  // namespace ringloc
