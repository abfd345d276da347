#include "ringloc/localization/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

#include "ringloc/common/error.hpp"

namespace ringloc {

using nlohmann::json;

namespace {

const char* ground_name(GroundMode m) {
  switch (m) {
    case GroundMode::kZThreshold:
      return "z_threshold";
    case GroundMode::kRansacPlane:
      return "ransac_plane";
    case GroundMode::kNone:
      return "none";
  }
  return "none";
}

GroundMode ground_from(const std::string& s) {
  if (s == "z_threshold") return GroundMode::kZThreshold;
  if (s == "ransac_plane") return GroundMode::kRansacPlane;
  if (s == "none") return GroundMode::kNone;
  throw Error(ErrorCode::kConfigError, "unknown ground_mode '" + s + "'");
}

const char* feature_name(FeatureKind k) { return k == FeatureKind::kOccupancy ? "occupancy" : "table1_six"; }

FeatureKind feature_from(const std::string& s) {
  if (s == "occupancy") return FeatureKind::kOccupancy;
  if (s == "table1_six") return FeatureKind::kSixChannel;
  throw Error(ErrorCode::kConfigError, "unknown features '" + s + "'");
}

json grid_json(const GridConfig& g) {
  return {{"size", g.size}, {"extent", g.extent}, {"z_bins", g.z_bins}, {"z_min", g.z_min}, {"z_max", g.z_max}};
}

json preprocess_json(const PreprocessConfig& p) {
  return {{"range_max", p.range_max},
          {"ground_mode", ground_name(p.ground_mode)},
          {"ground_z", p.ground_z},
          {"ground_ref", p.ground_ref ? json(*p.ground_ref) : json(nullptr)},
          {"ransac_iters", p.ransac_iters},
          {"ransac_dist", p.ransac_dist},
          {"ransac_max_tilt_deg", p.ransac_max_tilt_deg},
          {"ransac_seed", p.ransac_seed}};
}

json icp_json(const IcpConfig& c) {
  return {{"enabled", c.enabled},
          {"max_corr_dist", c.max_corr_dist},
          {"max_iters", c.max_iters},
          {"eps", c.eps},
          {"min_fitness", c.min_fitness}};
}

void check_keys(const json& j, const json& reference, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!reference.contains(key)) {
      throw Error(ErrorCode::kConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  bool ok;
  if constexpr (std::is_same_v<T, bool>) {
    ok = v.is_boolean();
  } else if constexpr (std::is_integral_v<T>) {
    ok = v.is_number_integer() && (std::is_signed_v<T> || v.get<long long>() >= 0);
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = v.is_number();
  } else {
    ok = v.is_string();
  }
  if (!ok) throw Error(ErrorCode::kConfigError, "wrong type for '" + where + "." + key + "'");
  out = v.get<T>();
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    grid.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kConfigError, m); };
  if (features.k_neighbors < 3) fail("k_neighbors must be >= 3");
  if (!(preprocess.range_max > 0.0)) fail("preprocess.range_max must be positive");
  if (!(preprocess.ground_z >= 0.0)) fail("preprocess.ground_z must be >= 0");
  if (preprocess.ransac_iters < 1) fail("preprocess.ransac_iters must be >= 1");
  if (!(preprocess.ransac_dist > 0.0)) fail("preprocess.ransac_dist must be positive");
  if (!(preprocess.ransac_max_tilt_deg > 0.0 && preprocess.ransac_max_tilt_deg < 90.0)) {
    fail("preprocess.ransac_max_tilt_deg must be in (0, 90)");
  }
  if (top_k < 1) fail("top_k must be >= 1");
  if (!(accept_threshold >= -1.0 && accept_threshold <= 1.0)) fail("accept_threshold must be in [-1, 1]");
  if (!(icp.max_corr_dist > 0.0)) fail("icp.max_corr_dist must be positive");
  if (icp.max_iters < 1) fail("icp.max_iters must be >= 1");
  if (!(icp.eps > 0.0)) fail("icp.eps must be positive");
  if (!(icp.min_fitness >= 0.0 && icp.min_fitness <= 1.0)) fail("icp.min_fitness must be in [0, 1]");
}

json config_to_json(const PipelineConfig& cfg) {
  return {{"grid", grid_json(cfg.grid)},
          {"features", feature_name(cfg.features.kind)},
          {"entropy_normalized", cfg.features.entropy_normalized},
          {"k_neighbors", cfg.features.k_neighbors},
          {"preprocess", preprocess_json(cfg.preprocess)},
          {"top_k", cfg.top_k},
          {"accept_threshold", cfg.accept_threshold},
          {"icp", icp_json(cfg.icp)},
          {"subpixel", cfg.subpixel}};
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  const json ref = config_to_json(cfg);
  check_keys(j, ref, "config");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, ref.at("grid"), "grid");
    read(g, "size", cfg.grid.size, "grid");
    read(g, "extent", cfg.grid.extent, "grid");
    read(g, "z_bins", cfg.grid.z_bins, "grid");
    read(g, "z_min", cfg.grid.z_min, "grid");
    read(g, "z_max", cfg.grid.z_max, "grid");
  }
  std::string features = feature_name(cfg.features.kind);
  read(j, "features", features, "config");
  cfg.features.kind = feature_from(features);
  read(j, "entropy_normalized", cfg.features.entropy_normalized, "config");
  read(j, "k_neighbors", cfg.features.k_neighbors, "config");

  if (j.contains("preprocess")) {
    const json& p = j.at("preprocess");
    check_keys(p, ref.at("preprocess"), "preprocess");
    read(p, "range_max", cfg.preprocess.range_max, "preprocess");
    std::string mode = ground_name(cfg.preprocess.ground_mode);
    read(p, "ground_mode", mode, "preprocess");
    cfg.preprocess.ground_mode = ground_from(mode);
    read(p, "ground_z", cfg.preprocess.ground_z, "preprocess");
    if (p.contains("ground_ref") && !p.at("ground_ref").is_null()) {
      double ref_z = 0.0;
      read(p, "ground_ref", ref_z, "preprocess");
      cfg.preprocess.ground_ref = ref_z;
    }
    read(p, "ransac_iters", cfg.preprocess.ransac_iters, "preprocess");
    read(p, "ransac_dist", cfg.preprocess.ransac_dist, "preprocess");
    read(p, "ransac_max_tilt_deg", cfg.preprocess.ransac_max_tilt_deg, "preprocess");
    read(p, "ransac_seed", cfg.preprocess.ransac_seed, "preprocess");
  }
  read(j, "top_k", cfg.top_k, "config");
  read(j, "accept_threshold", cfg.accept_threshold, "config");
  if (j.contains("icp")) {
    const json& c = j.at("icp");
    check_keys(c, ref.at("icp"), "icp");
    read(c, "enabled", cfg.icp.enabled, "icp");
    read(c, "max_corr_dist", cfg.icp.max_corr_dist, "icp");
    read(c, "max_iters", cfg.icp.max_iters, "icp");
    read(c, "eps", cfg.icp.eps, "icp");
    read(c, "min_fitness", cfg.icp.min_fitness, "icp");
  }
  read(j, "subpixel", cfg.subpixel, "config");
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string representation_hash(const PipelineConfig& cfg) {
  const json full = config_to_json(cfg);
  json rep;
  for (const char* key : {"grid", "features", "entropy_normalized", "k_neighbors", "preprocess"}) {
    rep[key] = full.at(key);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : rep.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ringloc
