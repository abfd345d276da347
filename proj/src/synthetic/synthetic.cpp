#include "ringloc/synthetic/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include "ringloc/common/error.hpp"
#include "ringloc/common/rng.hpp"
#include "ringloc/scan_io/cloud_io.hpp"

namespace ringloc {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t count_for(double area, double density) {
  return static_cast<std::size_t>(std::llround(area * density));
}

// Vertical rectangle from `a` along unit `dir` for `length`, between z0 and z1.
void sample_panel(Rng& rng, const Eigen::Vector2d& a, const Eigen::Vector2d& dir, double length, double z0,
                  double z1, double density, std::vector<Point3>& out) {
  const std::size_t n = count_for(length * (z1 - z0), density);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.uniform(0.0, length);
    const double z = rng.uniform(z0, z1);
    const Eigen::Vector2d p = a + t * dir;
    out.push_back({p.x(), p.y(), z, 0.0F});
  }
}

std::vector<Point3> make_wall(Rng& rng, double extent, double density) {
  const Eigen::Vector2d c(rng.uniform(-extent, extent), rng.uniform(-extent, extent));
  const double len = rng.uniform(6.0, 20.0);
  const double yaw = rng.uniform(0.0, kPi);
  const double h = rng.uniform(2.5, 6.0);
  const Eigen::Vector2d dir(std::cos(yaw), std::sin(yaw));
  std::vector<Point3> pts;
  sample_panel(rng, c - 0.5 * len * dir, dir, len, 0.0, h, density, pts);
  return pts;
}

std::vector<Point3> make_box(Rng& rng, double extent, double density) {
  const Eigen::Vector2d c(rng.uniform(-extent, extent), rng.uniform(-extent, extent));
  const double sx = rng.uniform(2.0, 8.0), sy = rng.uniform(2.0, 8.0);
  const double h = rng.uniform(2.0, 6.0);
  const double yaw = rng.uniform(0.0, 0.5 * kPi);
  const Eigen::Vector2d ux(std::cos(yaw), std::sin(yaw)), uy(-std::sin(yaw), std::cos(yaw));
  const Eigen::Vector2d corner[4] = {c - 0.5 * sx * ux - 0.5 * sy * uy, c + 0.5 * sx * ux - 0.5 * sy * uy,
                                     c + 0.5 * sx * ux + 0.5 * sy * uy, c - 0.5 * sx * ux + 0.5 * sy * uy};
  std::vector<Point3> pts;
  for (int f = 0; f < 4; ++f) {
    const Eigen::Vector2d edge = corner[(f + 1) % 4] - corner[f];
    sample_panel(rng, corner[f], edge.normalized(), edge.norm(), 0.0, h, density, pts);
  }
  const std::size_t n_top = count_for(sx * sy, density);
  for (std::size_t i = 0; i < n_top; ++i) {
    const Eigen::Vector2d p = corner[0] + rng.uniform(0.0, sx) * ux + rng.uniform(0.0, sy) * uy;
    pts.push_back({p.x(), p.y(), h, 0.0F});
  }
  return pts;
}

std::vector<Point3> make_post(Rng& rng, double extent, double density) {
  const Eigen::Vector2d c(rng.uniform(-extent, extent), rng.uniform(-extent, extent));
  const double r = rng.uniform(0.15, 0.3);
  const double h = rng.uniform(3.0, 8.0);
  const std::size_t n = count_for(2.0 * kPi * r * h, density);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(0.0, 2.0 * kPi);
    pts.push_back({c.x() + r * std::cos(a), c.y() + r * std::sin(a), rng.uniform(0.0, h), 0.0F});
  }
  return pts;
}

std::vector<Point3> make_landmark(Rng& rng, double extent, double density) {
  const Eigen::Vector2d c(rng.uniform(-extent, extent), rng.uniform(-extent, extent));
  const double yaw = rng.uniform(0.0, 2.0 * kPi);
  const Eigen::Vector2d ux(std::cos(yaw), std::sin(yaw)), uy(-std::sin(yaw), std::cos(yaw));
  std::vector<Point3> pts;
  sample_panel(rng, c, ux, 15.0, 0.0, 12.0, density, pts);
  sample_panel(rng, c, uy, 8.0, 0.0, 12.0, density, pts);
  return pts;
}

bool hits_corridor(const SceneSpec& spec, const std::vector<Point3>& pts) {
  if (spec.corridor_halfwidth <= 0.0) return false;
  return std::any_of(pts.begin(), pts.end(), [&](const Point3& p) {
    return std::abs(std::hypot(p.x, p.y) - spec.corridor_radius) < spec.corridor_halfwidth;
  });
}

}  // namespace

PointCloud generate_scene(const SceneSpec& spec) {
  if (spec.n_walls < 0 || spec.n_boxes < 0 || spec.n_posts < 0 || !(spec.points_per_m2 > 0.0) ||
      !(spec.extent > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid scene spec");
  }
  Rng rng(spec.seed);
  PointCloud world;
  world.frame_id = "world";
  auto place = [&](auto&& make) {
    // Resample until the object clears the corridor; bounded so a crowded
    // spec cannot loop forever.
    for (int attempt = 0; attempt < 200; ++attempt) {
      auto pts = make(rng, spec.extent, spec.points_per_m2);
      if (!hits_corridor(spec, pts)) {
        world.points.insert(world.points.end(), pts.begin(), pts.end());
        return;
      }
    }
  };
  for (int i = 0; i < spec.n_walls; ++i) place(make_wall);
  for (int i = 0; i < spec.n_boxes; ++i) place(make_box);
  for (int i = 0; i < spec.n_posts; ++i) place(make_post);
  if (spec.landmark) place(make_landmark);
  if (spec.ground) {
    const std::size_t n = count_for(4.0 * spec.extent * spec.extent, spec.points_per_m2);
    for (std::size_t i = 0; i < n; ++i) {
      world.points.push_back({rng.uniform(-spec.extent, spec.extent), rng.uniform(-spec.extent, spec.extent), 0.0, 0.0F});
    }
  }
  return world;
}

PointCloud render_scan(const PointCloud& world, const Pose3& pose, const SensorSpec& sensor, std::uint64_t seed) {
  if (!(sensor.dropout >= 0.0 && sensor.dropout <= 1.0) || !(sensor.noise_sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid sensor spec");
  }
  Rng rng(seed);
  const Pose3 inv = pose.inverse();
  const double r2 = sensor.range_max * sensor.range_max;
  PointCloud scan;
  scan.frame_id = "sensor";
  for (const auto& p : world.points) {
    const double dx = p.x - pose.translation.x(), dy = p.y - pose.translation.y();
    if (dx * dx + dy * dy > r2) continue;
    if (sensor.dropout > 0.0 && rng.bernoulli(sensor.dropout)) continue;
    Eigen::Vector3d q = inv.apply(p.xyz());
    if (sensor.noise_sigma > 0.0) {
      q.x() += rng.normal(0.0, sensor.noise_sigma);
      q.y() += rng.normal(0.0, sensor.noise_sigma);
      q.z() += rng.normal(0.0, sensor.noise_sigma);
    }
    scan.points.push_back({q.x(), q.y(), q.z(), p.intensity});
  }
  if (scan.empty()) throw Error(ErrorCode::kEmptyScan, "no world points survive rendering");
  return scan;
}

BenchmarkSet make_benchmark(SceneSpec scene, const BenchmarkParams& params, const SensorSpec& sensor) {
  if (!(params.loop_length > 0.0 && params.place_density > 0.0 && params.query_spacing > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "benchmark spacings must be positive");
  }
  const double radius = params.loop_length / (2.0 * kPi);
  scene.corridor_radius = radius;
  scene.corridor_halfwidth = params.lateral_offset + 3.0;

  BenchmarkSet set;
  set.scene = scene;
  set.sensor = sensor;
  set.params = params;
  const PointCloud world = generate_scene(scene);

  auto loop_pose = [&](double arc, double offset, double yaw) {
    const double phi = arc / radius;
    const double r = radius + offset;
    return Pose3::from_xyz_yaw(r * std::cos(phi), r * std::sin(phi), sensor.height, yaw);
  };

  const auto n_map = static_cast<std::size_t>(std::llround(params.loop_length / params.place_density));
  for (std::size_t i = 0; i < n_map; ++i) {
    const double arc = static_cast<double>(i) * params.place_density;
    ScanRecord rec;
    rec.id = static_cast<std::int64_t>(i);
    rec.pose = loop_pose(arc, 0.0, arc / radius + 0.5 * kPi);
    rec.cloud = render_scan(world, rec.pose, sensor, mix_seed(params.seed, i));
    set.map_scans.push_back(std::move(rec));
  }
  for (std::size_t i = 0; i < n_map; ++i) {
    const Pose3& a = set.map_scans[i].pose;
    const Pose3& b = set.map_scans[(i + 1) % n_map].pose;
    set.map_rel_poses.push_back(a.inverse() * b);
  }

  Rng placement(mix_seed(params.seed, 0x5157A7ULL));
  const auto n_query = static_cast<std::size_t>(std::llround(params.loop_length / params.query_spacing));
  for (std::size_t q = 0; q < n_query; ++q) {
    const double arc = (static_cast<double>(q) + 0.5) * params.query_spacing;
    const double yaw = placement.uniform(0.0, 2.0 * kPi);
    const double offset = placement.uniform(-params.lateral_offset, params.lateral_offset);
    ScanRecord rec;
    rec.id = static_cast<std::int64_t>(q);
    rec.pose = loop_pose(arc, offset, yaw);
    rec.cloud = render_scan(world, rec.pose, sensor, mix_seed(params.seed, (1ULL << 32) + q));

    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t i = 0; i < n_map; ++i) {
      const double d = (set.map_scans[i].pose.translation - rec.pose.translation).head<2>().norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    set.nearest_map.push_back(best);
    set.gt_rel_poses.push_back(set.map_scans[best].pose.inverse() * rec.pose);
    set.query_scans.push_back(std::move(rec));
  }
  return set;
}

nlohmann::json to_json(const SceneSpec& s) {
  return {{"seed", s.seed},
          {"extent", s.extent},
          {"n_walls", s.n_walls},
          {"n_boxes", s.n_boxes},
          {"n_posts", s.n_posts},
          {"points_per_m2", s.points_per_m2},
          {"ground", s.ground},
          {"landmark", s.landmark},
          {"corridor_radius", s.corridor_radius},
          {"corridor_halfwidth", s.corridor_halfwidth}};
}

nlohmann::json to_json(const SensorSpec& s) {
  return {{"range_max", s.range_max}, {"dropout", s.dropout}, {"noise_sigma", s.noise_sigma}, {"height", s.height}};
}

nlohmann::json to_json(const BenchmarkParams& p) {
  return {{"loop_length", p.loop_length},
          {"place_density", p.place_density},
          {"query_spacing", p.query_spacing},
          {"lateral_offset", p.lateral_offset},
          {"seed", p.seed}};
}

namespace {

void reject_unknown(const nlohmann::json& j, const nlohmann::json& defaults, const char* what) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, std::string(what) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw Error(ErrorCode::kConfigError, std::string("unknown key '") + key + "' in " + what);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void from_json(const nlohmann::json& j, SceneSpec& s) {
  reject_unknown(j, to_json(SceneSpec{}), "scene");
  read(j, "seed", s.seed);
  read(j, "extent", s.extent);
  read(j, "n_walls", s.n_walls);
  read(j, "n_boxes", s.n_boxes);
  read(j, "n_posts", s.n_posts);
  read(j, "points_per_m2", s.points_per_m2);
  read(j, "ground", s.ground);
  read(j, "landmark", s.landmark);
  read(j, "corridor_radius", s.corridor_radius);
  read(j, "corridor_halfwidth", s.corridor_halfwidth);
}

void from_json(const nlohmann::json& j, SensorSpec& s) {
  reject_unknown(j, to_json(SensorSpec{}), "sensor");
  read(j, "range_max", s.range_max);
  read(j, "dropout", s.dropout);
  read(j, "noise_sigma", s.noise_sigma);
  read(j, "height", s.height);
}

void from_json(const nlohmann::json& j, BenchmarkParams& p) {
  reject_unknown(j, to_json(BenchmarkParams{}), "benchmark");
  read(j, "loop_length", p.loop_length);
  read(j, "place_density", p.place_density);
  read(j, "query_spacing", p.query_spacing);
  read(j, "lateral_offset", p.lateral_offset);
  read(j, "seed", p.seed);
}

void write_benchmark(const BenchmarkSet& set, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "map", ec);
  fs::create_directories(dir / "query", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());

  auto dump = [&](const std::vector<ScanRecord>& scans, const char* sub, const char* poses_name) {
    std::vector<std::pair<std::int64_t, Pose3>> poses;
    for (const auto& s : scans) {
      save_cloud(dir / sub / (std::to_string(s.id) + ".bin"), s.cloud, CloudFormat::kBinF32);
      poses.emplace_back(s.id, s.pose);
    }
    save_poses(dir / poses_name, poses);
  };
  dump(set.map_scans, "map", "map_poses.csv");
  dump(set.query_scans, "query", "query_poses.csv");

  nlohmann::json manifest;
  manifest["scene"] = to_json(set.scene);
  manifest["sensor"] = to_json(set.sensor);
  manifest["benchmark"] = to_json(set.params);
  manifest["rng"] = "mt19937_64; per-scan streams seeded by splitmix64(seed, stream)";
  manifest["nearest_map"] = set.nearest_map;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / "manifest.json").string());
}

Sinogram oracle_radon(const FeatureBEV& bev) {
  const std::size_t n = bev.grid.rows();
  Sinogram sg{Grid3(n, n, bev.grid.channels()), bev.config.extent};
  const double step = sg.tau_step();
  const double period = step * static_cast<double>(n);
  for (std::size_t ch = 0; ch < bev.grid.channels(); ++ch) {
    for (std::size_t j = 0; j < n; ++j) {
      const double th = sg.theta(j);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          const double v = bev.grid.at(r, c, ch);
          if (v == 0.0) continue;
          const double tau = bev.config.cell_center(r) * std::cos(th) + bev.config.cell_center(c) * std::sin(th);
          for (std::size_t k = 0; k < n; ++k) {
            double d = std::fmod(std::abs(tau - sg.tau(k)), period);
            d = std::min(d, period - d);
            if (d < step) sg.data.at(j, k, ch) += v * (1.0 - d / step);
          }
        }
      }
    }
  }
  return sg;
}

std::vector<double> oracle_corr1d(const Grid3& a, const Grid3& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "oracle_corr1d: shapes differ");
  const std::size_t n = a.rows();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t ch = 0; ch < a.channels(); ++ch) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t w = 0; w < a.cols(); ++w) out[k] += a.at((j + k) % n, w, ch) * b.at(j, w, ch);
      }
    }
  }
  return out;
}

Grid3 oracle_corr2d(const Grid3& a, const Grid3& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, "oracle_corr2d: shapes differ");
  const std::size_t rows = a.rows(), cols = a.cols();
  Grid3 out(rows, cols, 1);
  for (std::size_t kx = 0; kx < rows; ++kx) {
    for (std::size_t ky = 0; ky < cols; ++ky) {
      double sum = 0.0;
      for (std::size_t ch = 0; ch < a.channels(); ++ch) {
        for (std::size_t x = 0; x < rows; ++x) {
          for (std::size_t y = 0; y < cols; ++y) sum += a.at(x, y, ch) * b.at((x + kx) % rows, (y + ky) % cols, ch);
        }
      }
      out.at(kx, ky, 0) = sum;
    }
  }
  return out;
}

}  // namespace ringloc
