#include "ringloc/localization/localization.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "ringloc/common/error.hpp"
#include "ringloc/common/log.hpp"
#include "ringloc/common/parallel.hpp"
#include "ringloc/common/tensor_io.hpp"
#include "ringloc/features/kdtree.hpp"
#include "ringloc/scan_io/cloud_io.hpp"

namespace ringloc {

namespace {

constexpr const char* kIndexMagic = "RINGLOC-INDEX";
constexpr int kIndexVersion = 1;

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

Pose3 pose_from_matrix(const Eigen::Matrix4d& m) {
  Pose3 p;
  p.translation = m.block<3, 1>(0, 3);
  p.rotation = Eigen::Quaterniond(Eigen::Matrix3d(m.block<3, 3>(0, 0))).normalized();
  return p;
}

}  // namespace

ScanRepresentation represent(const PointCloud& cloud, const PipelineConfig& cfg, std::size_t jobs,
                             RepresentationTimings* timings) {
  Stopwatch sw;
  const FeatureBEV bev = make_bev(cloud, cfg.grid, cfg.features, jobs);
  const double t_features = sw.lap_ms();
  ScanRepresentation rep;
  rep.bev = normalize_grid(bev.grid);
  rep.nting = normalize_ting(ting(radon(bev)));
  rep.spectrum = theta_spectrum(rep.nting.data);
  if (timings) {
    timings->features_ms = t_features;
    timings->representation_ms = sw.lap_ms();
  }
  return rep;
}

MapIndex build_index(std::span<const ScanRecord> scans, const PipelineConfig& cfg, std::size_t jobs,
                     std::vector<RepresentationTimings>* timings) {
  if (scans.empty()) throw Error(ErrorCode::kEmptyIndex, "no scans to index");
  cfg.validate();
  MapIndex index;
  index.config = cfg;
  index.entries.resize(scans.size());
  if (timings) timings->assign(scans.size(), {});
  // Parallel over scans; the per-scan extractor stays single threaded.
  parallel_for(scans.size(), jobs, [&](std::size_t i) {
    try {
      IndexEntry& e = index.entries[i];
      e.id = scans[i].id;
      e.pose = scans[i].pose;
      e.rep = represent(scans[i].cloud, cfg, 1, timings ? &(*timings)[i] : nullptr);
      e.cloud = scans[i].cloud;
    } catch (const Error& err) {
      throw Error(err.code(), "scan " + std::to_string(scans[i].id) + ": " + err.what());
    }
  });
  return index;
}

void save_index(const MapIndex& index, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "entries", ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json manifest;
  manifest["magic"] = kIndexMagic;
  manifest["version"] = kIndexVersion;
  manifest["config"] = config_to_json(index.config);
  manifest["config_hash"] = representation_hash(index.config);
  manifest["entries"] = nlohmann::json::array();
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    const IndexEntry& e = index.entries[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "entries/%06zu", i);
    const std::string s(stem);
    write_tensor(dir / (s + ".nting"), TensorKind::kTing, e.rep.nting.data);
    write_tensor(dir / (s + ".bev"), TensorKind::kBev, e.rep.bev);
    save_cloud(dir / (s + ".bin"), e.cloud, CloudFormat::kBinF32);
    const auto& q = e.pose.rotation;
    manifest["entries"].push_back({{"id", e.id},
                                   {"translation", {e.pose.translation.x(), e.pose.translation.y(), e.pose.translation.z()}},
                                   {"rotation_xyzw", {q.x(), q.y(), q.z(), q.w()}},
                                   {"nting", s + ".nting"},
                                   {"bev", s + ".bev"},
                                   {"cloud", s + ".bin"}});
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + (dir / "manifest.json").string());
}

MapIndex load_index(const std::filesystem::path& dir, const PipelineConfig* expected) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "no index manifest at " + manifest_path.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kFormatError, "index manifest is not valid JSON: " + std::string(e.what()));
  }
  if (m.value("magic", "") != kIndexMagic) throw Error(ErrorCode::kFormatError, "not a ringloc index: " + dir.string());
  if (m.value("version", 0) != kIndexVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported index version " + m.value("version", nlohmann::json()).dump());
  }
  MapIndex index;
  index.config = config_from_json(m.at("config"));
  const std::string stored_hash = m.value("config_hash", "");
  if (stored_hash != representation_hash(index.config)) {
    throw Error(ErrorCode::kFormatError, "index manifest hash does not match its own config");
  }
  if (expected) {
    if (representation_hash(*expected) != stored_hash) {
      throw Error(ErrorCode::kConfigMismatch, "index was built with representation config " + stored_hash +
                                                  ", current config is " + representation_hash(*expected));
    }
    index.config = *expected;
  }
  try {
    for (const auto& je : m.at("entries")) {
      IndexEntry e;
      e.id = je.at("id").get<std::int64_t>();
      const auto t = je.at("translation");
      const auto q = je.at("rotation_xyzw");
      e.pose.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
      e.pose.rotation = Eigen::Quaterniond(q.at(3).get<double>(), q.at(0).get<double>(), q.at(1).get<double>(),
                                           q.at(2).get<double>());
      e.rep.nting.data = normalize_grid(read_tensor(dir / je.at("nting").get<std::string>(), TensorKind::kTing));
      e.rep.bev = normalize_grid(read_tensor(dir / je.at("bev").get<std::string>(), TensorKind::kBev));
      e.rep.spectrum = theta_spectrum(e.rep.nting.data);
      e.cloud = load_cloud(dir / je.at("cloud").get<std::string>(), CloudFormat::kBinF32).cloud;
      index.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, "malformed index manifest: " + std::string(e.what()));
  }
  if (index.entries.empty()) throw Error(ErrorCode::kEmptyIndex, "index at " + dir.string() + " has no entries");
  for (const auto& e : index.entries) {
    if (!e.rep.nting.data.same_shape(index.entries.front().rep.nting.data) ||
        !e.rep.bev.same_shape(index.entries.front().rep.bev)) {
      throw Error(ErrorCode::kFormatError, "index entries disagree on tensor shape");
    }
  }
  return index;
}

namespace {

std::vector<double> ring_row(const ThetaSpectrum& x, const MapIndex& index, std::size_t jobs) {
  std::vector<const ThetaSpectrum*> specs;
  for (const auto& e : index.entries) specs.push_back(&e.rep.spectrum);
  const auto maps = circular_corr_batch(x, specs, jobs);
  std::vector<double> out(maps.size());
  for (std::size_t i = 0; i < maps.size(); ++i) out[i] = find_peak(maps[i]).value;
  return out;
}

}  // namespace

std::vector<PlaceCandidate> recognize(const ScanRepresentation& query, const MapIndex& index, std::size_t top_k,
                                      bool exact_mode, std::size_t jobs) {
  if (index.entries.empty()) throw Error(ErrorCode::kEmptyIndex, "index has no entries");
  if (query.spectrum.rows != index.entries.front().rep.spectrum.rows ||
      query.spectrum.columns != index.entries.front().rep.spectrum.columns) {
    throw Error(ErrorCode::kShapeMismatch, "query representation does not match the index");
  }
  std::vector<const ThetaSpectrum*> specs;
  for (const auto& e : index.entries) specs.push_back(&e.rep.spectrum);
  const auto maps = circular_corr_batch(query.spectrum, specs, jobs);

  std::vector<PlaceCandidate> all(index.entries.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Peak1D p = find_peak(maps[i]);
    all[i] = {index.entries[i].id, i, p.value, p.index, std::nullopt};
  }

  if (exact_mode) {
    std::vector<double> nq(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) nq[i] = all[i].ring_score;
    for (std::size_t j = 0; j < all.size(); ++j) {
      const auto nj = ring_row(index.entries[j].rep.spectrum, index, jobs);
      double d2 = 0.0;
      for (std::size_t i = 0; i < nj.size(); ++i) d2 += (nq[i] - nj[i]) * (nq[i] - nj[i]);
      all[j].ring_distance = std::sqrt(d2);
    }
    std::stable_sort(all.begin(), all.end(), [](const PlaceCandidate& a, const PlaceCandidate& b) {
      if (*a.ring_distance != *b.ring_distance) return *a.ring_distance < *b.ring_distance;
      return a.map_id < b.map_id;
    });
  } else {
    std::stable_sort(all.begin(), all.end(), [](const PlaceCandidate& a, const PlaceCandidate& b) {
      if (a.ring_score != b.ring_score) return a.ring_score > b.ring_score;
      return a.map_id < b.map_id;
    });
  }
  all.resize(std::min(top_k, all.size()));
  return all;
}

RotationEstimate estimate_rotation(const ThetaSpectrum& query, const ThetaSpectrum& map) {
  const auto corr = circular_corr(map, query);
  const Peak1D p = find_peak(corr);
  RotationEstimate r;
  r.k_theta = p.index;
  r.peak_value = p.value;
  const double alpha = 2.0 * std::numbers::pi * static_cast<double>(p.index) / static_cast<double>(corr.size());
  r.hypotheses = {wrap_two_pi(alpha), wrap_two_pi(alpha + std::numbers::pi)};
  return r;
}

RotationEstimate estimate_rotation(const NormalizedTing& query, const NormalizedTing& map) {
  if (!query.data.same_shape(map.data)) throw Error(ErrorCode::kShapeMismatch, "estimate_rotation: shapes differ");
  return estimate_rotation(theta_spectrum(query.data), theta_spectrum(map.data));
}

TranslationEstimate estimate_translation(const Grid3& query_bev, const Grid3& map_bev, const GridConfig& grid,
                                         std::span<const double> hypotheses, bool subpixel) {
  if (!query_bev.same_shape(map_bev)) throw Error(ErrorCode::kShapeMismatch, "estimate_translation: shapes differ");
  if (query_bev.rows() != query_bev.cols()) throw Error(ErrorCode::kNonSquareInput, "estimate_translation: non-square BEV");
  TranslationEstimate best;
  bool have = false;
  const double res = grid.resolution();
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    const double alpha = hypotheses[h];
    const FeatureBEV rotated = rotate_bev({map_bev, grid}, -alpha);
    const Peak2D p = find_peak_2d(corr2d(query_bev, rotated.grid), subpixel);
    if (have && !(p.value > best.peak_value)) continue;
    have = true;
    // Shift in the de-rotated frame, mapped back into the map frame.
    const double vx = p.shift_x * res, vy = p.shift_y * res;
    const double c = std::cos(alpha), s = std::sin(alpha);
    best.dx = c * vx - s * vy;
    best.dy = s * vx + c * vy;
    best.peak_value = p.value;
    best.chosen_rotation = alpha;
    best.chosen_hypothesis = h;
  }
  return best;
}

IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const Pose3& init, const IcpConfig& cfg) {
  if (source.empty() || target.empty()) throw Error(ErrorCode::kEmptyCloud, "icp_refine needs two nonempty clouds");
  const KdTree3 tree(target.points);
  const double max_d2 = cfg.max_corr_dist * cfg.max_corr_dist;
  const std::size_t n = source.size();

  struct Matches {
    Eigen::Matrix3Xd src, dst;
    std::size_t count = 0;
    double sq_sum = 0.0;
  };
  auto match = [&](const Pose3& T) {
    Matches m;
    m.src.resize(3, static_cast<Eigen::Index>(n));
    m.dst.resize(3, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d s = source.points[i].xyz();
      const auto nn = tree.nearest(T.apply(s), max_d2);
      if (!nn) continue;
      const auto col = static_cast<Eigen::Index>(m.count++);
      m.src.col(col) = s;
      m.dst.col(col) = target.points[nn->index].xyz();
      m.sq_sum += nn->dist2;
    }
    m.src.conservativeResize(3, static_cast<Eigen::Index>(m.count));
    m.dst.conservativeResize(3, static_cast<Eigen::Index>(m.count));
    return m;
  };

  IcpResult r;
  r.pose = init;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Matches m = match(r.pose);
    if (m.count == 0 && it == 1) {
      throw Error(ErrorCode::kNoCorrespondences, "no source point within max_corr_dist of the target");
    }
    if (m.count < 3) break;
    const Pose3 next = pose_from_matrix(Eigen::umeyama(m.src, m.dst, false));
    const double delta = (next.translation - r.pose.translation).norm() + rotation_angle_between(next.rotation, r.pose.rotation);
    r.pose = next;
    r.iterations_used = it;
    if (delta < cfg.eps) break;
  }
  const Matches final_m = match(r.pose);
  r.fitness = static_cast<double>(final_m.count) / static_cast<double>(n);
  r.inlier_rmse = final_m.count ? std::sqrt(final_m.sq_sum / static_cast<double>(final_m.count)) : 0.0;
  return r;
}

LocalizationResult localize(const PointCloud& query, const MapIndex& index, std::size_t jobs) {
  if (index.entries.empty()) throw Error(ErrorCode::kEmptyIndex, "index has no entries");
  const PipelineConfig& cfg = index.config;
  LocalizationResult result;
  RepresentationTimings rt;
  const ScanRepresentation rep = represent(query, cfg, jobs, &rt);
  result.timings.features_ms = rt.features_ms;
  result.timings.representation_ms = rt.representation_ms;

  Stopwatch sw;
  result.candidates = recognize(rep, index, cfg.top_k, false, jobs);
  result.timings.retrieval_ms = sw.lap_ms();

  bool have = false;
  for (const PlaceCandidate& c : result.candidates) {
    const IndexEntry& e = index.entries[c.entry];
    const RotationEstimate rot = estimate_rotation(rep.spectrum, e.rep.spectrum);
    const TranslationEstimate tr = estimate_translation(rep.bev, e.rep.bev, cfg.grid, rot.hypotheses, cfg.subpixel);
    if (have && !(tr.peak_value > result.best.translation_peak)) continue;
    have = true;
    BestMatch& b = result.best;
    b.map_id = c.map_id;
    b.entry = c.entry;
    b.ring_score = c.ring_score;
    b.relative = Pose2::make(tr.dx, tr.dy, tr.chosen_rotation);
    b.rotation_peak = rot.peak_value;
    b.translation_peak = tr.peak_value;
    b.estimate = e.pose * Pose3::from_planar(b.relative);
  }
  result.timings.solving_ms = sw.lap_ms();

  result.no_match = result.best.ring_score < cfg.accept_threshold;
  if (!result.no_match && cfg.icp.enabled) {
    BestMatch& b = result.best;
    const IndexEntry& e = index.entries[b.entry];
    try {
      const IcpResult icp = icp_refine(query, e.cloud, Pose3::from_planar(b.relative), cfg.icp);
      b.refined_relative = icp.pose;
      b.refined = e.pose * icp.pose;
      b.icp_fitness = icp.fitness;
      b.icp_rmse = icp.inlier_rmse;
      b.icp_iterations = icp.iterations_used;
      b.icp_accepted = icp.fitness >= cfg.icp.min_fitness;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kNoCorrespondences) throw;
      logger()->warn("icp skipped for map {}: {}", b.map_id, err.what());
    }
  }
  result.timings.refinement_ms = sw.lap_ms();
  return result;
}

}  // namespace ringloc
