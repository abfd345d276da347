#ifndef RINGLOC_LOCALIZATION_LOCALIZATION_HPP
#define RINGLOC_LOCALIZATION_LOCALIZATION_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ringloc/localization/config.hpp"
#include "ringloc/scan_io/point_cloud.hpp"
#include "ringloc/transforms/transforms.hpp"

namespace ringloc {

/// Everything the pipeline derives from one preprocessed scan.
struct ScanRepresentation {
  Grid3 bev;  ///< normalized BEV used by the translation stage
  NormalizedTing nting;
  ThetaSpectrum spectrum;  ///< theta-axis DFT of nting
};

struct RepresentationTimings {
  double features_ms = 0.0;
  double representation_ms = 0.0;
};

ScanRepresentation represent(const PointCloud& cloud, const PipelineConfig& cfg, std::size_t jobs = 1,
                             RepresentationTimings* timings = nullptr);

struct IndexEntry {
  std::int64_t id = 0;
  Pose3 pose;
  ScanRepresentation rep;
  PointCloud cloud;  ///< kept for ICP
};

struct MapIndex {
  PipelineConfig config;
  std::vector<IndexEntry> entries;
};

/// Entries keep the input order. Per-scan failures are rethrown with the scan
/// id in the message.
MapIndex build_index(std::span<const ScanRecord> scans, const PipelineConfig& cfg, std::size_t jobs = 1,
                     std::vector<RepresentationTimings>* timings = nullptr);

/// Directory layout: manifest.json plus entries/<n>.{nting,bev,bin}.
void save_index(const MapIndex& index, const std::filesystem::path& dir);
/// Tensors are renormalized after the float32 round trip. When `expected` is
/// given, a differing representation hash throws ConfigMismatch; the query-time
/// settings of `expected` replace the stored ones.
MapIndex load_index(const std::filesystem::path& dir, const PipelineConfig* expected = nullptr);

struct PlaceCandidate {
  std::int64_t map_id = 0;
  std::size_t entry = 0;  ///< position in the index
  double ring_score = 0.0;
  std::size_t k_theta = 0;
  /// Exact mode only: Euclidean distance between full RING vectors.
  std::optional<double> ring_distance;
};

/// Argmax mode ranks entries by their correlation peak (ties: lower map id).
/// Exact mode builds the RING vector of the query and of every map entry
/// against all entries and ranks by Euclidean distance (ties: lower map id).
std::vector<PlaceCandidate> recognize(const ScanRepresentation& query, const MapIndex& index, std::size_t top_k,
                                      bool exact_mode = false, std::size_t jobs = 1);

struct RotationEstimate {
  std::array<double, 2> hypotheses{};  ///< alpha and alpha + pi, both in [0, 2*pi)
  double peak_value = 0.0;
  std::size_t k_theta = 0;
};

/// alpha is the yaw of the query frame in the map frame: a map point m and
/// the matching query point q satisfy m = R(alpha) q + d.
RotationEstimate estimate_rotation(const NormalizedTing& query, const NormalizedTing& map);
RotationEstimate estimate_rotation(const ThetaSpectrum& query, const ThetaSpectrum& map);

struct TranslationEstimate {
  double dx = 0.0;  ///< meters, map frame
  double dy = 0.0;
  double peak_value = 0.0;
  double chosen_rotation = 0.0;
  std::size_t chosen_hypothesis = 0;
};

/// For each hypothesis the map BEV is rotated by -alpha and correlated with
/// the query BEV; the best peak picks both the rotation and the shift.
TranslationEstimate estimate_translation(const Grid3& query_bev, const Grid3& map_bev, const GridConfig& grid,
                                         std::span<const double> hypotheses, bool subpixel);

struct IcpResult {
  Pose3 pose;  ///< maps source points into the target frame
  double fitness = 0.0;  ///< inlier fraction of the source
  double inlier_rmse = 0.0;
  int iterations_used = 0;
};

/// Point-to-point ICP with closed-form (Umeyama) updates. Throws
/// NoCorrespondences when nothing lies within max_corr_dist at the start.
IcpResult icp_refine(const PointCloud& source, const PointCloud& target, const Pose3& init, const IcpConfig& cfg);

struct StageTimings {
  double features_ms = 0.0;
  double representation_ms = 0.0;
  double retrieval_ms = 0.0;
  double solving_ms = 0.0;
  double refinement_ms = 0.0;
};

struct BestMatch {
  std::int64_t map_id = 0;
  std::size_t entry = 0;
  double ring_score = 0.0;
  Pose2 relative;  ///< query in map-scan frame, 3-DoF
  double rotation_peak = 0.0;
  double translation_peak = 0.0;
  Pose3 estimate;  ///< map pose composed with the 3-DoF estimate
  std::optional<Pose3> refined;  ///< absolute pose after ICP
  std::optional<Pose3> refined_relative;
  double icp_fitness = 0.0;
  double icp_rmse = 0.0;
  int icp_iterations = 0;
  bool icp_accepted = false;
};

struct LocalizationResult {
  std::vector<PlaceCandidate> candidates;  ///< retrieval order
  BestMatch best;
  bool no_match = false;
  StageTimings timings;
};

/// Runs the representation pass on the query, retrieval, rotation and
/// translation estimation for each candidate (re-ranked by translation peak),
/// then optional ICP. Throws EmptyIndex.
LocalizationResult localize(const PointCloud& query, const MapIndex& index, std::size_t jobs = 1);

}  // namespace ringloc

#endif  // RINGLOC_LOCALIZATION_LOCALIZATION_HPP
