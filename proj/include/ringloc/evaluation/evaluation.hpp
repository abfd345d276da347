#ifndef RINGLOC_EVALUATION_EVALUATION_HPP
#define RINGLOC_EVALUATION_EVALUATION_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ringloc/scan_io/pose.hpp"

namespace ringloc {

struct GtAssociation {
  double revisit_threshold = 10.0;
  /// Per query, ids of map scans within the threshold (planar, inclusive), ascending.
  std::vector<std::vector<std::int64_t>> positives;

  bool is_positive(std::size_t q) const { return !positives[q].empty(); }
};

GtAssociation associate(std::span<const Pose3> query_poses,
                        std::span<const std::pair<std::int64_t, Pose3>> map_poses, double revisit_threshold = 10.0);

/// |est - gt| wrapped into [0, 180] degrees.
double rotation_error(double est, double gt);

struct QueryOutcome {
  std::int64_t query_id = 0;
  std::int64_t retrieved_id = 0;
  double ring_score = 0.0;
  double te_2d = 0.0;  ///< meters, 3-DoF estimate
  double re_1d = 0.0;  ///< degrees, yaw only
  std::optional<double> te_3d;  ///< after ICP
  std::optional<double> re_3d;
};

/// Inclusive arithmetic sweep "start:stop:step".
struct ThresholdSweep {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  bool empty() const { return step <= 0.0; }
  std::vector<double> values() const;
};

/// Parses "start:stop:step"; an empty string gives an empty sweep.
ThresholdSweep parse_sweep(const std::string& spec);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct MetricsReport {
  std::size_t n_queries = 0;
  std::size_t n_positive = 0;
  double recall_at_1 = 0.0;
  /// Set when no query has a positive; recall values are then reported as 0.
  bool recall_degenerate = false;
  std::vector<PrPoint> pr_curve;
  double auc = 0.0;
  double operating_threshold = 0.0;
  std::size_t tp_at_operating = 0;
  /// Levels 50, 75, 95 % over true positives at the operating threshold.
  std::array<double, 3> te_quantiles{};
  std::array<double, 3> re_quantiles{};
  /// successes / (TP + FP) at the operating threshold; a success is a true
  /// positive with TE < 2 m and RE < 5 deg (post-ICP errors when present).
  double success_rate = 0.0;
  double success_rate_among_tp = 0.0;
  /// Same criterion over every top-1 retrieval, ignoring the threshold.
  double success_rate_top1 = 0.0;
};

/// Outcomes are matched to gt by position (outcome i is query i). An empty
/// sweep yields a single row at the operating threshold. Throws EmptyOutcomes
/// and LengthMismatch.
MetricsReport compute_metrics(std::span<const QueryOutcome> outcomes, const GtAssociation& gt,
                              const ThresholdSweep& sweep, double operating_threshold);

/// Linear interpolation between order statistics (type 7). Empty input gives 0.
double quantile(std::vector<double> values, double level);

struct AteResult {
  double ate_mean = 0.0;
  std::vector<double> per_frame;
  bool degenerate = false;  ///< positions (nearly) collinear: alignment not unique
};

/// Rigid least-squares alignment of estimated to ground-truth positions (no
/// scale), then per-frame translational residuals. Throws LengthMismatch.
AteResult ate(std::span<const Pose3> est, std::span<const Pose3> gt);

/// Six significant digits; integral values keep a trailing ".0".
std::string format_number(double v);

nlohmann::json report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const nlohmann::json& j);

/// metrics.json, pr_curve.csv ("threshold,precision,recall") and
/// f1_curve.csv ("threshold,f1"). Throws IoError.
void emit_report(const MetricsReport& r, const std::filesystem::path& dir);

}  // namespace ringloc

#endif  // RINGLOC_EVALUATION_EVALUATION_HPP
