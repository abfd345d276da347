#include "ringloc/evaluation/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "ringloc/common/error.hpp"

namespace ringloc {

GtAssociation associate(std::span<const Pose3> query_poses,
                        std::span<const std::pair<std::int64_t, Pose3>> map_poses, double revisit_threshold) {
  if (!(revisit_threshold > 0.0)) throw Error(ErrorCode::kInvalidArgument, "revisit_threshold must be positive");
  GtAssociation gt;
  gt.revisit_threshold = revisit_threshold;
  gt.positives.resize(query_poses.size());
  const double t2 = revisit_threshold * revisit_threshold;
  for (std::size_t q = 0; q < query_poses.size(); ++q) {
    for (const auto& [id, pose] : map_poses) {
      const double dx = pose.translation.x() - query_poses[q].translation.x();
      const double dy = pose.translation.y() - query_poses[q].translation.y();
      if (dx * dx + dy * dy <= t2) gt.positives[q].push_back(id);
    }
    std::sort(gt.positives[q].begin(), gt.positives[q].end());
  }
  return gt;
}

double rotation_error(double est, double gt) {
  return std::abs(wrap_pi(est - gt)) * 180.0 / std::numbers::pi;
}

std::vector<double> ThresholdSweep::values() const {
  std::vector<double> out;
  if (empty()) return out;
  const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

ThresholdSweep parse_sweep(const std::string& spec) {
  ThresholdSweep s;
  if (spec.empty()) return s;
  std::istringstream in(spec);
  char c1 = 0, c2 = 0;
  if (!(in >> s.start >> c1 >> s.stop >> c2 >> s.step) || c1 != ':' || c2 != ':' || !in.eof() ||
      !(s.step > 0.0) || s.stop < s.start) {
    throw Error(ErrorCode::kInvalidArgument, "threshold sweep must be start:stop:step with step > 0, got '" + spec + "'");
  }
  return s;
}

double quantile(std::vector<double> values, double level) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

bool retrieved_correctly(const QueryOutcome& o, const std::vector<std::int64_t>& positives) {
  return std::binary_search(positives.begin(), positives.end(), o.retrieved_id);
}

bool aligned(const QueryOutcome& o) {
  const double te = o.te_3d.value_or(o.te_2d);
  const double re = o.re_3d.value_or(o.re_1d);
  return te < 2.0 && re < 5.0;
}

PrPoint confusion(std::span<const QueryOutcome> outcomes, const GtAssociation& gt, double t, std::size_t n_positive) {
  PrPoint p;
  p.threshold = t;
  for (std::size_t q = 0; q < outcomes.size(); ++q) {
    const bool match = outcomes[q].ring_score >= t;
    const bool correct = match && retrieved_correctly(outcomes[q], gt.positives[q]);
    if (correct) {
      ++p.tp;
    } else if (match) {
      ++p.fp;
    }
  }
  p.fn = n_positive - p.tp;
  p.precision = p.tp + p.fp == 0 ? 1.0 : static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
  p.recall = n_positive == 0 ? 0.0 : static_cast<double>(p.tp) / static_cast<double>(n_positive);
  p.f1 = p.precision + p.recall == 0.0 ? 0.0 : 2.0 * p.precision * p.recall / (p.precision + p.recall);
  return p;
}

}  // namespace

MetricsReport compute_metrics(std::span<const QueryOutcome> outcomes, const GtAssociation& gt,
                              const ThresholdSweep& sweep, double operating_threshold) {
  if (outcomes.empty()) throw Error(ErrorCode::kEmptyOutcomes, "no query outcomes to evaluate");
  if (outcomes.size() != gt.positives.size()) {
    throw Error(ErrorCode::kLengthMismatch, "outcome count differs from ground-truth query count");
  }
  MetricsReport r;
  r.n_queries = outcomes.size();
  r.operating_threshold = operating_threshold;
  for (std::size_t q = 0; q < outcomes.size(); ++q) r.n_positive += gt.is_positive(q) ? 1 : 0;
  r.recall_degenerate = r.n_positive == 0;

  std::size_t top1_tp = 0, top1_success = 0;
  for (std::size_t q = 0; q < outcomes.size(); ++q) {
    const bool correct = retrieved_correctly(outcomes[q], gt.positives[q]);
    top1_tp += correct ? 1 : 0;
    top1_success += correct && aligned(outcomes[q]) ? 1 : 0;
  }
  r.recall_at_1 = r.n_positive == 0 ? 0.0 : static_cast<double>(top1_tp) / static_cast<double>(r.n_positive);
  r.success_rate_top1 = static_cast<double>(top1_success) / static_cast<double>(outcomes.size());

  std::vector<double> thresholds = sweep.values();
  if (thresholds.empty()) thresholds.push_back(operating_threshold);
  for (double t : thresholds) r.pr_curve.push_back(confusion(outcomes, gt, t, r.n_positive));

  std::vector<PrPoint> by_recall = r.pr_curve;
  std::stable_sort(by_recall.begin(), by_recall.end(),
                   [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  for (std::size_t i = 1; i < by_recall.size(); ++i) {
    r.auc += (by_recall[i].recall - by_recall[i - 1].recall) * 0.5 *
             (by_recall[i].precision + by_recall[i - 1].precision);
  }

  std::vector<double> te, re;
  std::size_t matches = 0, successes = 0;
  for (std::size_t q = 0; q < outcomes.size(); ++q) {
    const QueryOutcome& o = outcomes[q];
    if (o.ring_score < operating_threshold) continue;
    ++matches;
    if (!retrieved_correctly(o, gt.positives[q])) continue;
    te.push_back(o.te_3d.value_or(o.te_2d));
    re.push_back(o.re_3d.value_or(o.re_1d));
    successes += aligned(o) ? 1 : 0;
  }
  r.tp_at_operating = te.size();
  const double levels[3] = {0.50, 0.75, 0.95};
  for (int i = 0; i < 3; ++i) {
    r.te_quantiles[static_cast<std::size_t>(i)] = quantile(te, levels[i]);
    r.re_quantiles[static_cast<std::size_t>(i)] = quantile(re, levels[i]);
  }
  r.success_rate = matches == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(matches);
  r.success_rate_among_tp = te.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(te.size());
  return r;
}

AteResult ate(std::span<const Pose3> est, std::span<const Pose3> gt) {
  if (est.size() != gt.size()) throw Error(ErrorCode::kLengthMismatch, "trajectories differ in length");
  if (est.size() < 3) throw Error(ErrorCode::kLengthMismatch, "ATE needs at least 3 poses");
  const auto n = static_cast<Eigen::Index>(est.size());
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = est[static_cast<std::size_t>(i)].translation;
    dst.col(i) = gt[static_cast<std::size_t>(i)].translation;
  }
  AteResult r;
  const Eigen::Matrix3Xd centered = src.colwise() - src.rowwise().mean();
  const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  const auto sv = svd.singularValues();
  r.degenerate = !(sv(1) > 1e-9 * std::max(sv(0), 1e-300));

  const Eigen::Matrix4d T = Eigen::umeyama(src, dst, false);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d aligned = T.block<3, 3>(0, 0) * src.col(i) + T.block<3, 1>(0, 3);
    r.per_frame.push_back((aligned - dst.col(i)).norm());
    sum += r.per_frame.back();
  }
  r.ate_mean = sum / static_cast<double>(n);
  return r;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace {

// Numbers in metrics.json carry the same six significant digits as the CSVs.
double six(double v) { return std::stod(format_number(v)); }

nlohmann::json quantile_json(const std::array<double, 3>& q) {
  return {{"p50", six(q[0])}, {"p75", six(q[1])}, {"p95", six(q[2])}};
}

std::array<double, 3> quantile_from(const nlohmann::json& j) {
  return {j.at("p50").get<double>(), j.at("p75").get<double>(), j.at("p95").get<double>()};
}

}  // namespace

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.pr_curve) {
    curve.push_back({{"threshold", six(p.threshold)},
                     {"precision", six(p.precision)},
                     {"recall", six(p.recall)},
                     {"f1", six(p.f1)},
                     {"tp", p.tp},
                     {"fp", p.fp},
                     {"fn", p.fn}});
  }
  return {{"n_queries", r.n_queries},
          {"n_positive", r.n_positive},
          {"recall_at_1", six(r.recall_at_1)},
          {"recall_degenerate", r.recall_degenerate},
          {"pr_curve", curve},
          {"auc", six(r.auc)},
          {"operating_threshold", six(r.operating_threshold)},
          {"tp_at_operating", r.tp_at_operating},
          {"te_quantiles_m", quantile_json(r.te_quantiles)},
          {"re_quantiles_deg", quantile_json(r.re_quantiles)},
          {"success_rate", six(r.success_rate)},
          {"success_rate_among_tp", six(r.success_rate_among_tp)},
          {"success_rate_top1", six(r.success_rate_top1)}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  try {
    MetricsReport r;
    r.n_queries = j.at("n_queries").get<std::size_t>();
    r.n_positive = j.at("n_positive").get<std::size_t>();
    r.recall_at_1 = j.at("recall_at_1").get<double>();
    r.recall_degenerate = j.at("recall_degenerate").get<bool>();
    for (const auto& p : j.at("pr_curve")) {
      r.pr_curve.push_back({p.at("threshold").get<double>(), p.at("precision").get<double>(),
                            p.at("recall").get<double>(), p.at("f1").get<double>(), p.at("tp").get<std::size_t>(),
                            p.at("fp").get<std::size_t>(), p.at("fn").get<std::size_t>()});
    }
    r.auc = j.at("auc").get<double>();
    r.operating_threshold = j.at("operating_threshold").get<double>();
    r.tp_at_operating = j.at("tp_at_operating").get<std::size_t>();
    r.te_quantiles = quantile_from(j.at("te_quantiles_m"));
    r.re_quantiles = quantile_from(j.at("re_quantiles_deg"));
    r.success_rate = j.at("success_rate").get<double>();
    r.success_rate_among_tp = j.at("success_rate_among_tp").get<double>();
    r.success_rate_top1 = j.at("success_rate_top1").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("malformed metrics report: ") + e.what());
  }
}

void emit_report(const MetricsReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("metrics.json");
    f << report_to_json(r).dump(2) << "\n";
  }
  {
    auto f = open("pr_curve.csv");
    f << "threshold,precision,recall\n";
    for (const auto& p : r.pr_curve) {
      f << format_number(p.threshold) << ',' << format_number(p.precision) << ',' << format_number(p.recall) << "\n";
    }
  }
  {
    auto f = open("f1_curve.csv");
    f << "threshold,f1\n";
    for (const auto& p : r.pr_curve) f << format_number(p.threshold) << ',' << format_number(p.f1) << "\n";
    if (!f) throw Error(ErrorCode::kIoError, "failed writing reports in " + dir.string());
  }
}

}  // namespace ringloc
