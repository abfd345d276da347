#include "ringloc/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>

#include "CLI11.hpp"

#include "ringloc/common/error.hpp"
#include "ringloc/common/log.hpp"
#include "ringloc/evaluation/evaluation.hpp"
#include "ringloc/scan_io/cloud_io.hpp"
#include "ringloc/scan_io/preprocess.hpp"
#include "ringloc/synthetic/synthetic.hpp"

namespace ringloc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json pose_to_json(const Pose3& p) {
  const auto& q = p.rotation;
  return {{"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
          {"rotation_xyzw", {q.x(), q.y(), q.z(), q.w()}},
          {"yaw", p.yaw()}};
}

Pose3 pose_from_json(const nlohmann::json& j) {
  Pose3 p;
  const auto& t = j.at("translation");
  const auto& q = j.at("rotation_xyzw");
  p.translation = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
  p.rotation = Eigen::Quaterniond(q.at(3).get<double>(), q.at(0).get<double>(), q.at(1).get<double>(),
                                  q.at(2).get<double>());
  return p;
}

namespace {

json optional_pose(const std::optional<Pose3>& p) { return p ? pose_to_json(*p) : json(nullptr); }

}  // namespace

nlohmann::json result_to_json(const LocalizationResult& r, std::optional<std::int64_t> query_id,
                              const std::string& query_path, const std::string& index_dir) {
  json candidates = json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back(
        {{"map_id", c.map_id}, {"entry", c.entry}, {"ring_score", c.ring_score}, {"k_theta", c.k_theta}});
  }
  const BestMatch& b = r.best;
  return {{"query_id", query_id ? json(*query_id) : json(nullptr)},
          {"query_path", query_path},
          {"index_dir", index_dir},
          {"no_match", r.no_match},
          {"candidates", candidates},
          {"best",
           {{"map_id", b.map_id},
            {"entry", b.entry},
            {"ring_score", b.ring_score},
            {"relative", {{"x", b.relative.x}, {"y", b.relative.y}, {"yaw", b.relative.yaw}}},
            {"rotation_peak", b.rotation_peak},
            {"translation_peak", b.translation_peak},
            {"estimate", pose_to_json(b.estimate)},
            {"refined", optional_pose(b.refined)},
            {"refined_relative", optional_pose(b.refined_relative)},
            {"icp_fitness", b.icp_fitness},
            {"icp_rmse", b.icp_rmse},
            {"icp_iterations", b.icp_iterations},
            {"icp_accepted", b.icp_accepted}}},
          {"timings_ms",
           {{"features", r.timings.features_ms},
            {"representation", r.timings.representation_ms},
            {"retrieval", r.timings.retrieval_ms},
            {"solving", r.timings.solving_ms},
            {"refinement", r.timings.refinement_ms}}}};
}

namespace {

// Round-trip precision for every printed double.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pose_line(const Pose3& p) {
  const auto& q = p.rotation;
  return num(p.translation.x()) + " " + num(p.translation.y()) + " " + num(p.translation.z()) + " | " + num(q.x()) +
         " " + num(q.y()) + " " + num(q.z()) + " " + num(q.w());
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

bool usage_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::kFileNotFound:
    case ErrorCode::kConfigError:
    case ErrorCode::kConfigMismatch:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kNonUnitQuaternion:
      return true;
    default:
      return false;
  }
}

struct Globals {
  std::string config_path;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;
};

PipelineConfig resolve_config(const Globals& g) {
  return g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
}

std::optional<std::int64_t> id_from_stem(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const long long v = std::stoll(stem, &used);
    if (used == stem.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

bool is_cloud_file(const fs::path& p) {
  const std::string ext = p.extension().string();
  return ext == ".bin" || ext == ".pcd" || ext == ".xyz" || ext == ".txt";
}

int cmd_build_map(const Globals& g, const std::string& scans_dir, const std::string& poses_file,
                  const std::string& out_dir, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(g);
  if (!fs::is_regular_file(poses_file)) throw Error(ErrorCode::kFileNotFound, "poses file not found: " + poses_file);
  if (!fs::is_directory(scans_dir)) throw Error(ErrorCode::kFileNotFound, "scans directory not found: " + scans_dir);
  const auto poses = load_poses(poses_file);

  std::map<std::int64_t, fs::path> files;
  for (const auto& de : fs::directory_iterator(scans_dir)) {
    if (!de.is_regular_file() || !is_cloud_file(de.path())) continue;
    if (const auto id = id_from_stem(de.path())) {
      if (!files.emplace(*id, de.path()).second) {
        throw Error(ErrorCode::kInvalidArgument, "two scan files share id " + std::to_string(*id));
      }
    }
  }
  std::vector<ScanRecord> scans;
  scans.reserve(poses.size());
  for (const auto& [id, pose] : poses) {
    const auto it = files.find(id);
    if (it == files.end()) {
      throw Error(ErrorCode::kFileNotFound, "no scan file for pose id " + std::to_string(id) + " in " + scans_dir);
    }
    ScanRecord rec;
    rec.id = id;
    rec.pose = pose;
    try {
      rec.cloud = preprocess(load_cloud(it->second).cloud, cfg.preprocess);
    } catch (const Error& e) {
      throw Error(e.code(), "scan " + std::to_string(id) + ": " + e.what());
    }
    scans.push_back(std::move(rec));
  }
  if (files.size() > poses.size()) {
    logger()->warn("{} scan files have no pose and were skipped", files.size() - poses.size());
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<RepresentationTimings> timings;
  const MapIndex index = build_index(scans, cfg, g.jobs, &timings);
  const double build_ms = elapsed_ms(t0);
  save_index(index, out_dir);

  double feat = 0.0, rep = 0.0;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    out << "scan " << scans[i].id << " points " << scans[i].cloud.size() << " features_ms "
        << num(timings[i].features_ms) << " representation_ms " << num(timings[i].representation_ms) << "\n";
    feat += timings[i].features_ms;
    rep += timings[i].representation_ms;
  }
  const double n = static_cast<double>(scans.size());
  out << "indexed " << scans.size() << " scans into " << out_dir << " in " << num(build_ms) << " ms"
      << " (mean features_ms " << num(feat / n) << ", mean representation_ms " << num(rep / n) << ")\n";
  return kExitOk;
}

int cmd_localize(const Globals& g, const std::string& query_path, const std::string& index_dir,
                 std::optional<std::size_t> top_k, std::optional<std::int64_t> query_id, const std::string& json_path,
                 std::ostream& out) {
  MapIndex index;
  if (g.config_path.empty()) {
    index = load_index(index_dir);
  } else {
    const PipelineConfig cfg = load_config(g.config_path);
    index = load_index(index_dir, &cfg);
  }
  if (top_k) {
    if (*top_k < 1) throw Error(ErrorCode::kInvalidArgument, "--top-k must be >= 1");
    index.config.top_k = *top_k;
  }
  const PointCloud query = preprocess(load_cloud(query_path).cloud, index.config.preprocess);
  const LocalizationResult r = localize(query, index, g.jobs);
  if (!query_id) query_id = id_from_stem(query_path);

  out << "query " << query_path << "\n";
  out << "candidates\n";
  for (std::size_t i = 0; i < r.candidates.size(); ++i) {
    const auto& c = r.candidates[i];
    out << "  " << i + 1 << " map " << c.map_id << " ring_score " << num(c.ring_score) << " k_theta " << c.k_theta
        << "\n";
  }
  const BestMatch& b = r.best;
  out << "best map " << b.map_id << " ring_score " << num(b.ring_score) << " rotation_peak " << num(b.rotation_peak)
      << " translation_peak " << num(b.translation_peak) << "\n";
  out << "relative x " << num(b.relative.x) << " y " << num(b.relative.y) << " yaw " << num(b.relative.yaw) << "\n";
  out << "estimate " << pose_line(b.estimate) << "\n";
  if (b.refined) {
    out << "refined " << pose_line(*b.refined) << "\n";
    out << "icp fitness " << num(b.icp_fitness) << " rmse " << num(b.icp_rmse) << " iterations " << b.icp_iterations
        << (b.icp_accepted ? " accepted" : " rejected") << "\n";
  }
  out << "timings_ms features " << num(r.timings.features_ms) << " representation "
      << num(r.timings.representation_ms) << " retrieval " << num(r.timings.retrieval_ms) << " solving "
      << num(r.timings.solving_ms) << " refinement " << num(r.timings.refinement_ms) << "\n";

  if (!json_path.empty()) {
    const std::string text = result_to_json(r, query_id, query_path, fs::absolute(index_dir).string()).dump(2);
    if (json_path == "-") {
      out << text << "\n";
    } else {
      std::ofstream f(json_path);
      f << text << "\n";
      if (!f) throw Error(ErrorCode::kIoError, "cannot write " + json_path);
    }
  }
  if (r.no_match) {
    out << "no_match: best ring_score " << num(b.ring_score) << " below accept_threshold "
        << num(index.config.accept_threshold) << "\n";
    return kExitNoMatch;
  }
  return kExitOk;
}

std::vector<std::pair<std::int64_t, Pose3>> map_poses_from_index(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCode::kFileNotFound, "no index manifest at " + (dir / "manifest.json").string());
  const json m = json::parse(in);
  std::vector<std::pair<std::int64_t, Pose3>> poses;
  for (const auto& e : m.at("entries")) poses.emplace_back(e.at("id").get<std::int64_t>(), pose_from_json(e));
  return poses;
}

int cmd_eval(const Globals& g, const std::string& results_dir, const std::string& gt_file,
             const std::string& out_dir, const std::string& thresholds, const std::string& map_poses_file,
             double revisit, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(g);
  const ThresholdSweep sweep = parse_sweep(thresholds);
  if (!fs::is_directory(results_dir)) throw Error(ErrorCode::kFileNotFound, "results directory not found: " + results_dir);
  if (!fs::is_regular_file(gt_file)) throw Error(ErrorCode::kFileNotFound, "ground-truth poses not found: " + gt_file);
  std::map<std::int64_t, Pose3> gt;
  for (const auto& [id, p] : load_poses(gt_file)) gt[id] = p;

  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(results_dir)) {
    if (de.is_regular_file() && de.path().extension() == ".json") files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());

  struct Row {
    std::int64_t query_id;
    json j;
  };
  std::vector<Row> rows;
  std::string index_dir;
  for (const auto& f : files) {
    std::ifstream in(f);
    json j;
    try {
      j = json::parse(in);
      if (!j.at("query_id").is_number_integer()) throw Error(ErrorCode::kFormatError, "query_id missing");
      rows.push_back({j.at("query_id").get<std::int64_t>(), j});
      if (index_dir.empty()) index_dir = j.at("index_dir").get<std::string>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kFormatError, "result " + f.string() + " does not match the localize schema: " + e.what());
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.query_id < b.query_id; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].query_id == rows[i - 1].query_id) {
      throw Error(ErrorCode::kFormatError, "duplicate result for query " + std::to_string(rows[i].query_id));
    }
  }

  const auto map_list = map_poses_file.empty() ? map_poses_from_index(index_dir) : load_poses(map_poses_file);
  std::map<std::int64_t, Pose3> maps(map_list.begin(), map_list.end());

  std::vector<QueryOutcome> outcomes;
  std::vector<Pose3> query_poses;
  for (const Row& row : rows) {
    const auto gq = gt.find(row.query_id);
    if (gq == gt.end()) {
      throw Error(ErrorCode::kFormatError, "no ground-truth pose for query " + std::to_string(row.query_id));
    }
    try {
      const json& b = row.j.at("best");
      QueryOutcome o;
      o.query_id = row.query_id;
      o.retrieved_id = b.at("map_id").get<std::int64_t>();
      o.ring_score = b.at("ring_score").get<double>();
      const auto gm = maps.find(o.retrieved_id);
      if (gm == maps.end()) {
        throw Error(ErrorCode::kFormatError, "unknown map id " + std::to_string(o.retrieved_id));
      }
      const Pose3 rel = gm->second.inverse() * gq->second;
      const json& est = b.at("relative");
      o.te_2d = std::hypot(est.at("x").get<double>() - rel.translation.x(),
                           est.at("y").get<double>() - rel.translation.y());
      o.re_1d = rotation_error(est.at("yaw").get<double>(), rel.yaw());
      if (!b.at("refined").is_null()) {
        const Pose3 refined = pose_from_json(b.at("refined"));
        o.te_3d = (refined.translation - gq->second.translation).norm();
        o.re_3d = rotation_angle_between(refined.rotation, gq->second.rotation) * 180.0 / std::numbers::pi;
      }
      outcomes.push_back(o);
      query_poses.push_back(gq->second);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormatError, "result for query " + std::to_string(row.query_id) +
                                               " does not match the localize schema: " + e.what());
    }
  }
  const GtAssociation assoc = associate(query_poses, map_list, revisit);
  const MetricsReport report = compute_metrics(outcomes, assoc, sweep, cfg.accept_threshold);
  emit_report(report, out_dir);
  out << "queries " << report.n_queries << " positives " << report.n_positive << "\n";
  out << "recall_at_1 " << format_number(report.recall_at_1) << (report.recall_degenerate ? " (degenerate)" : "")
      << "\n";
  out << "auc " << format_number(report.auc) << " success_rate " << format_number(report.success_rate)
      << " at threshold " << format_number(report.operating_threshold) << "\n";
  out << "reports written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_synth(const Globals& g, const std::string& spec_file, const std::string& out_dir, std::ostream& out) {
  SceneSpec scene;
  SensorSpec sensor;
  BenchmarkParams params;
  if (!spec_file.empty()) {
    std::ifstream in(spec_file);
    if (!in) throw Error(ErrorCode::kFileNotFound, "spec file not found: " + spec_file);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kConfigError, "spec file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw Error(ErrorCode::kConfigError, "spec file must hold an object");
    for (const auto& [key, value] : j.items()) {
      if (key == "scene") {
        from_json(value, scene);
      } else if (key == "sensor") {
        from_json(value, sensor);
      } else if (key == "benchmark") {
        from_json(value, params);
      } else {
        throw Error(ErrorCode::kConfigError, "unknown key '" + key + "' in spec file");
      }
    }
  }
  if (g.seed) {
    scene.seed = *g.seed;
    params.seed = *g.seed;
  }
  const BenchmarkSet set = make_benchmark(scene, params, sensor);
  write_benchmark(set, out_dir);
  out << "wrote " << set.map_scans.size() << " map scans and " << set.query_scans.size() << " queries to " << out_dir
      << "\n";
  return kExitOk;
}

int cmd_selfcheck(const Globals& g, const std::string& fault, std::ostream& out) {
  const auto results = run_selfcheck(fault, g.seed.value_or(1));
  std::size_t failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) out << ": " << r.detail;
    out << "\n";
    failed += r.passed ? 0 : 1;
  }
  out << results.size() - failed << "/" << results.size() << " properties passed\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Global LiDAR localization against a sparse scan map"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "pipeline config (JSON)");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));
  auto* seed_opt = app.add_option("--seed", seed, "seed for synth and selfcheck");

  std::string scans_dir, poses_file, out_dir;
  auto* build = app.add_subcommand("build-map", "index a directory of scans");
  build->add_option("scans_dir", scans_dir)->required();
  build->add_option("poses_file", poses_file)->required();
  build->add_option("out_dir", out_dir)->required();

  std::string query_path, index_dir, json_path;
  std::size_t top_k = 0;
  std::int64_t query_id = 0;
  auto* loc = app.add_subcommand("localize", "localize one scan against an index");
  loc->add_option("query", query_path)->required();
  loc->add_option("index_dir", index_dir)->required();
  auto* top_k_opt = loc->add_option("--top-k", top_k, "candidates to verify");
  auto* qid_opt = loc->add_option("--query-id", query_id, "id recorded in the JSON (default: file stem)");
  loc->add_option("--json", json_path, "write the result as JSON ('-' for stdout)");

  std::string results_dir, gt_file, eval_out, thresholds = "0:1:0.05", map_poses_file;
  double revisit = 10.0;
  auto* ev = app.add_subcommand("eval", "metrics over a directory of localize JSON results");
  ev->add_option("results_dir", results_dir)->required();
  ev->add_option("gt_poses", gt_file)->required();
  ev->add_option("out_dir", eval_out)->required();
  ev->add_option("--thresholds", thresholds, "start:stop:step")->capture_default_str();
  ev->add_option("--map-poses", map_poses_file, "map poses (default: read from the index in the results)");
  ev->add_option("--revisit", revisit, "positive-pair distance in meters")->capture_default_str();

  std::string spec_file, synth_out;
  auto* syn = app.add_subcommand("synth", "write a synthetic benchmark");
  syn->add_option("--spec", spec_file, "JSON with optional scene, sensor, benchmark objects");
  syn->add_option("--out", synth_out)->required();

  std::string fault;
  auto* self = app.add_subcommand("selfcheck", "run the invariant suite");
  self->add_option("--inject-fault", fault, "deliberately break a convention")->check(CLI::IsMember({kFaultShiftConvention}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*build) return cmd_build_map(g, scans_dir, poses_file, out_dir, out);
    if (*loc) {
      return cmd_localize(g, query_path, index_dir, *top_k_opt ? std::optional(top_k) : std::nullopt,
                          *qid_opt ? std::optional(query_id) : std::nullopt, json_path, out);
    }
    if (*ev) return cmd_eval(g, results_dir, gt_file, eval_out, thresholds, map_poses_file, revisit, out);
    if (*syn) return cmd_synth(g, spec_file, synth_out, out);
    if (*self) return cmd_selfcheck(g, fault, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::kFormatError && *ev) return kExitUsage;
    return usage_error(e.code()) ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ringloc::cli
