#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "ringloc/cli/cli.hpp"
#include "ringloc/common/error.hpp"
#include "ringloc/common/rng.hpp"
#include "ringloc/evaluation/evaluation.hpp"
#include "ringloc/simd/kernels.hpp"
#include "ringloc/synthetic/synthetic.hpp"

namespace ringloc::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string str(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Grid3 random_grid(Rng& rng, std::size_t r, std::size_t c, std::size_t ch) {
  Grid3 g(r, c, ch);
  for (double& v : g.values()) v = rng.uniform(-1.0, 1.0);
  return g;
}

Grid3 roll(const Grid3& g, long dr, long dc) {
  Grid3 out(g.rows(), g.cols(), g.channels());
  const long R = static_cast<long>(g.rows()), C = static_cast<long>(g.cols());
  for (std::size_t ch = 0; ch < g.channels(); ++ch) {
    for (long r = 0; r < R; ++r) {
      for (long c = 0; c < C; ++c) {
        out.at(static_cast<std::size_t>(((r + dr) % R + R) % R), static_cast<std::size_t>(((c + dc) % C + C) % C), ch) =
            g.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch);
      }
    }
  }
  return out;
}

double max_rel_diff(std::span<const double> a, std::span<const double> b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / std::max(scale, 1e-300);
}

double frobenius_rel(const Grid3& a, const Grid3& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a.values()[i] - b.values()[i]) * (a.values()[i] - b.values()[i]);
    den += b.values()[i] * b.values()[i];
  }
  return std::sqrt(num / den);
}

// Sparse blobs well inside the grid, so small motions keep all support.
FeatureBEV blob_bev(Rng& rng, std::size_t size, std::size_t channels) {
  FeatureBEV bev;
  bev.config.size = size;
  bev.config.extent = 32.0;
  bev.grid = Grid3(size, size, channels);
  const double lo = 0.25 * static_cast<double>(size), hi = 0.75 * static_cast<double>(size);
  for (int b = 0; b < 14; ++b) {
    const auto r = static_cast<std::size_t>(rng.uniform(lo, hi));
    const auto c = static_cast<std::size_t>(rng.uniform(lo, hi));
    for (std::size_t ch = 0; ch < channels; ++ch) bev.grid.at(r, c, ch) += rng.uniform(0.5, 1.5);
  }
  return bev;
}

// Gaussian blobs a few cells wide; band-limited enough for sub-bin shifts.
FeatureBEV smooth_bev(Rng& rng, std::size_t size) {
  FeatureBEV bev;
  bev.config.size = size;
  bev.config.extent = 32.0;
  bev.grid = Grid3(size, size, 1);
  const double n = static_cast<double>(size);
  for (int b = 0; b < 10; ++b) {
    const double r0 = rng.uniform(0.3 * n, 0.7 * n), c0 = rng.uniform(0.3 * n, 0.7 * n), w = rng.uniform(0.5, 1.5);
    for (std::size_t r = 0; r < size; ++r) {
      for (std::size_t c = 0; c < size; ++c) {
        const double d2 = (static_cast<double>(r) - r0) * (static_cast<double>(r) - r0) +
                          (static_cast<double>(c) - c0) * (static_cast<double>(c) - c0);
        bev.grid.at(r, c, 0) += w * std::exp(-d2 / 8.0);
      }
    }
  }
  return bev;
}

PointCloud random_cloud(Rng& rng, std::size_t n) {
  PointCloud pc;
  for (std::size_t i = 0; i < n; ++i) {
    pc.points.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10), rng.normal(0.0, 2.0), 0.0F});
  }
  return pc;
}

std::vector<PointFeature> features_of(const PointCloud& pc) {
  const auto stats = neighborhood_stats(pc, knn_indices(pc, 12));
  std::vector<PointFeature> f;
  for (const auto& s : stats) f.push_back(point_features(s));
  return f;
}

double feature_diff(const std::vector<PointFeature>& a, const std::vector<PointFeature>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t c = 0; c < 6; ++c) d = std::max(d, std::abs(a[i].c[c] - b[i].c[c]));
  }
  return d;
}

ScanRepresentation rep_from_nting(const Grid3& t) {
  ScanRepresentation r;
  r.nting.data = normalize_grid(t);
  r.spectrum = theta_spectrum(r.nting.data);
  return r;
}

}  // namespace

std::vector<PropertyResult> run_selfcheck(const std::string& fault, std::uint64_t seed) {
  if (!fault.empty() && fault != kFaultShiftConvention) {
    throw Error(ErrorCode::kInvalidArgument, "unknown fault '" + fault + "'");
  }
  const bool broken_shift = fault == kFaultShiftConvention;
  // Expected correlation peaks for a forward roll by s. The injected fault
  // swaps the documented conventions.
  auto peak_1d_for_roll = [&](std::size_t s, std::size_t n) { return broken_shift ? s : (n - s) % n; };
  auto peak_2d_for_roll = [&](double sx, double sy) {
    return broken_shift ? std::pair{-sx, -sy} : std::pair{sx, sy};
  };

  std::vector<std::pair<std::string, std::function<void(Check&, Rng&)>>> props;

  props.emplace_back("fft_round_trip", [](Check& c, Rng& rng) {
    const std::size_t n = 45;
    std::vector<fft::Complex> x(n), X(n), y(n);
    for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    fft::forward(X.data(), x.data(), n);
    fft::inverse(y.data(), X.data(), n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(x[i] - y[i]));
    c.require(err < 1e-12, "round-trip error " + str(err));
  });

  props.emplace_back("corr1d_matches_oracle", [](Check& c, Rng& rng) {
    const Grid3 a = random_grid(rng, 24, 9, 3), b = random_grid(rng, 24, 9, 3);
    const double d = max_rel_diff(circular_corr(a, b), oracle_corr1d(a, b));
    c.require(d < 1e-9, "relative difference " + str(d));
  });

  props.emplace_back("corr2d_matches_oracle", [](Check& c, Rng& rng) {
    const Grid3 a = random_grid(rng, 14, 14, 2), b = random_grid(rng, 14, 14, 2);
    const double d = max_rel_diff(corr2d(a, b).values(), oracle_corr2d(a, b).values());
    c.require(d < 1e-9, "relative difference " + str(d));
  });

  props.emplace_back("corr1d_shift_convention", [&](Check& c, Rng& rng) {
    const Grid3 a = random_grid(rng, 32, 5, 2);
    const std::size_t s = 5;
    const auto p = find_peak(circular_corr(a, roll(a, static_cast<long>(s), 0)));
    c.require(p.index == peak_1d_for_roll(s, 32), "roll by 5 peaked at " + std::to_string(p.index));
  });

  props.emplace_back("corr2d_shift_convention", [&](Check& c, Rng& rng) {
    const Grid3 a = random_grid(rng, 16, 16, 1);
    const auto p = find_peak_2d(corr2d(a, roll(a, 3, -5)), false);
    const auto [ex, ey] = peak_2d_for_roll(3, -5);
    c.require(p.shift_x == ex && p.shift_y == ey,
              "roll by (3, -5) peaked at (" + str(p.shift_x) + ", " + str(p.shift_y) + ")");
  });

  props.emplace_back("radon_matches_oracle", [](Check& c, Rng& rng) {
    const FeatureBEV bev = blob_bev(rng, 24, 2);
    const double d = max_rel_diff(radon(bev).data.values(), oracle_radon(bev).data.values());
    c.require(d < 1e-9, "relative difference " + str(d));
  });

  props.emplace_back("radon_row_mass", [](Check& c, Rng& rng) {
    const FeatureBEV bev = blob_bev(rng, 32, 1);
    const Sinogram sg = radon(bev);
    double mass = 0.0;
    for (double v : bev.grid.values()) mass += v;
    for (std::size_t j = 0; j < sg.data.rows(); ++j) {
      double row = 0.0;
      for (double v : sg.data.row(j, 0)) row += v;
      c.require(std::abs(row - mass) < 1e-9 * mass, "row " + std::to_string(j) + " mass " + str(row));
    }
  });

  props.emplace_back("sinogram_rotation_shift", [&](Check& c, Rng& rng) {
    const FeatureBEV bev = blob_bev(rng, 64, 1);
    const std::size_t s = 11;
    const FeatureBEV rot = rotate_bev(bev, 2.0 * kPi * static_cast<double>(s) / 64.0);
    const auto p = find_peak(circular_corr(radon(rot).data, radon(bev).data));
    // Rotation by s bins shows up as a forward roll of the rows by s.
    const std::size_t expected = broken_shift ? (64 - s) : s;
    const long d = std::abs(static_cast<long>(p.index) - static_cast<long>(expected));
    c.require(std::min(d, 64 - d) <= 1, "rotation by 11 bins peaked at " + std::to_string(p.index));
  });

  props.emplace_back("ting_half_turn_mirror", [](Check& c, Rng& rng) {
    const Ting t = ting(radon(blob_bev(rng, 32, 2)));
    const std::size_t h = t.data.rows() / 2;
    double err = 0.0, scale = 0.0;
    for (std::size_t ch = 0; ch < t.data.channels(); ++ch) {
      for (std::size_t j = 0; j < h; ++j) {
        for (std::size_t k = 0; k < t.data.cols(); ++k) {
          err = std::max(err, std::abs(t.data.at(j, k, ch) - t.data.at(j + h, k, ch)));
          scale = std::max(scale, t.data.at(j, k, ch));
        }
      }
    }
    c.require(err <= 1e-9 * scale, "mirror mismatch " + str(err));
  });

  props.emplace_back("ting_translation_invariance", [](Check& c, Rng& rng) {
    const FeatureBEV bev = smooth_bev(rng, 64);
    FeatureBEV moved = bev;
    moved.grid = roll(bev.grid, 3, -2);
    const double d = frobenius_rel(normalize_ting(ting(radon(moved))).data, normalize_ting(ting(radon(bev))).data);
    c.require(d <= 0.05, "relative TING difference " + str(d));
  });

  props.emplace_back("normalized_autocorrelation_peak", [](Check& c, Rng& rng) {
    const Grid3 t = normalize_grid(random_grid(rng, 20, 11, 3));
    const auto p = find_peak(circular_corr(t, t));
    c.require(p.index == 0 && std::abs(p.value - 1.0) < 1e-9, "peak " + str(p.value) + " at " + std::to_string(p.index));
  });

  props.emplace_back("feature_rotation_invariance", [](Check& c, Rng& rng) {
    const PointCloud pc = random_cloud(rng, 400);
    const PointCloud rot = transform_cloud(pc, Pose3::from_xyz_yaw(0, 0, 0, rng.uniform(0, 2 * kPi)));
    const double d = feature_diff(features_of(pc), features_of(rot));
    c.require(d < 1e-6, "max feature change " + str(d));
  });

  props.emplace_back("feature_translation_invariance", [](Check& c, Rng& rng) {
    const PointCloud pc = random_cloud(rng, 400);
    const PointCloud moved = transform_cloud(pc, Pose3::from_xyz_yaw(rng.uniform(-5, 5), rng.uniform(-5, 5), 0, 0));
    const double d = feature_diff(features_of(pc), features_of(moved));
    c.require(d < 1e-9, "max feature change " + str(d));
  });

  props.emplace_back("retrieval_equivalence_two_entries", [](Check& c, Rng& rng) {
    for (int trial = 0; trial < 20 && c.ok; ++trial) {
      MapIndex index;
      for (int i = 0; i < 2; ++i) {
        IndexEntry e;
        e.id = i;
        e.rep = rep_from_nting(random_grid(rng, 16, 9, 2));
        index.entries.push_back(std::move(e));
      }
      const ScanRepresentation q = rep_from_nting(random_grid(rng, 16, 9, 2));
      const auto fast = recognize(q, index, 2, false);
      const auto exact = recognize(q, index, 2, true);
      if (fast[0].ring_score == fast[1].ring_score) continue;
      c.require(fast[0].map_id == exact[0].map_id, "argmax and exact retrieval disagree");
    }
  });

  props.emplace_back("simd_kernels_match_scalar", [](Check& c, Rng& rng) {
    const std::size_t n = 37;
    std::vector<double> a(2 * n), b(2 * n), x(n), y(n);
    for (auto* v : {&a, &b}) for (double& e : *v) e = rng.uniform(-1, 1);
    for (auto* v : {&x, &y}) for (double& e : *v) e = rng.uniform(-1, 1);
    const simd::KernelTable& ref = simd::scalar_kernels();
    for (simd::Isa isa : simd::available_isas()) {
      const simd::KernelTable* k = isa == simd::Isa::kAvx2   ? simd::avx2_kernels()
                                   : isa == simd::Isa::kNeon ? simd::neon_kernels()
                                                             : &ref;
      std::vector<double> acc1(2 * n, 0.5), acc2(2 * n, 0.5), m1(n), m2(n), p1(n), p2(n);
      ref.cmul_conj_acc(acc1.data(), a.data(), b.data(), n);
      k->cmul_conj_acc(acc2.data(), a.data(), b.data(), n);
      ref.magnitude(m1.data(), a.data(), n);
      k->magnitude(m2.data(), a.data(), n);
      ref.project(p1.data(), x.data(), y.data(), 0.6, 0.8, n);
      k->project(p2.data(), x.data(), y.data(), 0.6, 0.8, n);
      const double dd = std::abs(ref.dot(x.data(), y.data(), n) - k->dot(x.data(), y.data(), n));
      c.require(acc1 == acc2 && m1 == m2 && p1 == p2 && dd < 1e-12,
                std::string(simd::to_string(isa)) + " differs from scalar");
    }
  });

  props.emplace_back("ate_gauge_invariance", [](Check& c, Rng& rng) {
    std::vector<Pose3> gt, est, moved;
    for (int i = 0; i < 12; ++i) {
      gt.push_back(Pose3::from_xyz_yaw(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-1, 1), 0));
      est.push_back(Pose3::from_xyz_yaw(gt.back().translation.x() + rng.normal(0, 0.3),
                                        gt.back().translation.y() + rng.normal(0, 0.3), gt.back().translation.z(), 0));
    }
    const Pose3 g = Pose3::from_xyz_yaw(5, -3, 2, 1.1);
    for (const auto& p : est) moved.push_back(g * p);
    const double d = std::abs(ate(est, gt).ate_mean - ate(moved, gt).ate_mean);
    c.require(d < 1e-9, "ATE changed by " + str(d));
  });

  props.emplace_back("metrics_confusion_fixture", [](Check& c, Rng&) {
    // 6 true positives, 2 false positives, 2 missed positives.
    GtAssociation gt;
    std::vector<QueryOutcome> out;
    for (int q = 0; q < 10; ++q) {
      QueryOutcome o;
      o.query_id = q;
      o.ring_score = q < 8 ? 0.9 : 0.1;
      o.retrieved_id = q < 6 ? 1 : 2;
      gt.positives.push_back(q < 6 || q >= 8 ? std::vector<std::int64_t>{1} : std::vector<std::int64_t>{});
      out.push_back(o);
    }
    const auto r = compute_metrics(out, gt, {}, 0.5);
    const auto& p = r.pr_curve.at(0);
    c.require(p.tp == 6 && p.fp == 2 && p.fn == 2, "confusion counts wrong");
    c.require(p.precision == 0.75 && p.recall == 0.75 && p.f1 == 0.75, "precision/recall/F1 wrong");
  });

  props.emplace_back("end_to_end_pose_recovery", [](Check& c, Rng& rng) {
    SceneSpec scene;
    scene.seed = rng.next_u64();
    scene.extent = 60.0;
    scene.n_walls = 50;
    scene.n_boxes = 70;
    scene.n_posts = 140;
    SensorSpec sensor;
    sensor.range_max = 50.0;
    const PointCloud world = generate_scene(scene);
    const Pose3 map_pose = Pose3::from_xyz_yaw(0, 0, 1.8, 0.3);
    const Pose3 q_pose = Pose3::from_xyz_yaw(2.0, -1.5, 1.8, 0.3 + 2.2);
    PipelineConfig cfg;
    cfg.grid.extent = 50.0;
    cfg.icp.enabled = false;
    std::vector<ScanRecord> scans(1);
    scans[0].cloud = render_scan(world, map_pose, sensor, 1);
    scans[0].pose = map_pose;
    const MapIndex index = build_index(scans, cfg);
    const LocalizationResult r = localize(render_scan(world, q_pose, sensor, 2), index);
    const Pose3 gt = map_pose.inverse() * q_pose;
    const double re = rotation_error(r.best.relative.yaw, gt.yaw());
    const double te = std::hypot(r.best.relative.x - gt.translation.x(), r.best.relative.y - gt.translation.y());
    c.require(re <= 3.0 && te <= 1.5, "rotation error " + str(re) + " deg, translation error " + str(te) + " m");
  });

  std::vector<PropertyResult> results;
  for (std::size_t i = 0; i < props.size(); ++i) {
    Check c;
    Rng rng(mix_seed(seed, i));
    try {
      props[i].second(c, rng);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("threw: ") + e.what();
    }
    results.push_back({props[i].first, c.ok, c.detail});
  }
  return results;
}

}  // namespace ringloc::cli
