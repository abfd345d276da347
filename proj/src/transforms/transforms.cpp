#include "ringloc/transforms/transforms.hpp"

#include <algorithm>
#include <string>

#include "ringloc/common/error.hpp"
#include "ringloc/common/parallel.hpp"
#include "ringloc/simd/kernels.hpp"

namespace ringloc {

namespace {

void require_square(const Grid3& g, const char* what) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw Error(ErrorCode::kNonSquareInput, std::string(what) + " needs a square grid, got " +
                                                std::to_string(g.rows()) + "x" + std::to_string(g.cols()));
  }
}

void require_same_shape(const Grid3& a, const Grid3& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::kShapeMismatch, std::string(what) + ": operand shapes differ");
}

std::size_t wrap_index(long long i, std::size_t n) {
  const auto m = static_cast<long long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace

Sinogram radon(const FeatureBEV& bev) {
  const Grid3& img = bev.grid;
  require_square(img, "radon");
  const std::size_t n = img.rows();
  const std::size_t nch = img.channels();

  // Cells that are nonzero in any channel, as metric centers.
  std::vector<double> xs, ys;
  std::vector<std::size_t> cells;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      bool any = false;
      for (std::size_t ch = 0; ch < nch && !any; ++ch) any = img.at(r, c, ch) != 0.0;
      if (!any) continue;
      xs.push_back(bev.config.cell_center(r));
      ys.push_back(bev.config.cell_center(c));
      cells.push_back(r * n + c);
    }
  }

  Sinogram sg{Grid3(n, n, nch), bev.config.extent};
  const double tau0 = sg.tau(0);
  const double inv_step = 1.0 / sg.tau_step();
  const auto& k = simd::kernels();
  const std::size_t half = n / 2;
  std::vector<double> proj(xs.size());
  for (std::size_t j = 0; j < n; ++j) {
    double cs, sn;
    if (j < half || n % 2 != 0) {
      cs = std::cos(sg.theta(j));
      sn = std::sin(sg.theta(j));
    } else {
      cs = -std::cos(sg.theta(j - half));
      sn = -std::sin(sg.theta(j - half));
    }
    k.project(proj.data(), xs.data(), ys.data(), cs, sn, xs.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double pos = (proj[i] - tau0) * inv_step;
      const double fl = std::floor(pos);
      const double w = pos - fl;
      const std::size_t k0 = wrap_index(static_cast<long long>(fl), n);
      const std::size_t k1 = k0 + 1 == n ? 0 : k0 + 1;
      for (std::size_t ch = 0; ch < nch; ++ch) {
        const double v = img.channel(ch)[cells[i]];
        if (v == 0.0) continue;
        auto row = sg.data.row(j, ch);
        row[k0] += v * (1.0 - w);
        row[k1] += v * w;
      }
    }
  }
  return sg;
}

FeatureBEV rotate_bev(const FeatureBEV& bev, double angle) {
  const Grid3& src = bev.grid;
  require_square(src, "rotate_bev");
  if (angle == 0.0) return bev;
  const std::size_t n = src.rows();
  const double center = 0.5 * static_cast<double>(n - 1);
  const double cs = std::cos(angle), sn = std::sin(angle);
  FeatureBEV out{Grid3(n, n, src.channels()), bev.config};
  const auto limit = static_cast<long long>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      // Pull from the inverse-rotated position, in index units.
      const double u = static_cast<double>(r) - center;
      const double v = static_cast<double>(c) - center;
      const double sr = cs * u + sn * v + center;
      const double sc = -sn * u + cs * v + center;
      const double fr = std::floor(sr), fc = std::floor(sc);
      const double wr = sr - fr, wc = sc - fc;
      const auto r0 = static_cast<long long>(fr), c0 = static_cast<long long>(fc);
      if (r0 < -1 || c0 < -1 || r0 >= limit || c0 >= limit) continue;
      const double weights[4] = {(1 - wr) * (1 - wc), (1 - wr) * wc, wr * (1 - wc), wr * wc};
      const long long rr[4] = {r0, r0, r0 + 1, r0 + 1};
      const long long cc[4] = {c0, c0 + 1, c0, c0 + 1};
      for (std::size_t ch = 0; ch < src.channels(); ++ch) {
        double acc = 0.0;
        for (int t = 0; t < 4; ++t) {
          if (rr[t] < 0 || cc[t] < 0 || rr[t] >= limit || cc[t] >= limit || weights[t] == 0.0) continue;
          acc += weights[t] * src.at(static_cast<std::size_t>(rr[t]), static_cast<std::size_t>(cc[t]), ch);
        }
        out.grid.at(r, c, ch) = acc;
      }
    }
  }
  return out;
}

double sinogram_shift_property_check(const FeatureBEV& bev, int alpha_bin) {
  require_square(bev.grid, "sinogram_shift_property_check");
  const std::size_t n = bev.grid.rows();
  const double alpha = 2.0 * std::numbers::pi * static_cast<double>(alpha_bin) / static_cast<double>(n);
  const Sinogram base = radon(bev);
  const Sinogram rot = radon(alpha_bin == 0 ? bev : rotate_bev(bev, alpha));
  double worst = 0.0;
  for (std::size_t ch = 0; ch < bev.grid.channels(); ++ch) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t src = wrap_index(static_cast<long long>(j) - alpha_bin, n);
      for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(base.tau(k)) > base.extent) continue;
        worst = std::max(worst, std::abs(rot.data.at(j, k, ch) - base.data.at(src, k, ch)));
      }
    }
  }
  return worst;
}

Ting ting(const Sinogram& sg) {
  const std::size_t rows = sg.data.rows(), n = sg.data.cols();
  const std::size_t nw = n / 2 + 1;
  Ting out{Grid3(rows, nw, sg.data.channels())};
  std::vector<fft::Complex> in(n), spec(n);
  const auto& k = simd::kernels();
  for (std::size_t ch = 0; ch < sg.data.channels(); ++ch) {
    for (std::size_t j = 0; j < rows; ++j) {
      const auto row = sg.data.row(j, ch);
      for (std::size_t t = 0; t < n; ++t) in[t] = {row[t], 0.0};
      fft::forward(spec.data(), in.data(), n);
      k.magnitude(out.data.row(j, ch).data(), reinterpret_cast<const double*>(spec.data()), nw);
    }
  }
  return out;
}

Grid3 normalize_grid(const Grid3& g) {
  if (g.empty()) throw Error(ErrorCode::kDegenerateConstantInput, "cannot normalize an empty array");
  double mean = 0.0;
  for (double v : g.values()) mean += v;
  mean /= static_cast<double>(g.size());
  Grid3 out = g;
  for (double& v : out.values()) v -= mean;
  const auto vals = out.values();
  const double norm = std::sqrt(simd::kernels().dot(vals.data(), vals.data(), vals.size()));
  const double scale = std::max(std::abs(mean) * std::sqrt(static_cast<double>(g.size())), 1e-300);
  if (!(norm > 1e-12 * scale)) {
    throw Error(ErrorCode::kDegenerateConstantInput, "array is constant and has no normalized form");
  }
  for (double& v : out.values()) v /= norm;
  return out;
}

ThetaSpectrum theta_spectrum(const Grid3& g) {
  ThetaSpectrum s;
  s.rows = g.rows();
  s.columns = g.cols() * g.channels();
  s.data.resize(s.rows * s.columns);
  std::vector<fft::Complex> col(s.rows);
  for (std::size_t ch = 0; ch < g.channels(); ++ch) {
    for (std::size_t w = 0; w < g.cols(); ++w) {
      for (std::size_t j = 0; j < s.rows; ++j) col[j] = {g.at(j, w, ch), 0.0};
      fft::forward(s.data.data() + (ch * g.cols() + w) * s.rows, col.data(), s.rows);
    }
  }
  return s;
}

std::vector<double> circular_corr(const ThetaSpectrum& a, const ThetaSpectrum& b) {
  if (a.rows != b.rows || a.columns != b.columns) {
    throw Error(ErrorCode::kShapeMismatch, "circular_corr: operand shapes differ");
  }
  const std::size_t n = a.rows;
  std::vector<fft::Complex> acc(n), out(n);
  const auto& k = simd::kernels();
  auto* accp = reinterpret_cast<double*>(acc.data());
  for (std::size_t c = 0; c < a.columns; ++c) {
    k.cmul_conj_acc(accp, reinterpret_cast<const double*>(a.data.data() + c * n),
                    reinterpret_cast<const double*>(b.data.data() + c * n), n);
  }
  fft::inverse(out.data(), acc.data(), n);
  std::vector<double> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = out[i].real();
  return result;
}

std::vector<double> circular_corr(const Grid3& a, const Grid3& b) {
  require_same_shape(a, b, "circular_corr");
  return circular_corr(theta_spectrum(a), theta_spectrum(b));
}

std::vector<std::vector<double>> circular_corr_batch(const ThetaSpectrum& query,
                                                     std::span<const ThetaSpectrum* const> entries,
                                                     std::size_t jobs) {
  std::vector<std::vector<double>> out(entries.size());
  parallel_for(entries.size(), jobs, [&](std::size_t i) { out[i] = circular_corr(*entries[i], query); });
  return out;
}

Grid3 corr2d(const Grid3& a, const Grid3& b) {
  require_same_shape(a, b, "corr2d");
  const std::size_t rows = a.rows(), cols = a.cols(), n = rows * cols;
  std::vector<fft::Complex> acc(n), fa(n), fb(n);
  const auto& k = simd::kernels();
  for (std::size_t ch = 0; ch < a.channels(); ++ch) {
    const auto ca = a.channel(ch), cb = b.channel(ch);
    for (std::size_t i = 0; i < n; ++i) {
      fa[i] = {ca[i], 0.0};
      fb[i] = {cb[i], 0.0};
    }
    fft::forward_2d(fa, rows, cols);
    fft::forward_2d(fb, rows, cols);
    k.cmul_conj_acc(reinterpret_cast<double*>(acc.data()), reinterpret_cast<const double*>(fb.data()),
                    reinterpret_cast<const double*>(fa.data()), n);
  }
  fft::inverse_2d(acc, rows, cols);
  Grid3 out(rows, cols, 1);
  auto dst = out.channel(0);
  for (std::size_t i = 0; i < n; ++i) dst[i] = acc[i].real();
  return out;
}

Peak1D find_peak(std::span<const double> values) {
  Peak1D p;
  if (values.empty()) return p;
  p.value = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > p.value) {
      p.value = values[i];
      p.index = i;
    }
  }
  return p;
}

namespace {

double parabolic_offset(double left, double mid, double right) {
  const double denom = left - 2.0 * mid + right;
  if (!(denom < 0.0)) return 0.0;
  const double d = 0.5 * (left - right) / denom;
  return std::clamp(d, -0.5, 0.5);
}

double signed_shift(std::size_t i, std::size_t n) {
  return i > n / 2 ? static_cast<double>(i) - static_cast<double>(n) : static_cast<double>(i);
}

}  // namespace

Peak2D find_peak_2d(const Grid3& corr, bool subpixel) {
  const std::size_t rows = corr.rows(), cols = corr.cols();
  const auto flat = find_peak(corr.channel(0));
  Peak2D p;
  p.row = flat.index / cols;
  p.col = flat.index % cols;
  p.value = flat.value;
  p.shift_x = signed_shift(p.row, rows);
  p.shift_y = signed_shift(p.col, cols);
  if (subpixel && rows >= 3 && cols >= 3) {
    const std::size_t up = p.row == 0 ? rows - 1 : p.row - 1, down = p.row + 1 == rows ? 0 : p.row + 1;
    const std::size_t lf = p.col == 0 ? cols - 1 : p.col - 1, rt = p.col + 1 == cols ? 0 : p.col + 1;
    p.shift_x += parabolic_offset(corr.at(up, p.col, 0), p.value, corr.at(down, p.col, 0));
    p.shift_y += parabolic_offset(corr.at(p.row, lf, 0), p.value, corr.at(p.row, rt, 0));
  }
  return p;
}

}  // namespace ringloc
