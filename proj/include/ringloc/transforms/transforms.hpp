#ifndef RINGLOC_TRANSFORMS_TRANSFORMS_HPP
#define RINGLOC_TRANSFORMS_TRANSFORMS_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "ringloc/common/grid3.hpp"
#include "ringloc/features/features.hpp"
#include "ringloc/transforms/fft.hpp"

namespace ringloc {

/// Rows are angles theta_j = 2*pi*j/N, columns are offsets
/// tau_k = -extent*sqrt(2) + k*dtau with dtau = 2*extent*sqrt(2)/N. The tau
/// axis is treated as circular, which makes tau_k and -tau_k land on bins
/// k and N-k exactly.
struct Sinogram {
  Grid3 data;
  double extent = 0.0;

  double theta(std::size_t j) const { return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(data.rows()); }
  double tau_step() const { return 2.0 * extent * std::numbers::sqrt2 / static_cast<double>(data.cols()); }
  double tau(std::size_t k) const { return -extent * std::numbers::sqrt2 + static_cast<double>(k) * tau_step(); }
};

/// Magnitude spectrum along tau: N_theta x (N_tau/2 + 1) x C.
struct Ting {
  Grid3 data;
};

/// Zero mean, unit Frobenius norm over all channels jointly.
struct NormalizedTing {
  Grid3 data;
};

/// Discrete Radon transform, every channel independently. Each nonzero cell
/// is treated as a point mass at its center and its projection
/// x cos(theta) + y sin(theta) is split linearly between the two nearest tau
/// bins, so every row carries exactly the image mass. Rows j and j + N/2 use
/// negated trigonometric values, which makes the half-turn mirror exact.
/// Throws NonSquareInput.
Sinogram radon(const FeatureBEV& bev);

/// Content rotation by +angle about the grid center (bilinear, zero fill).
FeatureBEV rotate_bev(const FeatureBEV& bev, double angle);

/// max |R_rot(theta_j, tau) - R(theta_{j - alpha_bin}, tau)| over |tau| <= extent,
/// where rot is the BEV rotated by alpha_bin angular steps. Exposes the
/// rotation-to-row-shift property directly.
double sinogram_shift_property_check(const FeatureBEV& bev, int alpha_bin);

Ting ting(const Sinogram& sg);

/// Subtract the global mean and divide by the Frobenius norm of the result.
/// Throws DegenerateConstantInput when the input is constant.
Grid3 normalize_grid(const Grid3& g);
inline NormalizedTing normalize_ting(const Ting& t) { return {normalize_grid(t.data)}; }

/// Per-column DFT along the row (theta) axis of a rows x cols x C grid, kept
/// so that an index can reuse its map spectra across queries.
struct ThetaSpectrum {
  std::size_t rows = 0;
  std::size_t columns = 0;  ///< cols * channels
  std::vector<fft::Complex> data;  ///< column-major: column c occupies [c*rows, (c+1)*rows)
};

ThetaSpectrum theta_spectrum(const Grid3& g);

/// corr(k) = sum_c sum_j sum_w a(j+k, w, c) * b(j, w, c), rows circular.
/// If b is a rolled forward by s rows, the peak is at k = N - s.
std::vector<double> circular_corr(const Grid3& a, const Grid3& b);
std::vector<double> circular_corr(const ThetaSpectrum& a, const ThetaSpectrum& b);
inline std::vector<double> circular_corr(const NormalizedTing& a, const NormalizedTing& b) {
  return circular_corr(a.data, b.data);
}

/// circular_corr(*entries[i], query) for every entry; identical to the
/// sequential loop for any job count.
std::vector<std::vector<double>> circular_corr_batch(const ThetaSpectrum& query,
                                                     std::span<const ThetaSpectrum* const> entries,
                                                     std::size_t jobs = 1);

/// corr(kx, ky) = sum_c sum_p a(p) * b(p + k), both axes circular, summed over
/// channels into a single-channel grid. If b is a rolled forward by (sx, sy),
/// the peak is at (sx, sy) modulo the grid size. Throws ShapeMismatch.
Grid3 corr2d(const Grid3& a, const Grid3& b);

struct Peak1D {
  std::size_t index = 0;  ///< lowest index on ties
  double value = 0.0;
};
Peak1D find_peak(std::span<const double> values);

struct Peak2D {
  std::size_t row = 0;  ///< raw index, lowest row-major index on ties
  std::size_t col = 0;
  double value = 0.0;
  double shift_x = 0.0;  ///< signed shift in cells, wrapped to (-N/2, N/2]
  double shift_y = 0.0;
};
/// Peak of a single-channel correlation map; with subpixel, each axis is
/// refined by a three-point parabola through the circular neighbors.
Peak2D find_peak_2d(const Grid3& corr, bool subpixel);

}  // namespace ringloc

#endif  // RINGLOC_TRANSFORMS_TRANSFORMS_HPP
