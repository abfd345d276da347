#ifndef RINGLOC_TRANSFORMS_FFT_HPP
#define RINGLOC_TRANSFORMS_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace ringloc::fft {

using Complex = std::complex<double>;

/// Unscaled forward DFT of n complex values, dst may not alias src.
void forward(Complex* dst, const Complex* src, std::size_t n);
/// Inverse DFT scaled by 1/n.
void inverse(Complex* dst, const Complex* src, std::size_t n);

/// Forward DFT of a rows x cols row-major complex image, in place.
void forward_2d(std::vector<Complex>& data, std::size_t rows, std::size_t cols);
/// Inverse of forward_2d (scaled by 1/(rows*cols)), in place.
void inverse_2d(std::vector<Complex>& data, std::size_t rows, std::size_t cols);

}  // namespace ringloc::fft

#endif  // RINGLOC_TRANSFORMS_FFT_HPP
