#include "ringloc/transforms/fft.hpp"

#include <algorithm>

#include <unsupported/Eigen/FFT>

namespace ringloc::fft {

namespace {

// kissfft plans are cached inside the object and are not thread safe.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

void columns(std::vector<Complex>& data, std::size_t rows, std::size_t cols, bool inv) {
  std::vector<Complex> col(rows), out(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) col[r] = data[r * cols + c];
    if (inv) {
      inverse(out.data(), col.data(), rows);
    } else {
      forward(out.data(), col.data(), rows);
    }
    for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = out[r];
  }
}

void rows_pass(std::vector<Complex>& data, std::size_t rows, std::size_t cols, bool inv) {
  std::vector<Complex> out(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    Complex* row = data.data() + r * cols;
    if (inv) {
      inverse(out.data(), row, cols);
    } else {
      forward(out.data(), row, cols);
    }
    std::copy(out.begin(), out.end(), row);
  }
}

}  // namespace

// kissfft cannot plan a length-1 transform.
void forward(Complex* dst, const Complex* src, std::size_t n) {
  if (n <= 1) {
    std::copy(src, src + n, dst);
    return;
  }
  engine().fwd(dst, src, static_cast<Eigen::Index>(n));
}

void inverse(Complex* dst, const Complex* src, std::size_t n) {
  if (n <= 1) {
    std::copy(src, src + n, dst);
    return;
  }
  engine().inv(dst, src, static_cast<Eigen::Index>(n));
}

void forward_2d(std::vector<Complex>& data, std::size_t rows, std::size_t cols) {
  rows_pass(data, rows, cols, false);
  columns(data, rows, cols, false);
}

void inverse_2d(std::vector<Complex>& data, std::size_t rows, std::size_t cols) {
  rows_pass(data, rows, cols, true);
  columns(data, rows, cols, true);
}

}  // namespace ringloc::fft
