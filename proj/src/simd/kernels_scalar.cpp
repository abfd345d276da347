#include <cmath>

#include "ringloc/simd/kernels.hpp"

namespace ringloc::simd {

namespace {

void cmul_conj_acc(double* acc, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    acc[2 * i] += ar * br + ai * bi;
    acc[2 * i + 1] += ai * br - ar * bi;
  }
}

void magnitude(double* out, const double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[2 * i], im = z[2 * i + 1];
    out[i] = std::sqrt(re * re + im * im);
  }
}

void project(double* out, const double* x, const double* y, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * c + y[i] * s;
}

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::kScalar, cmul_conj_acc, magnitude, project, dot};
  return table;
}

}  // namespace ringloc::simd
