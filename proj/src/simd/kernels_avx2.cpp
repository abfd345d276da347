#include <cmath>

#include "ringloc/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define RINGLOC_HAVE_AVX2_VARIANT 1
#endif

namespace ringloc::simd {

#ifdef RINGLOC_HAVE_AVX2_VARIANT

namespace {

// FMA is deliberately not enabled: fused multiply-add would round differently
// from the scalar reference.
#define RINGLOC_AVX2 __attribute__((target("avx2")))

RINGLOC_AVX2 void cmul_conj_acc(double* acc, const double* a, const double* b, std::size_t n) {
  const __m256d flip_im = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * i);
    const __m256d vb = _mm256_loadu_pd(b + 2 * i);
    const __m256d nb = _mm256_mul_pd(vb, flip_im);            // br, -bi
    const __m256d re = _mm256_hsub_pd(_mm256_mul_pd(va, nb),  // ar*br - (-ai*bi)
                                      _mm256_setzero_pd());
    const __m256d sw = _mm256_permute_pd(nb, 0b0101);         // -bi, br
    const __m256d im = _mm256_hadd_pd(_mm256_setzero_pd(),    // -ar*bi + ai*br
                                      _mm256_mul_pd(va, sw));
    const __m256d prod = _mm256_blend_pd(re, im, 0b1010);
    _mm256_storeu_pd(acc + 2 * i, _mm256_add_pd(_mm256_loadu_pd(acc + 2 * i), prod));
  }
  for (; i < n; ++i) {
    const double ar = a[2 * i], ai = a[2 * i + 1];
    const double br = b[2 * i], bi = b[2 * i + 1];
    acc[2 * i] += ar * br + ai * bi;
    acc[2 * i + 1] += ai * br - ar * bi;
  }
}

RINGLOC_AVX2 void magnitude(double* out, const double* z, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z01 = _mm256_loadu_pd(z + 2 * i);
    const __m256d z23 = _mm256_loadu_pd(z + 2 * i + 4);
    // hadd interleaves the 128-bit lanes: |z0|^2, |z2|^2, |z1|^2, |z3|^2
    const __m256d sq = _mm256_hadd_pd(_mm256_mul_pd(z01, z01), _mm256_mul_pd(z23, z23));
    const __m256d ordered = _mm256_permute4x64_pd(sq, 0b11011000);
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(ordered));
  }
  for (; i < n; ++i) {
    const double re = z[2 * i], im = z[2 * i + 1];
    out[i] = std::sqrt(re * re + im * im);
  }
}

RINGLOC_AVX2 void project(double* out, const double* x, const double* y, double c, double s, std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d px = _mm256_mul_pd(_mm256_loadu_pd(x + i), vc);
    const __m256d py = _mm256_mul_pd(_mm256_loadu_pd(y + i), vs);
    _mm256_storeu_pd(out + i, _mm256_add_pd(px, py));
  }
  for (; i < n; ++i) out[i] = x[i] * c + y[i] * s;
}

RINGLOC_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_add_pd(s0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    s1 = _mm256_add_pd(s1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(s0, s1));
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

#undef RINGLOC_AVX2

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{Isa::kAvx2, cmul_conj_acc, magnitude, project, dot};
  return &table;
}

#else

const KernelTable* avx2_kernels() { return nullptr; }

#endif

}  // namespace ringloc::simd
