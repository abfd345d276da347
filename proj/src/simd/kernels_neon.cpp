#include <cmath>

#include "ringloc/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace ringloc::simd {

#if defined(__aarch64__)

namespace {

// Separate vmulq/vaddq (no vfmaq) to match the scalar rounding; the build
// also passes -ffp-contract=off so the compiler does not fuse them.

void cmul_conj_acc(double* acc, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t va = vld1q_f64(a + 2 * i);                    // ar, ai
    const float64x2_t vb = vld1q_f64(b + 2 * i);                    // br, bi
    const float64x2_t p = vmulq_f64(va, vb);                        // ar*br, ai*bi
    const float64x2_t q = vmulq_f64(va, vextq_f64(vb, vb, 1));      // ar*bi, ai*br
    const double re = vgetq_lane_f64(p, 0) + vgetq_lane_f64(p, 1);
    const double im = vgetq_lane_f64(q, 1) - vgetq_lane_f64(q, 0);
    vst1q_f64(acc + 2 * i, vaddq_f64(vld1q_f64(acc + 2 * i), float64x2_t{re, im}));
  }
}

void magnitude(double* out, const double* z, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t z0 = vld1q_f64(z + 2 * i);
    const float64x2_t z1 = vld1q_f64(z + 2 * i + 2);
    const float64x2_t sq = vpaddq_f64(vmulq_f64(z0, z0), vmulq_f64(z1, z1));
    vst1q_f64(out + i, vsqrtq_f64(sq));
  }
  for (; i < n; ++i) {
    const double re = z[2 * i], im = z[2 * i + 1];
    out[i] = std::sqrt(re * re + im * im);
  }
}

void project(double* out, const double* x, const double* y, double c, double s, std::size_t n) {
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t px = vmulq_f64(vld1q_f64(x + i), vc);
    const float64x2_t py = vmulq_f64(vld1q_f64(y + i), vs);
    vst1q_f64(out + i, vaddq_f64(px, py));
  }
  for (; i < n; ++i) out[i] = x[i] * c + y[i] * s;
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t s0 = vdupq_n_f64(0.0);
  float64x2_t s1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = vaddq_f64(s0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    s1 = vaddq_f64(s1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double sum = vaddvq_f64(vaddq_f64(s0, s1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{Isa::kNeon, cmul_conj_acc, magnitude, project, dot};
  return &table;
}

#else

const KernelTable* neon_kernels() { return nullptr; }

#endif

}  // namespace ringloc::simd
