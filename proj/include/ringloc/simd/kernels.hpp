#ifndef RINGLOC_SIMD_KERNELS_HPP
#define RINGLOC_SIMD_KERNELS_HPP

#include <cstddef>
#include <string_view>
#include <vector>

namespace ringloc::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view to_string(Isa isa);

// Complex arrays are interleaved (re, im) doubles; n counts complex values.
// Vector variants keep the scalar operation order wherever the result is a
// per-element expression, so those agree bit for bit. Only `dot` reassociates.
struct KernelTable {
  Isa isa;
  /// acc[i] += a[i] * conj(b[i])
  void (*cmul_conj_acc)(double* acc, const double* a, const double* b, std::size_t n);
  /// out[i] = |z[i]|
  void (*magnitude)(double* out, const double* z, std::size_t n);
  /// out[i] = x[i] * c + y[i] * s
  void (*project)(double* out, const double* x, const double* y, double c, double s, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels();
/// Null when the variant is not compiled in for this architecture.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Variants that are both compiled in and supported by the running CPU.
std::vector<Isa> available_isas();

/// Table selected once at first use: the best available variant, unless the
/// RINGLOC_SIMD environment variable names one (scalar, avx2, neon).
const KernelTable& kernels();

}  // namespace ringloc::simd

#endif  // RINGLOC_SIMD_KERNELS_HPP
