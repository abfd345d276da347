#include <cstdlib>
#include <string>

#include "ringloc/common/log.hpp"
#include "ringloc/simd/kernels.hpp"

namespace ringloc::simd {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
      // Advanced SIMD is mandatory on AArch64.
      return neon_kernels() != nullptr;
  }
  return false;
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_kernels();
    case Isa::kAvx2:
      return avx2_kernels();
    case Isa::kNeon:
      return neon_kernels();
  }
  return nullptr;
}

const KernelTable& select() {
  const auto isas = available_isas();
  Isa chosen = isas.back();
  if (const char* forced = std::getenv("RINGLOC_SIMD")) {
    const std::string want(forced);
    bool found = false;
    for (Isa isa : isas) {
      if (to_string(isa) == want) {
        chosen = isa;
        found = true;
      }
    }
    if (!found) logger()->warn("RINGLOC_SIMD={} not available here, using {}", want, to_string(chosen));
  }
  logger()->debug("kernel variant: {}", to_string(chosen));
  return *table_for(chosen);
}

}  // namespace

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace ringloc::simd
