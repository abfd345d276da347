#include <cmath>
#include <cstdlib>

#include "doctest.h"

#include "ringloc/common/rng.hpp"
#include "ringloc/simd/kernels.hpp"

using namespace ringloc;

namespace {

std::vector<double> randoms(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0.0, 3.0);
  return v;
}

}  // namespace

TEST_CASE("every available kernel table matches the scalar reference") {
  const auto& ref = simd::scalar_kernels();
  const auto isas = simd::available_isas();
  REQUIRE_FALSE(isas.empty());
  CHECK(isas.front() == simd::Isa::kScalar);
  Rng rng(99);
  for (simd::Isa isa : isas) {
    const simd::KernelTable* k = isa == simd::Isa::kScalar ? &ref
                                 : isa == simd::Isa::kAvx2 ? simd::avx2_kernels()
                                                           : simd::neon_kernels();
    REQUIRE(k != nullptr);
    CAPTURE(simd::to_string(isa));
    // Odd lengths exercise the scalar tails.
    for (std::size_t n : {0, 1, 3, 4, 7, 16, 61, 120, 257}) {
      CAPTURE(n);
      const auto a = randoms(rng, 2 * n), b = randoms(rng, 2 * n);
      auto acc0 = randoms(rng, 2 * n);
      auto acc1 = acc0;
      ref.cmul_conj_acc(acc0.data(), a.data(), b.data(), n);
      k->cmul_conj_acc(acc1.data(), a.data(), b.data(), n);
      CHECK(acc0 == acc1);

      std::vector<double> m0(n), m1(n);
      ref.magnitude(m0.data(), a.data(), n);
      k->magnitude(m1.data(), a.data(), n);
      CHECK(m0 == m1);

      std::vector<double> p0(2 * n), p1(2 * n);
      ref.project(p0.data(), a.data(), b.data(), 0.6, -0.8, 2 * n);
      k->project(p1.data(), a.data(), b.data(), 0.6, -0.8, 2 * n);
      CHECK(p0 == p1);

      const double d0 = ref.dot(a.data(), b.data(), 2 * n);
      const double d1 = k->dot(a.data(), b.data(), 2 * n);
      double scale = 0.0;
      for (std::size_t i = 0; i < 2 * n; ++i) scale += std::abs(a[i] * b[i]);
      CHECK(std::abs(d0 - d1) <= 1e-13 * std::max(scale, 1.0));
    }
  }
}

TEST_CASE("scalar kernels agree with direct formulas") {
  const double a[4] = {1, 2, 3, -1}, b[4] = {0.5, -1, 2, 2};
  double acc[4] = {0, 0, 0, 0};
  simd::scalar_kernels().cmul_conj_acc(acc, a, b, 2);
  // (1+2i)(0.5+i) = -1.5+2i ; (3-i)(2-2i) = 4-8i
  CHECK(acc[0] == doctest::Approx(-1.5));
  CHECK(acc[1] == doctest::Approx(2.0));
  CHECK(acc[2] == doctest::Approx(4.0));
  CHECK(acc[3] == doctest::Approx(-8.0));
  double mag[2];
  simd::scalar_kernels().magnitude(mag, a, 2);
  CHECK(mag[0] == doctest::Approx(std::sqrt(5.0)));
  CHECK(simd::scalar_kernels().dot(a, b, 4) == doctest::Approx(0.5 - 2 + 6 - 2));
}

TEST_CASE("selected table is one of the available ones") {
  const auto& k = simd::kernels();
  bool found = false;
  for (auto isa : simd::available_isas()) found |= isa == k.isa;
  CHECK(found);
  const char* forced = std::getenv("RINGLOC_SIMD");
  if (forced != nullptr && std::string(forced) == "scalar") CHECK(k.isa == simd::Isa::kScalar);
}
