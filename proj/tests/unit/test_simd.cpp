#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mrsi/errors.hpp"
#include "mrsi/simd.hpp"

using namespace mrsi;
using simd::Backend;

namespace {

std::vector<simd::cplx> random_cplx(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<simd::cplx> v(n);
  for (auto& z : v) z = {nd(rng), nd(rng)};
  return v;
}

std::vector<Backend> vector_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (simd::backend_supported(b)) out.push_back(b);
  }
  return out;
}

double rel(simd::cplx a, simd::cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("scalar kernels against plain loops") {
  const auto& k = simd::kernels_for(Backend::Scalar);
  const auto a = random_cplx(37, 1), b = random_cplx(37, 2);
  simd::cplx d{};
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  CHECK(rel(k.dot(a.data(), b.data(), a.size()), d) < 1e-14);

  auto y = b;
  k.axpy({0.5, -2.0}, a.data(), y.data(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(rel(y[i], b[i] + simd::cplx(0.5, -2.0) * a[i]) < 1e-15);

  std::vector<double> m(a.size());
  k.modulus(a.data(), m.data(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(m[i] == doctest::Approx(std::abs(a[i])).epsilon(1e-15));

  double e = 0.0;
  for (const auto& z : a) e += std::norm(z);
  CHECK(k.energy(a.data(), a.size()) == doctest::Approx(e).epsilon(1e-14));
}

TEST_CASE("vector backends match the scalar reference") {
  const auto& ref = simd::kernels_for(Backend::Scalar);
  for (Backend be : vector_backends()) {
    CAPTURE(simd::backend_name(be));
    const auto& k = simd::kernels_for(be);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 1001u}) {
      CAPTURE(n);
      const auto a = random_cplx(n, 10 + n), b = random_cplx(n, 20 + n);
      std::vector<double> w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = std::cos(0.3 * i);

      CHECK(rel(k.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n)) < 1e-12);
      CHECK(k.energy(a.data(), n) == doctest::Approx(ref.energy(a.data(), n)).epsilon(1e-12));

      auto y1 = b, y2 = b;
      k.axpy({1.5, 0.25}, a.data(), y1.data(), n);
      ref.axpy({1.5, 0.25}, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel(y1[i], y2[i]) < 1e-14);

      y1 = b;
      y2 = b;
      k.axpy_real({-0.5, 2.0}, w.data(), y1.data(), n);
      ref.axpy_real({-0.5, 2.0}, w.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel(y1[i], y2[i]) < 1e-14);

      y1 = b;
      y2 = b;
      k.mul_acc(a.data(), b.data(), y1.data(), n);
      ref.mul_acc(a.data(), b.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel(y1[i], y2[i]) < 1e-14);

      // modulus must be bit-identical: the spectral front end depends on it
      std::vector<double> m1(n), m2(n);
      k.modulus(a.data(), m1.data(), n);
      ref.modulus(a.data(), m2.data(), n);
      CHECK(m1 == m2);
    }
  }
}

TEST_CASE("backend selection") {
  CHECK(simd::backend_supported(Backend::Scalar));
  CHECK(simd::backend_name(Backend::Scalar) == "scalar");
  {
    simd::ScopedBackend s(Backend::Scalar);
    CHECK(simd::active_backend() == Backend::Scalar);
  }
  CHECK(simd::active_backend() == simd::detect_backend());
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (!simd::backend_supported(b)) CHECK_THROWS_AS(simd::set_backend(b), InvalidArgument);
  }
#if defined(MRSI_HAVE_AVX2)
  if (simd::backend_supported(Backend::Avx2)) CHECK(simd::detect_backend() == Backend::Avx2);
#endif
}
