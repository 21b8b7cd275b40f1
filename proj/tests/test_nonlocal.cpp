#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "fhd/fields.hpp"
#include "fhd/nonlocal.hpp"
#include "fhd/spectral.hpp"
#include "support/oracles.hpp"

using namespace fhd;
constexpr double pi = std::numbers::pi;

namespace {

double field_gap(const ScalarField& a, const ScalarField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

}  // namespace

TEST_CASE("fft and direct backends agree on random data") {
  std::mt19937_64 rng(501);
  for (int dim : {2, 3}) {
    TorusGrid g(dim, 8);
    const auto spec = KernelSpec::fourier_table({{{1, 0, 0}, 0.4}, {{1, 1, 0}, -0.2}}, 1.5);
    ConvolutionEngine fast(spec, g, ConvolutionEngine::Backend::fft);
    ConvolutionEngine slow(spec, g, ConvolutionEngine::Backend::direct);
    for (int trial = 0; trial < 5; ++trial) {
      const ScalarField f = oracles::random_field(g, rng, -2.0, 2.0);
      CHECK(field_gap(fast.convolve(f), slow.convolve(f)) < 1e-12);
      const VectorField gf = fast.grad_convolve(f), gs = slow.grad_convolve(f);
      for (int a = 0; a < dim; ++a) CHECK(field_gap(gf[a], gs[a]) < 1e-12);
      CHECK(field_gap(fast.laplacian_convolve(f), slow.laplacian_convolve(f)) < 1e-11);
    }
  }
}

TEST_CASE("convolution matches the brute-force quadrature") {
  std::mt19937_64 rng(502);
  TorusGrid g(2, 8);
  const auto spec = KernelSpec::cosine(0.7);
  ConvolutionEngine eng(spec, g);
  for (int trial = 0; trial < 5; ++trial) {
    const ScalarField f = oracles::random_field(g, rng, -1.0, 1.0);
    const ScalarField brute = oracles::brute_convolve(spec, f);
    CHECK(field_gap(eng.convolve(f), brute) < 1e-12);
  }
}

TEST_CASE("kernel integral and mass identity") {
  TorusGrid g(2, 16);
  ConvolutionEngine eng(KernelSpec::cosine(0.9), g);
  CHECK(eng.kernel_integral() == doctest::Approx(0.9).epsilon(1e-13));
  CHECK(eng.kernel_nonnegative());
  CHECK_FALSE(eng.kernel_is_zero());

  std::mt19937_64 rng(503);
  const ScalarField f = oracles::random_field(g, rng, 0.0, 2.0);
  // \int (K*f) = (\int K)(\int f): convolution preserves total mass up to the
  // kernel's own integral.
  CHECK(oracles::rel_diff(integrate(eng.convolve(f)), 0.9 * integrate(f)) < 1e-12);

  ConvolutionEngine none(KernelSpec::zero(), g);
  CHECK(none.kernel_is_zero());
  CHECK(max_abs(none.convolve(f)) == 0.0);
}

TEST_CASE("single cosine mode is an eigenfunction of the convolution") {
  TorusGrid g(2, 16);
  const double c = 0.35;
  ConvolutionEngine eng(KernelSpec::fourier_table({{{1, 0, 0}, c}}), g);

  ScalarField cosx(g), sinx(g), cosy(g);
  spectral::for_each_point(g, [&](std::size_t i, int a, int b, int) {
    cosx.values[i] = std::cos(pi * g.coordinate(a));
    sinx.values[i] = std::sin(pi * g.coordinate(a));
    cosy.values[i] = std::cos(pi * g.coordinate(b));
  });

  // K(x) = c cos(pi x_1) on [-1,1]^2: K*cos = 2c cos, K*sin = 2c sin
  // (the eigenvalue is c * \int cos^2 = 2c), and orthogonal modes vanish.
  ScalarField expect = cosx;
  scale(expect, 2.0 * c);
  CHECK(field_gap(eng.convolve(cosx), expect) < 1e-13);
  ScalarField expect_s = sinx;
  scale(expect_s, 2.0 * c);
  CHECK(field_gap(eng.convolve(sinx), expect_s) < 1e-13);
  CHECK(max_abs(eng.convolve(cosy)) < 1e-13);

  // constants convolve to kernel_integral * constant; here \int K = 0
  ScalarField one(g, 1.0);
  CHECK(max_abs(eng.convolve(one)) < 1e-13);
}

TEST_CASE("gradient and laplacian of the convolution are consistent") {
  std::mt19937_64 rng(504);
  TorusGrid g(2, 16);
  ConvolutionEngine eng(KernelSpec::cosine(1.2), g);
  const ScalarField f = oracles::random_field(g, rng, -1.0, 1.0);

  const VectorField grad_k = eng.grad_convolve(f);
  const VectorField grad_of_conv = gradient(eng.convolve(f));
  for (int a = 0; a < 2; ++a) CHECK(field_gap(grad_k[a], grad_of_conv[a]) < 1e-11);

  const ScalarField lap_k = eng.laplacian_convolve(f);
  CHECK(field_gap(lap_k, divergence(grad_k)) < 1e-10);
}

TEST_CASE("engines refuse unresolvable kernels") {
  const auto wide = KernelSpec::fourier_table({{{4, 0, 0}, 1.0}});
  CHECK_THROWS_AS(ConvolutionEngine(wide, TorusGrid(2, 8)), std::invalid_argument);
  CHECK_NOTHROW(ConvolutionEngine(wide, TorusGrid(2, 10)));
}

TEST_CASE("alignment dissipation matches the pair-sum oracle") {
  std::mt19937_64 rng(505);
  TorusGrid g(2, 12);  // bump modes <= 1 <= m/3, so the expanded form is exact
  const auto spec = KernelSpec::cosine(0.8);
  ConvolutionEngine psi(spec, g);

  for (int trial = 0; trial < 4; ++trial) {
    const ScalarField rho = oracles::random_field(g, rng, 0.2, 1.5);
    const VectorField u = oracles::random_vector(g, rng, -1.0, 1.0);
    const double d = alignment_dissipation(psi, rho, u);
    const double brute = oracles::brute_alignment(spec, rho, u);
    CHECK(d >= -1e-12);
    CHECK(oracles::rel_diff(d, brute) < 1e-10);
  }

  // identical velocities dissipate nothing
  const ScalarField rho = oracles::random_field(g, rng, 0.2, 1.5);
  VectorField uniform(g);
  for (int a = 0; a < 2; ++a) uniform[a] = ScalarField(g, 0.7 - 0.2 * a);
  CHECK(std::abs(alignment_dissipation(psi, rho, uniform)) < 1e-12);

  ConvolutionEngine none(KernelSpec::zero(), g);
  CHECK(alignment_dissipation(none, rho, uniform) == 0.0);

  ConvolutionEngine lobed(KernelSpec::fourier_table({{{1, 0, 0}, 1.0}}), g);
  CHECK_THROWS_AS(alignment_dissipation(lobed, rho, uniform), std::invalid_argument);
}
