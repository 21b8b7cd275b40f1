#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fhd/model.hpp"
#include "support/oracles.hpp"

using namespace fhd;

TEST_CASE("gamma-law pressure against precomputed values") {
  PressureLaw law(0.8, 1.4);
  CHECK(law.kappa() == 0.8);
  CHECK(law.gamma() == 1.4);
  CHECK(oracles::rel_diff(law.pressure(2.0), 0.8 * oracles::two_pow_1_4) < 1e-15);
  CHECK(oracles::rel_diff(law.potential(2.0), oracles::potential_at_2) < 1e-15);
  CHECK(law.pressure(0.0) == 0.0);
  CHECK(law.potential(1.0) == 0.0);
}

TEST_CASE("pressure-law structural identities") {
  PressureLaw law(0.8, 1.4);
  // rho*P'(rho) - P(rho) = p(rho) pins the potential normalization.
  for (double rho : {0.3, 1.0, 2.5, 7.0}) {
    const double lhs = rho * law.potential_prime(rho) - law.potential(rho);
    CHECK(oracles::rel_diff(lhs, law.pressure(rho)) < 1e-14);
    CHECK(oracles::rel_diff(law.potential_second(rho), law.pressure_prime(rho) / rho) < 1e-14);
  }
  // pressure_prime agrees with a central difference.
  const double h = 1e-6;
  const double fd = (law.pressure(2.0 + h) - law.pressure(2.0 - h)) / (2.0 * h);
  CHECK(oracles::rel_diff(law.pressure_prime(2.0), fd) < 1e-8);
}

TEST_CASE("bregman divergence of the internal energy") {
  PressureLaw quad(1.0, 2.0);  // P(rho) = rho^2 - rho
  CHECK(quad.bregman(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(quad.bregman(1.0, 1.0) == 0.0);

  PressureLaw law(0.8, 1.4);
  CHECK(law.bregman(2.0, 2.0) == 0.0);
  CHECK(law.bregman(0.5, 2.0) > 0.0);
  CHECK(law.bregman(3.0, 2.0) > 0.0);
  CHECK_THROWS_AS(law.bregman(1.0, 0.0), std::domain_error);
}

TEST_CASE("pressure-law domain and parameter guards") {
  CHECK_THROWS_AS(PressureLaw(1.0, 1.0), std::invalid_argument);
  CHECK_NOTHROW(PressureLaw(1.0, 0.9));  // constructible, flagged by validation
  PressureLaw law(1.0, 2.0);
  CHECK_THROWS_AS(law.pressure(-0.1), std::domain_error);
  CHECK_THROWS_AS(law.potential(-0.1), std::domain_error);
  CHECK_THROWS_AS(law.potential_second(0.0), std::domain_error);
}

TEST_CASE("saturating friction law") {
  const FrictionLaw off = FrictionLaw::off();
  CHECK_FALSE(off.enabled());
  CHECK(off.h(5.0) == 0.0);

  const FrictionLaw fr = FrictionLaw::saturating(0.5);
  CHECK(fr.enabled());
  CHECK(fr.h_inf() == 0.5);
  CHECK(fr.h(0.0) == 0.0);
  CHECK(fr.h(1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(fr.h(1e12) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fr.factor(1.0) == doctest::Approx(0.75).epsilon(1e-15));
  // monotone, bounded by h_inf, so the factor stays in (1 - h_inf, 1]
  double prev = -1.0;
  for (double z = 0.0; z <= 16.0; z += 0.5) {
    CHECK(fr.h(z) >= prev);
    CHECK(fr.h(z) < 0.5);
    CHECK(fr.h_prime(z) >= 0.0);
    prev = fr.h(z);
  }
}

TEST_CASE("kernel mode canonicalization") {
  const auto spec = KernelSpec::fourier_table({{{-1, 0, 0}, 0.3}});
  const auto modes = spec.modes(2);
  REQUIRE(modes.size() == 1);
  CHECK(modes[0].k == std::array<int, 3>{1, 0, 0});
  CHECK(modes[0].coeff == doctest::Approx(0.3).epsilon(1e-15));

  // +k and -k entries merge into one representative
  const auto merged = KernelSpec::fourier_table({{{1, 0, 0}, 0.2}, {{-1, 0, 0}, 0.1}});
  const auto mm = merged.modes(2);
  REQUIRE(mm.size() == 1);
  CHECK(mm[0].coeff == doctest::Approx(0.3).epsilon(1e-15));

  CHECK_THROWS_AS(KernelSpec::fourier_table({{{0, 0, 1}, 1.0}}).modes(2), std::invalid_argument);
}

TEST_CASE("cosine bump expansion in two dimensions") {
  const auto spec = KernelSpec::cosine(1.0);
  CHECK(spec.max_mode(2) == 1);
  const auto modes = spec.modes(2);
  REQUIRE(modes.size() == 5);
  auto coeff_of = [&](int k0, int k1) {
    for (const auto& m : modes)
      if (m.k[0] == k0 && m.k[1] == k1 && m.k[2] == 0) return m.coeff;
    return std::nan("");
  };
  CHECK(coeff_of(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(coeff_of(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(coeff_of(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(coeff_of(1, 1) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(coeff_of(1, -1) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("kernel point values") {
  const auto spec = KernelSpec::cosine(2.0);
  const std::array<double, 3> origin{0.0, 0.0, 0.0};
  const std::array<double, 3> corner{1.0, 1.0, 0.0};
  const std::array<double, 3> half{0.5, 0.0, 0.0};
  CHECK(spec.value_at(origin, 2) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(spec.value_at(corner, 2)) < 1e-14);
  CHECK(spec.value_at(half, 2) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(KernelSpec::zero().is_zero());
  CHECK(KernelSpec::cosine(0.0).is_zero());
  CHECK_FALSE(spec.is_zero());
}

TEST_CASE("kernel sampling requires a resolving grid") {
  const auto wide = KernelSpec::fourier_table({{{3, 0, 0}, 1.0}});
  CHECK(wide.max_mode(2) == 3);
  CHECK_THROWS_AS(sample_kernel(wide, TorusGrid(2, 6)), std::invalid_argument);
  CHECK_NOTHROW(sample_kernel(wide, TorusGrid(2, 8)));

  const ScalarField f = sample_kernel(KernelSpec::cosine(1.0), TorusGrid(2, 8));
  CHECK(f.values[0] >= -1e-15);  // nonnegative bump
}

TEST_CASE("model validation verdicts") {
  TorusGrid g(2, 16);
  ModelSpec ok;
  ok.attraction = KernelSpec::cosine(0.5);
  ok.alignment = KernelSpec::cosine(0.5);
  ok.friction = FrictionLaw::saturating(0.5);
  ok.epsilon = 1e-2;
  ok.density_reg = 1e-3;
  CHECK(validate_model(ok, g).all_passed());

  ModelSpec soft = ok;
  soft.pressure = PressureLaw(1.0, 0.9);
  CHECK_FALSE(validate_model(soft, g).all_passed());

  ModelSpec lobed = ok;
  lobed.alignment = KernelSpec::fourier_table({{{1, 0, 0}, 1.0}});  // cos takes negative values
  CHECK_FALSE(validate_model(lobed, g).all_passed());

  ModelSpec antidiffusive = ok;
  antidiffusive.epsilon = -1e-3;
  CHECK_FALSE(validate_model(antidiffusive, g).all_passed());

  ModelSpec unresolved = ok;
  unresolved.attraction = KernelSpec::fourier_table({{{8, 0, 0}, 1.0}});
  const auto report = validate_model(unresolved, TorusGrid(2, 8));
  CHECK_FALSE(report.all_passed());
  CHECK(report.summary().find("FAIL") != std::string::npos);
}
