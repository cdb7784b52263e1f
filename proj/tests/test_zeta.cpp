#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "treeloc/transfer.hpp"
#include "treeloc/zeta.hpp"

using namespace treeloc;

namespace {
const ScalarDisorder two_point({{-1.0, 0.5}, {1.0, 0.5}});
const ScalarDisorder three_point({{-1.0, 1.0 / 3}, {0.0, 1.0 / 3}, {1.0, 1.0 / 3}});
const ScalarDisorder four_point({{-3.0, 0.25}, {-1.0, 0.25}, {1.0, 0.25}, {3.0, 0.25}});
}  // namespace

TEST_CASE("alpha map evaluates its defining formula and rejects the lower half-plane") {
  CHECK(std::abs(alpha_map(Complex(0.0, 1.0), 0.0) - Complex(0.0, 1.0)) < 1e-15);
  CHECK(std::abs(alpha_map(Complex(0.0, 1.0), 2.0) - Complex(-2.0, 1.0)) < 1e-15);
  CHECK(std::abs(alpha_map(Complex(0.0, 2.0), 1.0) - Complex(-0.5, 0.25)) < 1e-15);
  // Generic point against the formula written out by hand.
  const double a = 0.7, b = 1.3, Q = -0.4;
  const double r2 = a * a + b * b;
  const Complex want((a + a / r2 - Q) / b, 1.0 / r2);
  CHECK(std::abs(alpha_map(Complex(a, b), Q) - want) < 1e-14);
  CHECK_THROWS_AS(alpha_map(Complex(0.0, -1.0), 0.0), std::domain_error);
  CHECK_THROWS_AS(alpha_map(Complex(1.0, 0.0), 0.0), std::domain_error);
}

TEST_CASE("g map stays on the imaginary axis for symmetric laws") {
  for (double b : {0.8, 1.2, 1.7}) {
    const Complex g = g_map(Complex(0.0, b), two_point);
    CHECK(std::abs(g.real()) < 1e-9);
    CHECK(g.imag() > 0.0);
  }
}

TEST_CASE("symmetric finder reproduces the two-point fixed point") {
  const ZetaCertificate zc = find_zeta_symmetric(two_point, 0.0);
  // Height (1+sqrt 5)/2 under the square root: the golden-ratio point.
  const double want = std::sqrt(0.5 * (1.0 + std::sqrt(5.0)));
  CHECK(std::abs(zc.zeta.re) < 1e-12);
  CHECK(std::abs(zc.zeta.im - want) < 1e-8);
  CHECK(zc.abs_zeta == doctest::Approx(want).epsilon(1e-10));
  CHECK(zc.tail_value == doctest::Approx(2.0 * std::log(want)).epsilon(1e-10));
  CHECK(std::abs(zc.tail_value - 0.4812118250596) < 1e-9);
  CHECK(zc.residual <= 1e-9);
  // Fixed-point property: g(zeta) = i for the two-point law.
  CHECK(std::abs(g_map(zc.zeta.as_complex(), two_point) - Complex(0.0, 1.0)) < 1e-7);
}

TEST_CASE("general finder agrees with the symmetric one on the two-point law") {
  const ZetaCertificate sym = find_zeta_symmetric(two_point, 0.0);
  const ZetaCertificate gen = find_zeta_general(two_point);
  CHECK(std::abs(gen.zeta.as_complex() - sym.zeta.as_complex()) < 1e-6);
  CHECK(gen.residual <= 1e-9);
  CHECK(gen.box.gamma_samples > 0);
  CHECK(gen.box.a0 > 1.0);
  CHECK(gen.box.b0 > gen.box.b1);
}

TEST_CASE("general finder pins the three-point law") {
  const ZetaCertificate zc = find_zeta_general(three_point);
  CHECK(std::abs(zc.zeta.re) < 1e-7);
  CHECK(std::abs(zc.zeta.im - 1.169841575692443) < 1e-8);
  CHECK(zc.inf_value == doctest::Approx(0.0229916).epsilon(1e-3));
  CHECK(zc.inf_value > 0.0);
  CHECK(zc.residual <= 1e-9);
}

TEST_CASE("both finders handle the spread four-point law") {
  // The two defining equations (curve log-moment vs barycenter fixed point)
  // coincide only when |alpha| is a.s. constant, so the returned points may
  // differ here; each must still satisfy its own contract.
  const ZetaCertificate sym = find_zeta_symmetric(four_point, 0.0);
  CHECK(sym.abs_zeta > 1.0);
  CHECK(std::abs(sym.zeta.re) < 1e-9);
  CHECK(sym.residual <= 1e-9);

  const ZetaCertificate gen = find_zeta_general(four_point);
  CHECK(gen.abs_zeta > 1.0);
  CHECK(std::abs(gen.zeta.re) < 1e-7);
  CHECK(gen.residual <= 1e-9);
  // The barycenter fixed point really is one.
  CHECK(std::abs(g_map(gen.zeta.as_complex(), four_point) - Complex(0.0, 1.0)) < 1e-7);
}

TEST_CASE("degenerate laws are rejected") {
  const ScalarDisorder point_mass({{0.3, 1.0}});
  CHECK_THROWS_AS(find_zeta_general(point_mass), std::invalid_argument);
  CHECK_THROWS_AS(find_zeta_symmetric(ScalarDisorder({{0.0, 1.0}}), 0.0),
                  std::invalid_argument);
  // Asymmetric input to the symmetric finder.
  CHECK_THROWS_AS(find_zeta_symmetric(three_point.shifted(0.2), 0.0), std::invalid_argument);
}

TEST_CASE("key functional: closed-form value, tail, and dispatcher") {
  const ScalarDisorder delta0({{0.0, 1.0}});
  const Complex two_i(0.0, 2.0);
  // |zeta|^2 = 4, |w + 1/zeta - Q|^2 = 1/4, |w - zeta|^2 = 4 at w = 0.
  CHECK(key_functional(two_i, 0.0, delta0) == doctest::Approx(std::log(0.25)).epsilon(1e-12));
  CHECK(key_functional_tail(two_i) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));

  const Complex z = find_zeta_symmetric(two_point, 0.0).zeta.as_complex();
  CHECK(std::abs(key_functional(z, 1e6, two_point) - key_functional_tail(z)) < 1e-3);

  CHECK(key_functional(z, UpperHalfPoint::infinity(), two_point) ==
        key_functional_tail(z));
  CHECK(key_functional(z, UpperHalfPoint{0.4, 0.0, false}, two_point) ==
        key_functional(z, 0.4, two_point));
}

TEST_CASE("s-derivative of the transfer ratio is minus half the key functional") {
  const Complex z = find_zeta_general(three_point).zeta.as_complex();
  for (double w : {-2.0, -0.3, 0.0, 0.9, 5.0}) {
    for (double E_sys : {0.0, 0.4}) {
      const double lhs = dF_ds_at_zero_system(z, w, E_sys, three_point);
      const double rhs = -0.5 * key_functional(z, w, three_point.shifted(-E_sys));
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("ratio F has derivative matching a finite difference in s") {
  const Complex z = find_zeta_general(three_point).zeta.as_complex();
  const double w = 0.7, E_sys = 0.2, h = 1e-5;
  const double fd =
      (ratio_F_system(z, w, h, E_sys, three_point) - ratio_F_system(z, w, 0.0, E_sys, three_point)) / h;
  CHECK(std::abs(fd - dF_ds_at_zero_system(z, w, E_sys, three_point)) < 1e-4);
}

TEST_CASE("key-estimate verification separates good and bad heights") {
  const WGrid grid(512);
  const ZetaCertificate zc = find_zeta_general(three_point);
  const KeyVerification good = verify_key_estimate(zc.zeta.as_complex(), three_point, grid);
  CHECK(good.ok);
  CHECK(good.inf_value > 0.0);
  CHECK(good.inf_value == doctest::Approx(0.0229916).epsilon(1e-2));
  CHECK(good.tail_value == doctest::Approx(2.0 * std::log(zc.abs_zeta)).epsilon(1e-9));

  // |zeta| < 1 forces a negative tail, so the estimate must fail there.
  const KeyVerification bad = verify_key_estimate(Complex(0.0, 0.5), three_point, grid);
  CHECK(!bad.ok);
  CHECK(bad.inf_value < 0.0);
}
