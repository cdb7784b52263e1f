#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "treeloc/hyperbolic.hpp"

using namespace treeloc;

namespace {

std::mt19937_64 rng(20240817);

Complex random_point(double im_lo = 0.05, double im_hi = 4.0) {
  std::uniform_real_distribution<double> re(-3.0, 3.0);
  std::uniform_real_distribution<double> im(im_lo, im_hi);
  return {re(rng), im(rng)};
}

MobiusMap random_isometry() {
  // Ranges keep ad - bc >= 0.4 - 0.3 > 0 before normalization.
  std::uniform_real_distribution<double> ua(0.5, 2.0);
  std::uniform_real_distribution<double> ub(-1.0, 1.0);
  std::uniform_real_distribution<double> uc(-0.3, 0.3);
  std::uniform_real_distribution<double> ud(0.8, 1.6);
  return MobiusMap::normalized(ua(rng), ub(rng), uc(rng), ud(rng));
}

}  // namespace

TEST_CASE("distance matches the arcosh formula and the known values") {
  const Complex i(0.0, 1.0);
  CHECK(std::abs(hyp_dist(i, Complex(0.0, std::exp(1.0))) - 1.0) < 1e-13);
  CHECK(std::abs(hyp_dist(i, Complex(1.0, 1.0)) - std::acosh(1.5)) < 1e-13);
  CHECK(hyp_dist(i, i) == 0.0);

  for (int k = 0; k < 200; ++k) {
    const Complex z1 = random_point(), z2 = random_point();
    const double direct =
        std::acosh(1.0 + std::norm(z1 - z2) / (2.0 * z1.imag() * z2.imag()));
    CHECK(std::abs(hyp_dist(z1, z2) - direct) < 1e-10);
    CHECK(hyp_dist(z1, z2) == hyp_dist(z2, z1));
  }
}

TEST_CASE("distance is stable for very close points") {
  const Complex z(0.3, 0.7);
  const double h = 1e-13;
  // Euclidean step h at height 0.7 has hyperbolic length h / 0.7.
  const double d = hyp_dist(z, z + Complex(h, 0.0));
  CHECK(d == doctest::Approx(h / 0.7).epsilon(1e-3));
}

TEST_CASE("triangle inequality on random triples") {
  for (int k = 0; k < 200; ++k) {
    const Complex a = random_point(), b = random_point(), c = random_point();
    CHECK(hyp_dist(a, c) <= hyp_dist(a, b) + hyp_dist(b, c) + 1e-12);
  }
}

TEST_CASE("upper-half-point wrapper agrees with the complex overload") {
  const UpperHalfPoint a = UpperHalfPoint::from(Complex(0.2, 1.3));
  const UpperHalfPoint b = UpperHalfPoint::from(Complex(-1.0, 0.4));
  CHECK(hyp_dist(a, b) == hyp_dist(a.as_complex(), b.as_complex()));
  CHECK(points_equal(a, a));
  CHECK(!points_equal(a, b));
  CHECK(points_equal(UpperHalfPoint::infinity(), UpperHalfPoint::infinity()));
  CHECK(!points_equal(a, UpperHalfPoint::infinity()));
  CHECK(UpperHalfPoint::infinity().interior() == false);
  CHECK(a.interior());
}

TEST_CASE("normalized Moebius maps have unit determinant and compose correctly") {
  for (int k = 0; k < 100; ++k) {
    const MobiusMap T = random_isometry();
    CHECK(T.a * T.d - T.b * T.c == doctest::Approx(1.0).epsilon(1e-12));

    const MobiusMap S = random_isometry();
    const Complex z = random_point();
    const Complex lhs = T.after(S)(z);
    const Complex rhs = T(S(z));
    CHECK(std::abs(lhs - rhs) < 1e-10);

    const Complex back = T.inverse()(T(z));
    CHECK(std::abs(back - z) < 1e-10);
  }
  CHECK_THROWS_AS(MobiusMap::normalized(1.0, 2.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("Moebius maps act on the boundary point at infinity") {
  const MobiusMap T = MobiusMap::normalized(2.0, 1.0, 0.0, 0.5);  // z -> 4z + 2
  const UpperHalfPoint img = T(UpperHalfPoint::infinity());
  CHECK(img.at_infinity);  // c == 0 fixes infinity
  const MobiusMap S = MobiusMap::normalized(0.0, -1.0, 1.0, 0.0);  // z -> -1/z
  const UpperHalfPoint img2 = S(UpperHalfPoint::infinity());
  CHECK(!img2.at_infinity);
  CHECK(img2.re == doctest::Approx(0.0));
}

TEST_CASE("Moebius maps are isometries") {
  for (int k = 0; k < 1000; ++k) {
    const MobiusMap T = random_isometry();
    const Complex z1 = random_point(), z2 = random_point();
    CHECK(std::abs(hyp_dist(T(z1), T(z2)) - hyp_dist(z1, z2)) < 1e-10);
  }
}

TEST_CASE("log and exp maps invert each other and encode distance") {
  for (int k = 0; k < 200; ++k) {
    const Complex base = random_point(), target = random_point();
    const Complex v = log_map(base, target);
    CHECK(std::abs(exp_map(base, v) - target) < 1e-9);
    CHECK(std::abs(v) / base.imag() == doctest::Approx(hyp_dist(base, target)).epsilon(1e-9));
  }
  const Complex z = random_point();
  CHECK(std::abs(log_map(z, z)) == 0.0);
  CHECK(std::abs(exp_map(z, Complex(0.0, 0.0)) - z) < 1e-14);
}

TEST_CASE("geodesic endpoints, the vertical example and midpoint equidistance") {
  const Complex i(0.0, 1.0), fi(0.0, 4.0);
  CHECK(std::abs(geodesic_combine(i, fi, 0.5) - Complex(0.0, 2.0)) < 1e-12);

  for (int k = 0; k < 100; ++k) {
    const Complex z0 = random_point(), z1 = random_point();
    CHECK(std::abs(geodesic_combine(z0, z1, 0.0) - z0) < 1e-12);
    CHECK(std::abs(geodesic_combine(z0, z1, 1.0) - z1) < 1e-10);
    const Complex mid = geodesic_combine(z0, z1, 0.5);
    const double d = hyp_dist(z0, z1);
    CHECK(hyp_dist(z0, mid) == doctest::Approx(0.5 * d).epsilon(1e-9));
    CHECK(hyp_dist(mid, z1) == doctest::Approx(0.5 * d).epsilon(1e-9));
    // Additivity along the curve at a generic interior parameter.
    const Complex q = geodesic_combine(z0, z1, 0.3);
    CHECK(hyp_dist(z0, q) == doctest::Approx(0.3 * d).epsilon(1e-8));
  }
  CHECK_THROWS_AS(geodesic_combine(i, fi, -0.1), std::domain_error);
  CHECK_THROWS_AS(geodesic_combine(i, fi, 1.1), std::domain_error);
}

TEST_CASE("energy function: values, alternate form, geodesic convexity") {
  CHECK(f_energy(Complex(0.0, 1.0)) == doctest::Approx(0.0));
  CHECK(f_energy(Complex(0.0, 2.0)) == doctest::Approx(std::log(2.0)));
  CHECK(f_energy(Complex(1.0, 1.0)) == doctest::Approx(std::log(2.0)));

  for (int k = 0; k < 200; ++k) {
    const Complex z = random_point();
    const Complex minus_inv = -1.0 / z;
    CHECK(f_energy(z) == doctest::Approx(-std::log(minus_inv.imag())).epsilon(1e-12));

    const Complex z2 = random_point();
    const double lam = 0.37;
    const double along = f_energy(geodesic_combine(z, z2, lam));
    CHECK(along <= (1.0 - lam) * f_energy(z) + lam * f_energy(z2) + 1e-10);
  }
}

TEST_CASE("barycenter: known values, equivariance, Jensen inequality") {
  WeightedPointSet pair;
  pair.points = {Complex(0.0, 1.0), Complex(0.0, 4.0)};
  pair.weights = {0.5, 0.5};
  CHECK(std::abs(barycenter(pair) - Complex(0.0, 2.0)) < 1e-9);

  WeightedPointSet triple;
  triple.points = {Complex(0.0, 1.0), Complex(0.0, 2.0), Complex(0.0, 4.0)};
  triple.weights = {0.25, 0.5, 0.25};
  // Vertical-axis barycenter is the weighted geometric mean of the heights.
  CHECK(std::abs(barycenter(triple) - Complex(0.0, 2.0)) < 1e-9);

  for (int k = 0; k < 50; ++k) {
    WeightedPointSet x;
    x.points = {random_point(), random_point(), random_point()};
    x.weights = {0.2, 0.5, 0.3};
    const Complex bar = barycenter(x);

    const MobiusMap T = random_isometry();
    WeightedPointSet tx = x;
    for (auto& p : tx.points) p = T(p);
    CHECK(std::abs(barycenter(tx) - T(bar)) < 1e-7);

    double mean_f = 0.0;
    for (std::size_t j = 0; j < x.points.size(); ++j) {
      mean_f += x.weights[j] * f_energy(x.points[j]);
    }
    CHECK(f_energy(bar) <= mean_f + 1e-8);

    // The barycenter of two points is the geodesic midpoint.
    WeightedPointSet two;
    two.points = {x.points[0], x.points[1]};
    two.weights = {0.5, 0.5};
    const Complex mid = geodesic_combine(x.points[0], x.points[1], 0.5);
    CHECK(hyp_dist(barycenter(two), mid) < 1e-8);
  }
}

TEST_CASE("double barycenter reduces to the pairwise-midpoint barycenter") {
  WeightedPointSet single;
  single.points = {Complex(0.7, 1.9)};
  single.weights = {1.0};
  CHECK(std::abs(double_barycenter(single) - single.points[0]) < 1e-9);

  // Two equal atoms i, 4i: midpoints {i, 2i, 2i, 4i} -> barycenter 2i.
  WeightedPointSet pair;
  pair.points = {Complex(0.0, 1.0), Complex(0.0, 4.0)};
  pair.weights = {0.5, 0.5};
  CHECK(std::abs(double_barycenter(pair) - Complex(0.0, 2.0)) < 1e-8);

  // Equivariance of the two-fold average.
  for (int k = 0; k < 20; ++k) {
    WeightedPointSet x;
    x.points = {random_point(), random_point()};
    x.weights = {0.4, 0.6};
    const MobiusMap T = random_isometry();
    WeightedPointSet tx = x;
    for (auto& p : tx.points) p = T(p);
    CHECK(std::abs(double_barycenter(tx) - T(double_barycenter(x))) < 1e-6);
  }
}
