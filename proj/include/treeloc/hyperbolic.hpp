#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace treeloc {

using Complex = std::complex<double>;

// Point of the closed upper half-plane together with a distinguished point at
// infinity. Interior points (im > 0) are the currency of the geometry
// operations; boundary points (im == 0) and the infinity point only occur as
// arguments of the transfer-operator machinery.
struct UpperHalfPoint {
  double re = 0.0;
  double im = 0.0;
  bool at_infinity = false;

  static UpperHalfPoint infinity() { return {0.0, 0.0, true}; }
  static UpperHalfPoint from(Complex z) { return {z.real(), z.imag(), false}; }
  Complex as_complex() const { return {re, im}; }
  bool interior() const { return !at_infinity && im > 0.0; }
};

// Equality within 1e-12 in both coordinates (infinity equal only to infinity).
bool points_equal(const UpperHalfPoint& a, const UpperHalfPoint& b);

struct WeightedPointSet {
  std::vector<Complex> points;   // all with positive imaginary part
  std::vector<double> weights;   // non-negative, summing to 1 within 1e-12
};

// Real Moebius transformation z -> (az+b)/(cz+d) with ad - bc = 1; the
// isometry group of the hyperbolic upper half-plane.
struct MobiusMap {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  // Rescales (a,b,c,d) to determinant one; requires ad - bc > 0.
  static MobiusMap normalized(double a, double b, double c, double d);

  Complex operator()(Complex z) const;
  UpperHalfPoint operator()(const UpperHalfPoint& z) const;  // handles infinity
  MobiusMap inverse() const;
  MobiusMap after(const MobiusMap& first) const;  // this ∘ first
};

// Hyperbolic distance arcosh(1 + |z1-z2|^2 / (2 Im z1 Im z2)), evaluated in
// the equivalent 2·asinh form which is stable for nearby points.
double hyp_dist(Complex z1, Complex z2);
double hyp_dist(const UpperHalfPoint& z1, const UpperHalfPoint& z2);

// Riemannian logarithm at base: tangent vector v (as a complex number in the
// half-plane chart) with exp_map(base, v) == target and |v| / Im(base) equal
// to the hyperbolic distance.
Complex log_map(Complex base, Complex target);
Complex exp_map(Complex base, Complex v);

// gamma(lambda) on the connecting geodesic, gamma(0) = z0, gamma(1) = z1.
// lambda outside [0,1] is a domain error.
Complex geodesic_combine(Complex z0, Complex z1, double lambda);

// log(|z|^2 / Im z) = -log(Im(-1/z)); geodesically convex, minimized at i.
double f_energy(Complex z);

struct BarycenterOptions {
  double tol = 1e-10;         // tangent-space gradient norm target
  int max_iterations = 100000;
  int max_halvings = 30;
};

// Karcher barycenter: the unique minimizer of z -> sum_i w_i d(x_i, z)^2.
// Gradient descent with exact exp/log maps, step 1, halving the step whenever
// the gradient norm would increase; stops at gradient norm <= tol (or when
// the iterate moves by less than 0.01*tol, the rounding floor).
Complex barycenter(const WeightedPointSet& x, const BarycenterOptions& opts = {});

// Barycenter of the n^2 pairwise geodesic midpoints (independent-copy law).
// Up to atom_cap source atoms the full product set is used; beyond it,
// atom_cap^2 pairs are drawn i.i.d. with a fixed seed.
Complex double_barycenter(const WeightedPointSet& x, const BarycenterOptions& opts = {},
                          std::size_t atom_cap = 512, std::uint64_t subsample_seed = 12345);

}  // namespace treeloc
