#pragma once

#include <complex>

#include "treeloc/disorder.hpp"
#include "treeloc/grid.hpp"
#include "treeloc/hyperbolic.hpp"

namespace treeloc {

// alpha(zeta, Q) = (1/b)(a + a/(a^2+b^2) - Q) + i/(a^2+b^2), zeta = a + ib.
// Herglotz building block of the fixed-point equation; Im(zeta) <= 0 is a
// domain error.
Complex alpha_map(Complex zeta, double Q);

// Double-average barycenter of {alpha_map(zeta, Q_i)} under Q's weights.
Complex g_map(Complex zeta, const ScalarDisorder& Q, double tol = 1e-12);

// E[ log( |zeta|^2 |w + 1/zeta - Q|^2 / |w - zeta|^2 ) ]; the quantity whose
// strict positivity (in w, including the tail) drives every contraction
// bound. The integrand is smooth: |w + 1/zeta - Q| >= |Im(1/zeta)| > 0.
double key_functional(Complex zeta, double w, const ScalarDisorder& Q);
// Limit value as |w| -> infinity.
double key_functional_tail(Complex zeta);
// Real-or-infinity dispatcher.
double key_functional(Complex zeta, const UpperHalfPoint& w, const ScalarDisorder& Q);

struct KeyVerification {
  double inf_value = 0.0;      // min over grid nodes and the tail
  double tail_value = 0.0;
  bool ok = false;             // inf > 0 and mesh-refinement stable (<10%)
};

// Evaluates key_functional over the grid plus the tail; the ok flag also
// requires that doubling the grid moves the minimum by less than 10%.
KeyVerification verify_key_estimate(Complex zeta, const ScalarDisorder& Q, const WGrid& grid);

struct ZetaCertificate {
  UpperHalfPoint zeta;
  double abs_zeta = 0.0;
  double residual = 0.0;    // defining-equation residual, see each finder
  double inf_value = 0.0;   // verified infimum of the key functional
  double tail_value = 0.0;  // 2 log |zeta|

  // Search-box diagnostics (general finder only; zeros otherwise).
  struct SearchBox {
    double a0 = 0.0, b0 = 0.0, b1 = 0.0;
    int gamma_samples = 0;
  } box;
};

// Symmetric-law finder: for q symmetric about 0, walks the curve
// zeta(d) + 1/zeta(d) + E = i d (root of largest imaginary part) and solves
// E[ log|alpha(zeta(d), q - E)|^2 ] = 0 by bracketing + bisection in d.
// residual = |E log|alpha|^2| at the returned point. On this curve the
// fixed-point identity g(zeta) = i holds exactly only when |alpha| is a.s.
// constant (e.g. two-point laws); the log-moment equation is the finder's
// defining contract.
ZetaCertificate find_zeta_symmetric(const ScalarDisorder& q, double E, double tol = 1e-9);

// General finder: rectangle search box [-a0, a0] x [b1, b0], winding-number
// certificate that g - i encloses 0 on the boundary, then damped Newton with
// finite-difference Jacobian from the best coarse-grid point.
// residual = hyp_dist(g_map(zeta), i) <= tol.
ZetaCertificate find_zeta_general(const ScalarDisorder& Q, double tol = 1e-9);

}  // namespace treeloc
