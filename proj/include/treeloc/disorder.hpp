#pragma once

#include <cstdint>
#include <vector>

#include "treeloc/rng.hpp"

namespace treeloc {

// One polynomial piece of a density: value(x) = sum_k coeffs[k] * x^k on [lo, hi].
struct PolyPiece {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> coeffs;

  double value(double x) const;
  double mass() const;  // integral of the polynomial over [lo, hi]
};

// Bounded probability density on [-K, K] given as piecewise polynomials
// (uniform is the single piece K-support constant). Used for the radial law
// and for the root law.
class RadialDisorder {
 public:
  // Pieces must be disjoint, sorted, contained in [-K, K], non-negative on
  // their panels and integrate to 1 within 1e-12 (throws otherwise).
  RadialDisorder(std::vector<PolyPiece> pieces, double K);

  static RadialDisorder uniform(double K);

  double K() const { return K_; }
  double sup_density() const { return sup_density_; }
  const std::vector<PolyPiece>& pieces() const { return pieces_; }

  double density(double x) const;

  // Pushforward under q -> q/sqrt(2): support scales down, density scales up.
  RadialDisorder rescaled_sqrt2() const;

  // Inverse-CDF sample (binary search across pieces, bisection inside).
  double sample(RngStream& rng) const;

 private:
  std::vector<PolyPiece> pieces_;
  std::vector<double> cum_;  // cumulative piece masses
  double K_;
  double sup_density_;
};

// Finite weighted atom set {(p0, p1), weight} on [-1,1]^2: the transversal
// two-colour law. Marginal density sup-norms may be declared for laws that
// stand in for densities (used only by the large-coupling analytic bound).
struct TransversalAtom {
  double p0 = 0.0;
  double p1 = 0.0;
  double weight = 1.0;
};

class TransversalDisorder {
 public:
  explicit TransversalDisorder(std::vector<TransversalAtom> atoms,
                               double marginal_sup0 = -1.0, double marginal_sup1 = -1.0);

  // Point mass at (0,0): makes the transversal term vanish at any kappa.
  static TransversalDisorder trivial();
  // Two atoms (1,-1) and (-1,1) with equal weight.
  static TransversalDisorder two_colour_swap();
  // Tensor Gauss-Legendre discretization of the uniform product density on
  // [-1,1]^2 (order nodes per marginal); declares marginal sups 1/2.
  static TransversalDisorder uniform_product_surrogate(int order);

  const std::vector<TransversalAtom>& atoms() const { return atoms_; }
  bool has_marginal_sups() const { return marginal_sup0_ >= 0.0; }
  double marginal_sup0() const { return marginal_sup0_; }
  double marginal_sup1() const { return marginal_sup1_; }

  // Draw an atom index according to the weights.
  std::size_t sample_index(RngStream& rng) const;

 private:
  std::vector<TransversalAtom> atoms_;
  std::vector<double> cdf_;
  double marginal_sup0_;
  double marginal_sup1_;
};

// Scalar random variable for the fixed-point machinery: either explicit atoms
// or a quadrature-discretized density with a shift (representing q - E).
class ScalarDisorder {
 public:
  struct Atom {
    double value;
    double weight;
  };

  ScalarDisorder(std::vector<Atom> atoms);  // weights must sum to 1 (1e-12)
  // Discretize density with per-piece Gauss-Legendre of the given order and
  // shift every node by -shift (so values represent q - shift).
  ScalarDisorder(const RadialDisorder& density, double shift, int order = 64);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double max_abs_value() const;
  double mean() const;
  double variance() const;
  // P(|Q - Q'| >= gap) for an independent pair, and the smallest positive gap
  // between distinct atom values; both feed the finder's lower-bound device.
  double min_positive_gap() const;
  double pair_split_probability(double gap) const;
  bool symmetric_about_zero(double tol = 1e-12) const;

  ScalarDisorder shifted(double c) const;  // values + c

 private:
  std::vector<Atom> atoms_;
};

}  // namespace treeloc
