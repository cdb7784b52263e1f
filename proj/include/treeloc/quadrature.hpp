#pragma once

#include <Eigen/Dense>
#include <vector>

#include "treeloc/disorder.hpp"

namespace treeloc {

struct QuadRule {
  Eigen::ArrayXd x;
  Eigen::ArrayXd w;

  std::size_t size() const { return static_cast<std::size_t>(x.size()); }
  void append(const QuadRule& other);
};

// Gauss-Legendre nodes/weights on [-1, 1]; cached per order, thread-safe.
const QuadRule& gauss_legendre(int order);

// Plain Gauss-Legendre on [lo, hi].
QuadRule panel_gauss(double lo, double hi, int order);

// Rule on [lo, hi] for integrands with integrable |r - r_star|^{-s} blow-up
// at r_star (on either side of or inside a neighbouring panel): substitutes
// t = |r - r_star|^{1-s}, which flattens the singular factor exactly, then
// applies Gauss-Legendre in t. r_star must not lie strictly inside (lo, hi).
QuadRule graded_panel(double lo, double hi, double r_star, double s, int order);

// Composite rule on [lo, hi]: splits at interior singular points and at
// midpoints between adjacent ones, grades panels toward their singular
// endpoint, and also grades toward exterior singular points closer than one
// support width. Exact Lebesgue weights (no density factor).
QuadRule singular_rule(double lo, double hi, const std::vector<double>& singular,
                       double s, int order);

// singular_rule per density piece with weights multiplied by the density.
QuadRule disorder_rule(const RadialDisorder& nu, const std::vector<double>& singular,
                       double s, int order);

}  // namespace treeloc
