#include "treeloc/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treeloc/quadrature.hpp"

namespace treeloc {

double PolyPiece::value(double x) const {
  double v = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) v = v * x + coeffs[k];
  return v;
}

double PolyPiece::mass() const {
  double m = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    m += coeffs[k] / (k + 1.0) * (std::pow(hi, k + 1.0) - std::pow(lo, k + 1.0));
  }
  return m;
}

RadialDisorder::RadialDisorder(std::vector<PolyPiece> pieces, double K)
    : pieces_(std::move(pieces)), K_(K) {
  if (!(K > 0.0) || pieces_.empty()) {
    throw std::invalid_argument("RadialDisorder: need K > 0 and at least one piece");
  }
  std::sort(pieces_.begin(), pieces_.end(),
            [](const PolyPiece& a, const PolyPiece& b) { return a.lo < b.lo; });
  double total = 0.0;
  sup_density_ = 0.0;
  cum_.clear();
  double prev_hi = -K;
  for (const PolyPiece& p : pieces_) {
    if (!(p.hi > p.lo) || p.lo < -K - 1e-12 || p.hi > K + 1e-12 || p.lo < prev_hi - 1e-12) {
      throw std::invalid_argument("RadialDisorder: pieces must be sorted, disjoint, within [-K, K]");
    }
    prev_hi = p.hi;
    // Sample densely for the sup and to reject negative densities.
    const int ns = 512;
    for (int i = 0; i <= ns; ++i) {
      const double x = p.lo + (p.hi - p.lo) * i / ns;
      const double v = p.value(x);
      if (v < -1e-12) throw std::invalid_argument("RadialDisorder: negative density");
      sup_density_ = std::max(sup_density_, v);
    }
    total += p.mass();
    cum_.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("RadialDisorder: density must integrate to 1");
  }
}

RadialDisorder RadialDisorder::uniform(double K) {
  return RadialDisorder({PolyPiece{-K, K, {1.0 / (2.0 * K)}}}, K);
}

double RadialDisorder::density(double x) const {
  for (const PolyPiece& p : pieces_) {
    if (x >= p.lo && x <= p.hi) return p.value(x);
  }
  return 0.0;
}

RadialDisorder RadialDisorder::rescaled_sqrt2() const {
  const double r2 = std::sqrt(2.0);
  std::vector<PolyPiece> out;
  out.reserve(pieces_.size());
  for (const PolyPiece& p : pieces_) {
    PolyPiece q;
    q.lo = p.lo / r2;
    q.hi = p.hi / r2;
    q.coeffs.resize(p.coeffs.size());
    // density(y) = sqrt2 * original(sqrt2 * y)
    double scale = r2;
    for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
      q.coeffs[k] = p.coeffs[k] * scale;
      scale *= r2;
    }
    out.push_back(std::move(q));
  }
  return RadialDisorder(std::move(out), K_ / r2);
}

double RadialDisorder::sample(RngStream& rng) const {
  const double u = rng.next_unit();
  std::size_t pi =
      std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
  if (pi >= pieces_.size()) pi = pieces_.size() - 1;
  const PolyPiece& p = pieces_[pi];
  const double base = pi == 0 ? 0.0 : cum_[pi - 1];
  const double target = u - base;  // mass to accumulate inside this piece
  if (p.coeffs.size() == 1 && p.coeffs[0] > 0.0) {
    // Constant density: exact inverse, no iteration (the Monte-Carlo hot path).
    const double x = p.lo + target / p.coeffs[0];
    return std::min(std::max(x, p.lo), p.hi);
  }
  // CDF inside the piece is monotone: bisection is robust for any polynomial.
  auto cdf = [&](double x) {
    double m = 0.0;
    for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
      m += p.coeffs[k] / (k + 1.0) * (std::pow(x, k + 1.0) - std::pow(p.lo, k + 1.0));
    }
    return m;
  };
  double lo = p.lo, hi = p.hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TransversalDisorder::TransversalDisorder(std::vector<TransversalAtom> atoms,
                                         double marginal_sup0, double marginal_sup1)
    : atoms_(std::move(atoms)), marginal_sup0_(marginal_sup0), marginal_sup1_(marginal_sup1) {
  if (atoms_.empty()) throw std::invalid_argument("TransversalDisorder: no atoms");
  double sum = 0.0;
  cdf_.clear();
  for (const TransversalAtom& a : atoms_) {
    if (std::abs(a.p0) > 1.0 + 1e-12 || std::abs(a.p1) > 1.0 + 1e-12 || a.weight < 0.0) {
      throw std::invalid_argument("TransversalDisorder: atoms must lie in [-1,1]^2 with weight >= 0");
    }
    sum += a.weight;
    cdf_.push_back(sum);
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("TransversalDisorder: weights must sum to 1");
  }
}

TransversalDisorder TransversalDisorder::trivial() {
  return TransversalDisorder({TransversalAtom{0.0, 0.0, 1.0}});
}

TransversalDisorder TransversalDisorder::two_colour_swap() {
  return TransversalDisorder(
      {TransversalAtom{1.0, -1.0, 0.5}, TransversalAtom{-1.0, 1.0, 0.5}});
}

TransversalDisorder TransversalDisorder::uniform_product_surrogate(int order) {
  const QuadRule& gl = gauss_legendre(order);
  std::vector<TransversalAtom> atoms;
  atoms.reserve(static_cast<std::size_t>(order) * order);
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      // Each marginal weight sums to 2 over [-1,1]; density 1/2 each.
      atoms.push_back({gl.x[i], gl.x[j], 0.25 * gl.w[i] * gl.w[j]});
    }
  }
  return TransversalDisorder(std::move(atoms), 0.5, 0.5);
}

std::size_t TransversalDisorder::sample_index(RngStream& rng) const {
  const double u = rng.next_unit();
  std::size_t i = std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
  return std::min(i, atoms_.size() - 1);
}

ScalarDisorder::ScalarDisorder(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("ScalarDisorder: no atoms");
  double sum = 0.0;
  for (const Atom& a : atoms_) {
    if (a.weight < 0.0) throw std::invalid_argument("ScalarDisorder: negative weight");
    sum += a.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("ScalarDisorder: weights must sum to 1");
  }
}

ScalarDisorder::ScalarDisorder(const RadialDisorder& density, double shift, int order) {
  const QuadRule rule = disorder_rule(density, {}, 0.0, order);
  atoms_.reserve(rule.size());
  double sum = 0.0;
  for (Eigen::Index k = 0; k < rule.x.size(); ++k) {
    sum += rule.w[k];
  }
  for (Eigen::Index k = 0; k < rule.x.size(); ++k) {
    if (rule.w[k] <= 0.0) continue;
    atoms_.push_back({rule.x[k] - shift, rule.w[k] / sum});
  }
}

double ScalarDisorder::max_abs_value() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m = std::max(m, std::abs(a.value));
  return m;
}

double ScalarDisorder::mean() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight * a.value;
  return m;
}

double ScalarDisorder::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const Atom& a : atoms_) v += a.weight * (a.value - m) * (a.value - m);
  return v;
}

double ScalarDisorder::min_positive_gap() const {
  std::vector<double> vals;
  for (const Atom& a : atoms_) vals.push_back(a.value);
  std::sort(vals.begin(), vals.end());
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    const double g = vals[i + 1] - vals[i];
    if (g > 1e-14 && (gap == 0.0 || g < gap)) gap = g;
  }
  return gap;
}

double ScalarDisorder::pair_split_probability(double gap) const {
  double p = 0.0;
  for (const Atom& a : atoms_) {
    for (const Atom& b : atoms_) {
      if (std::abs(a.value - b.value) >= gap) p += a.weight * b.weight;
    }
  }
  return p;
}

bool ScalarDisorder::symmetric_about_zero(double tol) const {
  auto weight_at = [&](double v) {
    double w = 0.0;
    for (const Atom& b : atoms_) {
      if (std::abs(b.value - v) <= tol) w += b.weight;
    }
    return w;
  };
  for (const Atom& a : atoms_) {
    if (std::abs(weight_at(-a.value) - weight_at(a.value)) > 1e-9) return false;
  }
  return true;
}

ScalarDisorder ScalarDisorder::shifted(double c) const {
  std::vector<Atom> out = atoms_;
  for (Atom& a : out) a.value += c;
  return ScalarDisorder(std::move(out));
}

}  // namespace treeloc
