#include "treeloc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace treeloc {

void QuadRule::append(const QuadRule& other) {
  const auto n = x.size(), m = other.x.size();
  x.conservativeResize(n + m);
  w.conservativeResize(n + m);
  x.tail(m) = other.x;
  w.tail(m) = other.w;
}

const QuadRule& gauss_legendre(int order) {
  if (order < 1 || order > 512) {
    throw std::invalid_argument("gauss_legendre: order out of range");
  }
  static std::mutex mu;
  static std::map<int, QuadRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  QuadRule rule;
  rule.x.resize(order);
  rule.w.resize(order);
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-based initial guess, Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.x[i] = -x;
    rule.w[i] = w;
    rule.x[n - 1 - i] = x;
    rule.w[n - 1 - i] = w;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

QuadRule panel_gauss(double lo, double hi, int order) {
  const QuadRule& base = gauss_legendre(order);
  QuadRule rule;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  rule.x = mid + half * base.x;
  rule.w = half * base.w;
  return rule;
}

QuadRule graded_panel(double lo, double hi, double r_star, double s, int order) {
  const QuadRule& base = gauss_legendre(order);
  const double beta = 1.0 / (1.0 - s);
  const double tol = 1e-12 * (hi - lo);
  QuadRule rule;
  rule.x.resize(order);
  rule.w.resize(order);
  if (r_star <= lo + tol) {
    // r = r_star + t^beta with t in [(lo-r_star)^(1-s), (hi-r_star)^(1-s)].
    const double t0 = std::pow(std::max(lo - r_star, 0.0), 1.0 - s);
    const double t1 = std::pow(hi - r_star, 1.0 - s);
    const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
    for (int k = 0; k < order; ++k) {
      const double t = mid + half * base.x[k];
      rule.x[k] = r_star + std::pow(t, beta);
      rule.w[k] = half * base.w[k] * beta * std::pow(t, beta - 1.0);
    }
  } else if (r_star >= hi - tol) {
    const double t0 = std::pow(std::max(r_star - hi, 0.0), 1.0 - s);
    const double t1 = std::pow(r_star - lo, 1.0 - s);
    const double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
    for (int k = 0; k < order; ++k) {
      const double t = mid + half * base.x[k];
      rule.x[k] = r_star - std::pow(t, beta);
      rule.w[k] = half * base.w[k] * beta * std::pow(t, beta - 1.0);
    }
  } else {
    throw std::invalid_argument("graded_panel: r_star inside the panel; split first");
  }
  return rule;
}

QuadRule singular_rule(double lo, double hi, const std::vector<double>& singular,
                       double s, int order) {
  if (!(hi > lo)) throw std::invalid_argument("singular_rule: empty interval");
  const double L = hi - lo;
  const double edge_tol = 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi));

  std::vector<double> inside;
  bool has_left = false, has_right = false;
  double left_anchor = 0.0, right_anchor = 0.0;
  for (double r : singular) {
    if (r > lo + edge_tol && r < hi - edge_tol) {
      inside.push_back(r);
    } else if (r <= lo + edge_tol && lo - r < L) {
      if (!has_left || r > left_anchor) {
        has_left = true;
        left_anchor = r;
      }
    } else if (r >= hi - edge_tol && r - hi < L) {
      if (!has_right || r < right_anchor) {
        has_right = true;
        right_anchor = r;
      }
    }
  }
  std::sort(inside.begin(), inside.end());
  inside.erase(std::unique(inside.begin(), inside.end(),
                           [&](double a, double b) { return b - a < edge_tol; }),
               inside.end());

  std::vector<double> bps{lo, hi};
  for (double r : inside) bps.push_back(r);
  for (std::size_t i = 0; i + 1 < inside.size(); ++i) {
    bps.push_back(0.5 * (inside[i] + inside[i + 1]));
  }
  // Keep every panel singular at one end at most.
  if (has_left && !inside.empty()) bps.push_back(0.5 * (lo + inside.front()));
  if (has_right && !inside.empty()) bps.push_back(0.5 * (inside.back() + hi));
  if (has_left && has_right && inside.empty()) bps.push_back(0.5 * (lo + hi));
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end(),
                        [&](double a, double b) { return b - a < edge_tol; }),
            bps.end());

  auto is_inside_pt = [&](double v) {
    for (double r : inside) {
      if (std::abs(v - r) < edge_tol) return true;
    }
    return false;
  };

  QuadRule rule;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    const double a = bps[i], b = bps[i + 1];
    if (is_inside_pt(a)) {
      rule.append(graded_panel(a, b, a, s, order));
    } else if (is_inside_pt(b)) {
      rule.append(graded_panel(a, b, b, s, order));
    } else if (has_left && std::abs(a - lo) < edge_tol) {
      rule.append(graded_panel(a, b, left_anchor, s, order));
    } else if (has_right && std::abs(b - hi) < edge_tol) {
      rule.append(graded_panel(a, b, right_anchor, s, order));
    } else {
      rule.append(panel_gauss(a, b, order));
    }
  }
  return rule;
}

QuadRule disorder_rule(const RadialDisorder& nu, const std::vector<double>& singular,
                       double s, int order) {
  QuadRule rule;
  for (const PolyPiece& piece : nu.pieces()) {
    QuadRule part = singular_rule(piece.lo, piece.hi, singular, s, order);
    for (Eigen::Index k = 0; k < part.x.size(); ++k) {
      part.w[k] *= piece.value(part.x[k]);
    }
    rule.append(part);
  }
  return rule;
}

}  // namespace treeloc
