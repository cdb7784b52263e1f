#include "treeloc/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "treeloc/errors.hpp"

namespace treeloc {

Complex alpha_map(Complex zeta, double Q) {
  const double a = zeta.real(), b = zeta.imag();
  if (!(b > 0.0)) throw std::domain_error("alpha_map: Im(zeta) must be positive");
  const double n2 = a * a + b * b;
  return {(a + a / n2 - Q) / b, 1.0 / n2};
}

Complex g_map(Complex zeta, const ScalarDisorder& Q, double tol) {
  WeightedPointSet set;
  set.points.reserve(Q.atoms().size());
  set.weights.reserve(Q.atoms().size());
  for (const auto& atom : Q.atoms()) {
    set.points.push_back(alpha_map(zeta, atom.value));
    set.weights.push_back(atom.weight);
  }
  BarycenterOptions opts;
  opts.tol = tol;
  return double_barycenter(set, opts);
}

double key_functional(Complex zeta, double w, const ScalarDisorder& Q) {
  const double log_norm_zeta = std::log(std::norm(zeta));
  const Complex inv_zeta = 1.0 / zeta;
  const double log_den = std::log(std::norm(Complex(w, 0.0) - zeta));
  double acc = 0.0;
  for (const auto& atom : Q.atoms()) {
    acc += atom.weight *
           (log_norm_zeta + std::log(std::norm(w + inv_zeta - atom.value)) - log_den);
  }
  return acc;
}

double key_functional_tail(Complex zeta) { return std::log(std::norm(zeta)); }

double key_functional(Complex zeta, const UpperHalfPoint& w, const ScalarDisorder& Q) {
  if (w.at_infinity) return key_functional_tail(zeta);
  return key_functional(zeta, w.re, Q);
}

KeyVerification verify_key_estimate(Complex zeta, const ScalarDisorder& Q, const WGrid& grid) {
  auto grid_min = [&](const WGrid& g) {
    double m = key_functional_tail(zeta);
    for (int k = 0; k < g.n(); ++k) {
      m = std::min(m, key_functional(zeta, g.ws()[k], Q));
    }
    return m;
  };
  KeyVerification out;
  out.tail_value = key_functional_tail(zeta);
  out.inf_value = grid_min(grid);
  const WGrid refined(2 * grid.n());
  const double refined_min = grid_min(refined);
  const bool stable =
      std::abs(refined_min - out.inf_value) <= 0.1 * std::abs(out.inf_value);
  out.ok = out.inf_value > 0.0 && refined_min > 0.0 && stable;
  // Report the more conservative of the two minima.
  out.inf_value = std::min(out.inf_value, refined_min);
  return out;
}

namespace {

// zeta on the curve zeta + 1/zeta + E = i d with the largest imaginary part.
Complex zeta_on_symmetric_curve(double d, double E) {
  const Complex rhs(-E, d);  // zeta + 1/zeta = rhs
  const Complex disc = std::sqrt(rhs * rhs - 4.0);
  const Complex r1 = 0.5 * (rhs + disc);
  const Complex r2 = 0.5 * (rhs - disc);
  return r1.imag() >= r2.imag() ? r1 : r2;
}

ZetaCertificate finish_certificate(Complex zeta, double residual) {
  ZetaCertificate cert;
  cert.zeta = UpperHalfPoint::from(zeta);
  cert.abs_zeta = std::abs(zeta);
  cert.residual = residual;
  cert.tail_value = key_functional_tail(zeta);
  return cert;
}

}  // namespace

ZetaCertificate find_zeta_symmetric(const ScalarDisorder& q, double E, double tol) {
  if (!q.symmetric_about_zero(1e-10)) {
    throw std::invalid_argument("find_zeta_symmetric: law must be symmetric about 0");
  }
  if (!(q.variance() > 1e-14)) {
    throw std::invalid_argument("find_zeta_symmetric: law must have positive variance");
  }
  const ScalarDisorder shifted = q.shifted(-E);
  auto G = [&](double d) {
    const Complex zeta = zeta_on_symmetric_curve(d, E);
    double acc = 0.0;
    for (const auto& atom : shifted.atoms()) {
      acc += atom.weight * std::log(std::norm(alpha_map(zeta, atom.value)));
    }
    return acc;
  };

  // G -> +inf (or positive) as d -> 0 and -inf as d -> infinity: geometric
  // scan for a sign change, then bisection.
  double d_lo = 1e-8, d_hi = 0.0;
  double g_lo = G(d_lo);
  if (g_lo <= 0.0) {
    // Walk down further; the positive side can require smaller d for laws
    // concentrated near 0.
    for (int k = 0; k < 40 && g_lo <= 0.0; ++k) {
      d_lo *= 0.25;
      g_lo = G(d_lo);
    }
    if (g_lo <= 0.0) {
      std::ostringstream os;
      os << "find_zeta_symmetric: no positive endpoint; G(" << d_lo << ") = " << g_lo;
      throw SearchError(os.str());
    }
  }
  double d = d_lo;
  for (int k = 0; k < 200; ++k) {
    d *= 2.0;
    if (G(d) < 0.0) {
      d_hi = d;
      break;
    }
    d_lo = d;
  }
  if (d_hi == 0.0) {
    throw SearchError("find_zeta_symmetric: no sign change found on the curve");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (d_lo + d_hi);
    if (G(mid) > 0.0) {
      d_lo = mid;
    } else {
      d_hi = mid;
    }
    if (d_hi - d_lo < 1e-16 * std::max(1.0, d_hi)) break;
  }
  const double d_root = 0.5 * (d_lo + d_hi);
  const Complex zeta = zeta_on_symmetric_curve(d_root, E);
  const double residual = std::abs(G(d_root));
  if (residual > tol) {
    std::ostringstream os;
    os << "find_zeta_symmetric: bisection stalled with residual " << residual;
    throw SearchError(os.str());
  }
  ZetaCertificate cert = finish_certificate(zeta, residual);
  const KeyVerification kv = verify_key_estimate(zeta, shifted, WGrid(1024));
  cert.inf_value = kv.inf_value;
  return cert;
}

ZetaCertificate find_zeta_general(const ScalarDisorder& Q, double tol) {
  if (!(Q.variance() > 1e-14)) {
    throw std::invalid_argument("find_zeta_general: law must have positive variance");
  }
  const double a0 = Q.max_abs_value() + 1.0;
  const double inner_tol = 1e-12;
  auto g_of = [&](Complex zeta) { return g_map(zeta, Q, inner_tol); };

  // b0: smallest power of 2 whose top edge maps below Im = 1 everywhere.
  double b0 = 1.0;
  {
    bool ok = false;
    for (int k = 0; k < 17 && !ok; ++k) {
      ok = true;
      for (int j = 0; j <= 8; ++j) {
        const double a = -a0 + 2.0 * a0 * j / 8.0;
        if (g_of(Complex(a, b0)).imag() >= 1.0) {
          ok = false;
          break;
        }
      }
      if (!ok) b0 *= 2.0;
    }
    if (!ok) throw SearchError("find_zeta_general: no b0 with Im g < 1 up to 2^16");
  }

  // b1: the two-term lower bound on log Im g (pair-splitting probability p at
  // gap eps, minimum height 1/(a0^2+b^2)) must be positive on the bottom edge.
  const double eps = Q.min_positive_gap();
  const double p = Q.pair_split_probability(eps);
  double b1 = 0.5 * b0;
  {
    bool ok = false;
    for (int k = 0; k < 80; ++k) {
      const double bound =
          p * std::log(eps / (2.0 * b1)) + (1.0 - p) * std::log(1.0 / (a0 * a0 + b1 * b1));
      if (bound > 0.0) {
        ok = true;
        break;
      }
      b1 *= 0.5;
    }
    if (!ok) throw SearchError("find_zeta_general: no b1 with positive lower bound");
  }

  // Winding of g - i along the rectangle boundary; refine x4 once if coarse.
  auto winding_of = [&](int samples_per_side, int& samples_used) {
    std::vector<Complex> pts;
    const double lb1 = std::log(b1), lb0 = std::log(b0);
    for (int j = 0; j < samples_per_side; ++j) {
      const double t = static_cast<double>(j) / samples_per_side;
      pts.push_back(Complex(-a0 + 2.0 * a0 * t, b1));  // bottom, left->right
    }
    for (int j = 0; j < samples_per_side; ++j) {
      const double t = static_cast<double>(j) / samples_per_side;
      pts.push_back(Complex(a0, std::exp(lb1 + (lb0 - lb1) * t)));  // right, up
    }
    for (int j = 0; j < samples_per_side; ++j) {
      const double t = static_cast<double>(j) / samples_per_side;
      pts.push_back(Complex(a0 - 2.0 * a0 * t, b0));  // top, right->left
    }
    for (int j = 0; j < samples_per_side; ++j) {
      const double t = static_cast<double>(j) / samples_per_side;
      pts.push_back(Complex(-a0, std::exp(lb0 - (lb0 - lb1) * t)));  // left, down
    }
    samples_used = static_cast<int>(pts.size());
    std::vector<Complex> img(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      img[k] = g_of(pts[k]) - Complex(0.0, 1.0);
    }
    double total = 0.0;
    double max_gap = 0.0;
    for (std::size_t k = 0; k < img.size(); ++k) {
      const Complex u = img[k], v = img[(k + 1) % img.size()];
      const double dphi = std::arg(v / u);
      max_gap = std::max(max_gap, std::abs(dphi));
      total += dphi;
    }
    return std::pair<double, double>(total / (2.0 * M_PI), max_gap);
  };
  int gamma_samples = 0;
  auto [wind, gap] = winding_of(64, gamma_samples);
  if (gap > M_PI_2) {
    std::tie(wind, gap) = winding_of(256, gamma_samples);
  }
  // The map zeta -> g(zeta) - i is continuous but not holomorphic; at a regular
  // solution its local degree is sign(det J), which is -1 here (Im g decreases
  // with Im zeta while Re g increases with Re zeta).  A winding of +1 or -1
  // certifies exactly one regular enclosed solution; anything else does not.
  if (std::min(std::abs(wind - 1.0), std::abs(wind + 1.0)) > 0.25) {
    std::ostringstream os;
    os << "find_zeta_general: winding number " << wind
       << " does not certify a single solution on the search box [" << -a0 << "," << a0
       << "] x [" << b1 << "," << b0 << "]";
    throw SearchError(os.str());
  }

  // Coarse grid seed, then damped finite-difference Newton on
  // (Re g, Im g - 1) with hyperbolic merit.
  auto merit = [&](Complex zeta) { return hyp_dist(g_of(zeta), Complex(0.0, 1.0)); };
  Complex best(0.0, std::sqrt(b0 * b1));
  double best_merit = merit(best);
  auto seed_scan = [&](Complex centre, double ra, double rlogb, int na, int nb) {
    for (int i = 0; i <= na; ++i) {
      for (int j = 0; j <= nb; ++j) {
        const double a = centre.real() - ra + 2.0 * ra * i / na;
        const double lb = std::log(centre.imag()) - rlogb + 2.0 * rlogb * j / nb;
        const Complex cand(a, std::exp(lb));
        if (std::abs(a) > a0 || cand.imag() > b0 || cand.imag() < b1) continue;
        const double m = merit(cand);
        if (m < best_merit) {
          best_merit = m;
          best = cand;
        }
      }
    }
  };
  seed_scan(Complex(0.0, std::sqrt(b0 * b1)), a0, 0.5 * std::log(b0 / b1), 16, 8);

  for (int round = 0; round < 3; ++round) {
    Complex z = best;
    double m = best_merit;
    for (int it = 0; it < 60 && m > tol; ++it) {
      const Complex gz = g_of(z);
      const Eigen::Vector2d F(gz.real(), gz.imag() - 1.0);
      const double ha = 1e-6 * std::max(1.0, std::abs(z.real()));
      const double hb = 1e-6 * z.imag();
      const Complex ga = g_of(z + Complex(ha, 0.0));
      const Complex gb = g_of(z + Complex(0.0, hb));
      Eigen::Matrix2d J;
      J << (ga.real() - gz.real()) / ha, (gb.real() - gz.real()) / hb,
          (ga.imag() - gz.imag()) / ha, (gb.imag() - gz.imag()) / hb;
      if (std::abs(J.determinant()) < 1e-300) break;
      const Eigen::Vector2d step = J.partialPivLu().solve(F);
      double lambda = 1.0;
      bool accepted = false;
      for (int h = 0; h < 20; ++h) {
        Complex cand(z.real() - lambda * step[0], z.imag() - lambda * step[1]);
        if (cand.imag() > 1e-12) {
          const double mc = merit(cand);
          if (mc < m) {
            z = cand;
            m = mc;
            accepted = true;
            break;
          }
        }
        lambda *= 0.5;
      }
      if (!accepted) break;
    }
    if (m < best_merit) {
      best = z;
      best_merit = m;
    }
    if (best_merit <= tol) break;
    // Stagnation: refine the seed grid around the incumbent and retry.
    seed_scan(best, 0.25 * a0 / (round + 1.0), 0.125 * std::log(b0 / b1) / (round + 1.0),
              16, 8);
  }
  if (best_merit > tol) {
    std::ostringstream os;
    os << "find_zeta_general: Newton stagnated at residual " << best_merit;
    throw SearchError(os.str());
  }
  if (!(std::abs(best) > 1.0)) {
    std::ostringstream os;
    os << "find_zeta_general: root |zeta| = " << std::abs(best) << " <= 1";
    throw SearchError(os.str());
  }
  ZetaCertificate cert = finish_certificate(best, best_merit);
  cert.box.a0 = a0;
  cert.box.b0 = b0;
  cert.box.b1 = b1;
  cert.box.gamma_samples = gamma_samples;
  const KeyVerification kv = verify_key_estimate(best, Q, WGrid(1024));
  cert.inf_value = kv.inf_value;
  return cert;
}

}  // namespace treeloc
