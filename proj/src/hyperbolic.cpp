#include "treeloc/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "treeloc/errors.hpp"
#include "treeloc/rng.hpp"

namespace treeloc {

namespace {

constexpr double kEqTol = 1e-12;

void require_interior(Complex z, const char* who) {
  if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    std::ostringstream os;
    os << who << ": point " << z.real() << " + " << z.imag()
       << "i is not in the open upper half-plane";
    throw std::domain_error(os.str());
  }
}

}  // namespace

bool points_equal(const UpperHalfPoint& a, const UpperHalfPoint& b) {
  if (a.at_infinity || b.at_infinity) return a.at_infinity && b.at_infinity;
  return std::abs(a.re - b.re) <= kEqTol && std::abs(a.im - b.im) <= kEqTol;
}

MobiusMap MobiusMap::normalized(double a, double b, double c, double d) {
  const double det = a * d - b * c;
  if (!(det > 0.0)) {
    throw std::invalid_argument("MobiusMap: determinant must be positive");
  }
  const double s = 1.0 / std::sqrt(det);
  return {a * s, b * s, c * s, d * s};
}

Complex MobiusMap::operator()(Complex z) const {
  return (a * z + b) / (c * z + d);
}

UpperHalfPoint MobiusMap::operator()(const UpperHalfPoint& z) const {
  if (z.at_infinity) {
    if (c == 0.0) return UpperHalfPoint::infinity();
    return {a / c, 0.0, false};
  }
  const Complex den = c * z.as_complex() + d;
  if (std::abs(den) == 0.0) return UpperHalfPoint::infinity();
  return UpperHalfPoint::from((*this)(z.as_complex()));
}

MobiusMap MobiusMap::inverse() const { return {d, -b, -c, a}; }

MobiusMap MobiusMap::after(const MobiusMap& f) const {
  return {a * f.a + b * f.c, a * f.b + b * f.d,
          c * f.a + d * f.c, c * f.b + d * f.d};
}

double hyp_dist(Complex z1, Complex z2) {
  require_interior(z1, "hyp_dist");
  require_interior(z2, "hyp_dist");
  // 2 asinh(|z1-z2| / (2 sqrt(y1 y2))) == arcosh(1 + |z1-z2|^2/(2 y1 y2)).
  const double num = std::abs(z1 - z2);
  return 2.0 * std::asinh(num / (2.0 * std::sqrt(z1.imag() * z2.imag())));
}

double hyp_dist(const UpperHalfPoint& z1, const UpperHalfPoint& z2) {
  if (z1.at_infinity || z2.at_infinity) {
    throw std::domain_error("hyp_dist: infinity is not an interior point");
  }
  return hyp_dist(z1.as_complex(), z2.as_complex());
}

Complex log_map(Complex base, Complex target) {
  require_interior(base, "log_map");
  require_interior(target, "log_map");
  const Complex I(0.0, 1.0);
  // Normalize base to i, pass to the unit-disk chart centred there.
  const Complex xt = (target - base.real()) / base.imag();
  const Complex w = (xt - I) / (xt + I);
  const double r = std::abs(w);
  if (r < 1e-300) return {0.0, 0.0};
  const double d = 2.0 * std::atanh(r);
  const Complex vt = I * d * (w / r);
  return vt * base.imag();
}

Complex exp_map(Complex base, Complex v) {
  require_interior(base, "exp_map");
  const Complex I(0.0, 1.0);
  const Complex vt = v / base.imag();
  const double d = std::abs(vt);
  if (d < 1e-300) return base;
  const Complex w = -I * std::tanh(d / 2.0) * (vt / d);
  const Complex xt = I * (1.0 + w) / (1.0 - w);
  return Complex(xt.real() * base.imag() + base.real(), xt.imag() * base.imag());
}

Complex geodesic_combine(Complex z0, Complex z1, double lambda) {
  require_interior(z0, "geodesic_combine");
  require_interior(z1, "geodesic_combine");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::domain_error("geodesic_combine: lambda must lie in [0,1]");
  }
  if (std::abs(z0 - z1) < 1e-300) return z0;
  // Conjugate by an isometry taking z0 -> i and z1 -> i e^d, interpolate on
  // the imaginary axis, and map back: no vertical/circular case split.
  const double y0 = z0.imag();
  const MobiusMap to_i = MobiusMap::normalized(1.0, -z0.real(), 0.0, y0);
  const Complex z1p = to_i(z1);
  // Rotation about i with R(z1') on the imaginary axis: tan 2θ = 2x/(|z|²-1).
  double theta = 0.5 * std::atan2(2.0 * z1p.real(), std::norm(z1p) - 1.0);
  MobiusMap rot{std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta)};
  Complex img = rot(z1p);
  if (img.imag() < 1.0) {
    theta += M_PI_2;
    rot = MobiusMap{std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta)};
    img = rot(z1p);
  }
  const double d = std::log(img.imag());
  const MobiusMap fwd = rot.after(to_i);
  return fwd.inverse()(Complex(0.0, std::exp(lambda * d)));
}

double f_energy(Complex z) {
  require_interior(z, "f_energy");
  return std::log(std::norm(z) / z.imag());
}

namespace {

void validate_set(const WeightedPointSet& x, const char* who) {
  if (x.points.empty() || x.points.size() != x.weights.size()) {
    throw std::invalid_argument(std::string(who) + ": empty set or size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.points.size(); ++i) {
    if (!(x.points[i].imag() > 0.0)) {
      throw std::invalid_argument(std::string(who) + ": all points need Im > 0");
    }
    if (x.weights[i] < -1e-15) {
      throw std::invalid_argument(std::string(who) + ": negative weight");
    }
    sum += x.weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument(std::string(who) + ": weights must sum to 1");
  }
}

// Weighted mean of log-maps at z: the (negated) Karcher gradient direction.
Complex mean_log(const WeightedPointSet& x, Complex z) {
  Complex g(0.0, 0.0);
  for (std::size_t i = 0; i < x.points.size(); ++i) {
    g += x.weights[i] * log_map(z, x.points[i]);
  }
  return g;
}

// Karcher energy (1/2) sum_i w_i d(z, x_i)^2: the line-search merit.
double karcher_energy(const WeightedPointSet& x, Complex z) {
  double F = 0.0;
  for (std::size_t i = 0; i < x.points.size(); ++i) {
    const double d = hyp_dist(z, x.points[i]);
    F += 0.5 * x.weights[i] * d * d;
  }
  return F;
}

}  // namespace

Complex barycenter(const WeightedPointSet& x, const BarycenterOptions& opts) {
  validate_set(x, "barycenter");
  if (x.points.size() == 1) return x.points[0];

  // Start at the chart-mean with geometric-mean height: exact for collinear
  // vertical configurations and a good seed elsewhere.
  double mre = 0.0, mlogim = 0.0;
  for (std::size_t i = 0; i < x.points.size(); ++i) {
    mre += x.weights[i] * x.points[i].real();
    mlogim += x.weights[i] * std::log(x.points[i].imag());
  }
  Complex z(mre, std::exp(mlogim));

  Complex grad = mean_log(x, z);
  double gnorm = std::abs(grad) / z.imag();
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (gnorm <= opts.tol) return z;
    // Far from the minimizer, certify progress through an Armijo decrease of
    // the (geodesically convex) energy: gradient-norm descent alone can cycle
    // for widely spread point sets. Near the minimizer the energy sits at its
    // rounding floor, so switch to the halved-step fixed-point iteration,
    // which is a local contraction and drives the gradient further down.
    const bool global_phase = gnorm > 0.05;
    const double F0 = global_phase ? karcher_energy(x, z) : 0.0;
    bool advanced = false;
    double step = 1.0;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      const Complex cand = exp_map(z, step * grad);
      const Complex cgrad = mean_log(x, cand);
      const double cnorm = std::abs(cgrad) / cand.imag();
      const bool accept =
          global_phase ? karcher_energy(x, cand) <= F0 - 1e-4 * step * gnorm * gnorm
                       : cnorm <= gnorm * (1.0 + 1e-12);
      if (accept) {
        z = cand;
        grad = cgrad;
        gnorm = cnorm;
        advanced = true;
        break;
      }
      step *= 0.5;
    }
    if (!advanced) {
      // No step certifies further progress: arithmetic floor reached.
      if (gnorm <= opts.tol * 100.0) return z;
      break;
    }
  }
  if (gnorm <= opts.tol * 100.0) return z;  // near-miss at the iteration cap
  std::ostringstream os;
  os << "barycenter: no convergence; last iterate " << z.real() << " + " << z.imag()
     << "i, gradient norm " << gnorm;
  throw ConvergenceError(os.str());
}

Complex double_barycenter(const WeightedPointSet& x, const BarycenterOptions& opts,
                          std::size_t atom_cap, std::uint64_t subsample_seed) {
  validate_set(x, "double_barycenter");
  const std::size_t n = x.points.size();
  WeightedPointSet mids;
  if (n <= atom_cap) {
    mids.points.reserve(n * (n + 1) / 2);
    mids.weights.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      mids.points.push_back(x.points[i]);
      mids.weights.push_back(x.weights[i] * x.weights[i]);
      for (std::size_t j = i + 1; j < n; ++j) {
        mids.points.push_back(geodesic_combine(x.points[i], x.points[j], 0.5));
        mids.weights.push_back(2.0 * x.weights[i] * x.weights[j]);
      }
    }
  } else {
    // i.i.d. pair subsampling with a fixed seed beyond the atom cap.
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x.weights[i];
      cdf[i] = acc;
    }
    RngStream rng(subsample_seed, 0);
    auto draw = [&]() {
      const double u = rng.next_unit() * acc;
      return static_cast<std::size_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    };
    const std::size_t m = atom_cap * atom_cap;
    mids.points.reserve(m);
    mids.weights.assign(m, 1.0 / static_cast<double>(m));
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = draw(), j = draw();
      mids.points.push_back(i == j ? x.points[i]
                                   : geodesic_combine(x.points[i], x.points[j], 0.5));
    }
  }
  return barycenter(mids, opts);
}

}  // namespace treeloc
