#include "treeloc/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "treeloc/errors.hpp"
#include "treeloc/quadrature.hpp"

namespace treeloc {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void require_s(double s) {
  if (!(s > 0.0 && s < 0.5)) {
    throw std::domain_error("transfer: s must lie in (0, 1/2)");
  }
}

void run_rows(int n, int threads, const std::function<void(int, int)>& body) {
  if (threads <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

struct RowEntry {
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd cinf;
};

}  // namespace

TransferKernel TransferKernel::tree(double kappa, double E, double s,
                                    const RadialDisorder& nu, const TransversalDisorder& sigma,
                                    const WGrid& grid, const KernelOptions& opts) {
  require_s(s);
  if (kappa < 0.0) throw std::domain_error("transfer: kappa must be >= 0");
  TransferKernel kernel;
  kernel.grid_ = &grid;
  kernel.s_ = s;
  const int n = grid.n();
  kernel.cinf_ = Eigen::VectorXd::Zero(n);

  std::vector<std::vector<Eigen::Triplet<double>>> rows(n);
  run_rows(n, opts.threads, [&](int lo, int hi) {
    Eigen::VectorXd dense_row(n);
    for (int i = lo; i < hi; ++i) {
      dense_row.setZero();
      double inf_acc = 0.0;
      const double w = grid.ws()[i];
      for (const TransversalAtom& atom : sigma.atoms()) {
        // r-values where either branch denominator vanishes.
        const double rs0 = kSqrt2 * w + E - kappa * atom.p0;
        const double rs1 = kSqrt2 * w + E - kappa * atom.p1;
        const QuadRule rule = disorder_rule(nu, {rs0, rs1}, s, opts.quad_order);
        for (std::size_t k = 0; k < rule.size(); ++k) {
          const double r = rule.x[k];
          const double A = -kSqrt2 / (rs0 - r);
          const double B = -kSqrt2 / (rs1 - r);
          const double phip = 0.5 * (A + B);
          const double phim = 0.5 * (A - B);
          const double weight = rule.w[k] * atom.weight *
                                (std::pow(std::abs(phip), s) + std::pow(std::abs(phim), s));
          const WGrid::Stencil st = grid.stencil(phip);
          dense_row[st.i0] += weight * st.w0;
          if (st.w1 != 0.0) dense_row[st.i1] += weight * st.w1;
          inf_acc += weight * st.winf;
        }
      }
      for (int j = 0; j < n; ++j) {
        if (dense_row[j] != 0.0) rows[i].emplace_back(i, j, dense_row[j]);
      }
      kernel.cinf_[i] = inf_acc;
    }
  });

  std::vector<Eigen::Triplet<double>> all;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  all.reserve(total);
  for (const auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  kernel.M_.resize(n, n);
  kernel.M_.setFromTriplets(all.begin(), all.end());
  kernel.M_.makeCompressed();
  return kernel;
}

TransferKernel TransferKernel::chain(ChainMode mode, double E, double s,
                                     const RadialDisorder& nu, const WGrid& grid,
                                     const KernelOptions& opts) {
  require_s(s);
  TransferKernel kernel;
  kernel.grid_ = &grid;
  kernel.s_ = s;
  const RadialDisorder nu_sys = mode == ChainMode::tree_reduced ? nu.rescaled_sqrt2() : nu;
  const double E_sys = mode == ChainMode::tree_reduced ? E / kSqrt2 : E;
  const int n = grid.n();
  kernel.cinf_ = Eigen::VectorXd::Zero(n);

  std::vector<std::vector<Eigen::Triplet<double>>> rows(n);
  run_rows(n, opts.threads, [&](int lo, int hi) {
    Eigen::VectorXd dense_row(n);
    for (int i = lo; i < hi; ++i) {
      dense_row.setZero();
      double inf_acc = 0.0;
      const double w = grid.ws()[i];
      const double qs = w + E_sys;  // q where the denominator vanishes
      const QuadRule rule = disorder_rule(nu_sys, {qs}, s, opts.quad_order);
      for (std::size_t k = 0; k < rule.size(); ++k) {
        const double q = rule.x[k];
        const double phi = -1.0 / (qs - q);
        const double weight = rule.w[k] * std::pow(std::abs(qs - q), -s);
        const WGrid::Stencil st = grid.stencil(phi);
        dense_row[st.i0] += weight * st.w0;
        if (st.w1 != 0.0) dense_row[st.i1] += weight * st.w1;
        inf_acc += weight * st.winf;
      }
      for (int j = 0; j < n; ++j) {
        if (dense_row[j] != 0.0) rows[i].emplace_back(i, j, dense_row[j]);
      }
      kernel.cinf_[i] = inf_acc;
    }
  });

  std::vector<Eigen::Triplet<double>> all;
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  all.reserve(total);
  for (const auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  kernel.M_.resize(n, n);
  kernel.M_.setFromTriplets(all.begin(), all.end());
  kernel.M_.makeCompressed();
  return kernel;
}

GridFunction TransferKernel::apply(const GridFunction& f) const {
  if (f.grid != grid_) {
    throw std::invalid_argument("TransferKernel::apply: grid mismatch");
  }
  GridFunction out;
  out.grid = grid_;
  out.values =
      (M_ * f.values.matrix()).array() + cinf_.array() * f.value_at_infinity;
  out.value_at_infinity = 0.0;
  return out;
}

GridFunction apply_T(const GridFunction& f, double kappa, double E, double s,
                     const RadialDisorder& nu, const TransversalDisorder& sigma,
                     const KernelOptions& opts) {
  return TransferKernel::tree(kappa, E, s, nu, sigma, *f.grid, opts).apply(f);
}

GridFunction apply_T_1d(const GridFunction& f, double E, double s, const RadialDisorder& nu,
                        ChainMode mode, const KernelOptions& opts) {
  return TransferKernel::chain(mode, E, s, nu, *f.grid, opts).apply(f);
}

std::vector<double> iterate_norms(const TransferKernel& kernel, int m_max) {
  std::vector<double> norms;
  norms.reserve(m_max + 1);
  GridFunction f = GridFunction::ones(kernel.grid());
  norms.push_back(f.sup());
  for (int k = 1; k <= m_max; ++k) {
    f = kernel.apply(f);
    norms.push_back(f.sup());
  }
  return norms;
}

double operator_norm_bound(double s, double K, double sup_nu) {
  return 4.0 * std::pow(2.0, 1.0 - 0.5 * s) * sup_nu * std::pow(K, 1.0 - s) / (1.0 - s);
}

double bounding_phi(Complex zeta, double s, double w) {
  return std::pow(std::abs(Complex(w, 0.0) - zeta), -s);
}

double ratio_F_system(Complex zeta, double w, double s, double E_sys,
                      const ScalarDisorder& q_sys) {
  const Complex inv_zeta = 1.0 / zeta;
  const double num = std::abs(Complex(w, 0.0) - zeta);
  double acc = 0.0;
  for (const auto& atom : q_sys.atoms()) {
    const double den = std::abs(zeta * (w + inv_zeta + E_sys - atom.value));
    acc += atom.weight * std::pow(num / den, s);
  }
  return acc;
}

double ratio_F(Complex zeta, double w, double s, double E, const RadialDisorder& nu,
               int quad_order) {
  const ScalarDisorder q_sys(nu.rescaled_sqrt2(), 0.0, quad_order);
  return ratio_F_system(zeta, w, s, E / kSqrt2, q_sys);
}

double dF_ds_at_zero_system(Complex zeta, double w, double E_sys,
                            const ScalarDisorder& q_sys) {
  const Complex inv_zeta = 1.0 / zeta;
  const double lnum = std::log(std::abs(Complex(w, 0.0) - zeta));
  double acc = 0.0;
  for (const auto& atom : q_sys.atoms()) {
    acc += atom.weight *
           (lnum - std::log(std::abs(zeta * (w + inv_zeta + E_sys - atom.value))));
  }
  return acc;
}

double dF_ds_at_zero(Complex zeta, double w, double E, const RadialDisorder& nu,
                     int quad_order) {
  const ScalarDisorder q_sys(nu.rescaled_sqrt2(), 0.0, quad_order);
  return dF_ds_at_zero_system(zeta, w, E / kSqrt2, q_sys);
}

double bound_A_system(Complex zeta, double s, double E_sys_lo, double E_sys_hi,
                      const RadialDisorder& nu_sys, const WGrid& grid, int energy_samples,
                      int quad_order) {
  require_s(s);
  double sup_term = 0.0;
  for (int e = 0; e < energy_samples; ++e) {
    const double E_sys =
        energy_samples == 1
            ? 0.5 * (E_sys_lo + E_sys_hi)
            : E_sys_lo + (E_sys_hi - E_sys_lo) * e / (energy_samples - 1.0);
    for (int i = 0; i < grid.n(); ++i) {
      const double w = grid.ws()[i];
      const double qs = w + E_sys;  // singular point of the expectation
      const QuadRule rule = disorder_rule(nu_sys, {qs}, s, quad_order);
      double acc = 0.0;
      for (std::size_t k = 0; k < rule.size(); ++k) {
        const double q = rule.x[k];
        acc += rule.w[k] * std::pow(std::abs(Complex(q - E_sys, 0.0) - zeta), s) *
               std::pow(std::abs(qs - q), -s);
      }
      sup_term = std::max(sup_term, acc);
    }
  }
  // The expectation term vanishes as |w| -> infinity, so the tail adds 1 + 0.
  return 1.0 + sup_term;
}

double bound_A(Complex zeta, double s, double E_lo, double E_hi, const RadialDisorder& nu,
               const WGrid& grid, int energy_samples, int quad_order) {
  return bound_A_system(zeta, s, E_lo / kSqrt2, E_hi / kSqrt2, nu.rescaled_sqrt2(), grid,
                        energy_samples, quad_order);
}

namespace {

// Nested-quadrature evaluation of (T^m 1)(w) at complex energy E + i eps.
double pointwise_iterate(Complex w, int m, double kappa, Complex z, double s,
                         const RadialDisorder& nu, const TransversalDisorder& sigma,
                         int order) {
  if (m == 0) return 1.0;
  double acc = 0.0;
  for (const TransversalAtom& atom : sigma.atoms()) {
    // Split/grade the r-rule at the real parts of the two denominator roots;
    // for interior w (or eps > 0) the integrand is smooth but sharply peaked
    // there, and the graded panels resolve the peak as well.
    const Complex rs0 = kSqrt2 * w + z - kappa * atom.p0;
    const Complex rs1 = kSqrt2 * w + z - kappa * atom.p1;
    const QuadRule rule = disorder_rule(nu, {rs0.real(), rs1.real()}, s, order);
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double r = rule.x[k];
      const Complex A = -kSqrt2 / (rs0 - r);
      const Complex B = -kSqrt2 / (rs1 - r);
      const Complex phip = 0.5 * (A + B);
      const Complex phim = 0.5 * (A - B);
      const double factor =
          std::pow(std::abs(phip), s) + std::pow(std::abs(phim), s);
      const double inner =
          m == 1 ? 1.0
                 : pointwise_iterate(phip, m - 1, kappa, z, s, nu, sigma, order);
      acc += rule.w[k] * atom.weight * factor * inner;
    }
  }
  return acc;
}

}  // namespace

double apply_T_pointwise_complex(Complex w, int m, double kappa, double E, double epsilon,
                                 double s, const RadialDisorder& nu,
                                 const TransversalDisorder& sigma, int quad_order) {
  require_s(s);
  if (m < 0 || m > 4) {
    throw ResourceError("apply_T_pointwise_complex: m must lie in [0, 4]");
  }
  if (epsilon < 0.0) {
    throw std::domain_error("apply_T_pointwise_complex: epsilon must be >= 0");
  }
  return pointwise_iterate(w, m, kappa, Complex(E, epsilon), s, nu, sigma, quad_order);
}

}  // namespace treeloc
