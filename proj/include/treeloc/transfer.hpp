#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <vector>

#include "treeloc/disorder.hpp"
#include "treeloc/grid.hpp"
#include "treeloc/hyperbolic.hpp"

namespace treeloc {

// Which one-dimensional convention a kernel uses: the tree-reduced system
// (energy E/sqrt(2), pushforward disorder under q -> q/sqrt(2)) or the plain
// half-line chain (E and the disorder as given).
enum class ChainMode { tree_reduced, plain };

struct KernelOptions {
  int quad_order = 64;  // Gauss-Legendre points per quadrature panel
  int threads = 1;      // row-parallel kernel assembly
};

// Transfer operator restricted to a WGrid, precompiled to a sparse matrix
// plus an infinity-node column: applying the operator is a mat-vec. Rows are
// assembled independently (deterministically, whatever the thread count).
class TransferKernel {
 public:
  // Full two-colour operator at real energy E:
  // (Tf)(w) = E_sigma Int f(phi+) (|phi+|^s + |phi-|^s) nu(r) dr,
  // phi+- = ((-1/(w+(E-r-kappa p0)/sqrt2)) -++ (-1/(w+(E-r-kappa p1)/sqrt2)))/2.
  static TransferKernel tree(double kappa, double E, double s, const RadialDisorder& nu,
                             const TransversalDisorder& sigma, const WGrid& grid,
                             const KernelOptions& opts = {});

  // Single-kernel one-dimensional operator
  // (Tf)(w) = Int f(-1/(w+E'-q)) |w+E'-q|^{-s} nu'(q) dq
  // with (E', nu') fixed by the mode.
  static TransferKernel chain(ChainMode mode, double E, double s, const RadialDisorder& nu,
                              const WGrid& grid, const KernelOptions& opts = {});

  GridFunction apply(const GridFunction& f) const;
  const WGrid& grid() const { return *grid_; }
  double s() const { return s_; }

 private:
  const WGrid* grid_ = nullptr;
  double s_ = 0.0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> M_;
  Eigen::VectorXd cinf_;
};

// One-shot conveniences over the kernel builders.
GridFunction apply_T(const GridFunction& f, double kappa, double E, double s,
                     const RadialDisorder& nu, const TransversalDisorder& sigma,
                     const KernelOptions& opts = {});
GridFunction apply_T_1d(const GridFunction& f, double E, double s, const RadialDisorder& nu,
                        ChainMode mode, const KernelOptions& opts = {});

// Sup norms of iterates: (||T^k 1||_inf)_{k=0..m_max}, k = 0 giving 1.
std::vector<double> iterate_norms(const TransferKernel& kernel, int m_max);

// Uniform operator-norm bound 4 * 2^{1-s/2} * ||nu||_inf * K^{1-s} / (1-s).
double operator_norm_bound(double s, double K, double sup_nu);

// |w - zeta|^{-s}: the comparison function.
double bounding_phi(Complex zeta, double s, double w);

// F ratio in a fixed one-dimensional convention (E_sys, q ~ q_sys):
// E[ |(w - zeta)/(zeta (w + 1/zeta + E_sys - q))|^s ].
double ratio_F_system(Complex zeta, double w, double s, double E_sys,
                      const ScalarDisorder& q_sys);
// Tree-facing wrapper: physical (E, nu), rescaled internally.
double ratio_F(Complex zeta, double w, double s, double E, const RadialDisorder& nu,
               int quad_order = 64);

// d/ds of the F ratio at s = 0: the logarithmic moment, equal to
// -key_functional(zeta, w, q - E_sys)/2.
double dF_ds_at_zero_system(Complex zeta, double w, double E_sys, const ScalarDisorder& q_sys);
double dF_ds_at_zero(Complex zeta, double w, double E, const RadialDisorder& nu,
                     int quad_order = 64);

// Upper bound A with (T_{E,s} 1)(w) <= A |w - zeta|^{-s} Im(zeta)^{... } via
// the triangle-inequality majorant 1 + sup_{E,w} E[|(q-E-zeta)/(w+E-q)|^s],
// evaluated over the grid, sampled energies in [E_lo, E_hi], plus the tail.
double bound_A_system(Complex zeta, double s, double E_sys_lo, double E_sys_hi,
                      const RadialDisorder& nu_sys, const WGrid& grid,
                      int energy_samples = 9, int quad_order = 64);
double bound_A(Complex zeta, double s, double E_lo, double E_hi, const RadialDisorder& nu,
               const WGrid& grid, int energy_samples = 9, int quad_order = 64);

// (T^m_{kappa, E+i eps, s} 1)(w) for w in the closed upper half-plane, by
// m-fold nested quadrature with no grid or interpolation. m <= 4.
double apply_T_pointwise_complex(Complex w, int m, double kappa, double E, double epsilon,
                                 double s, const RadialDisorder& nu,
                                 const TransversalDisorder& sigma, int quad_order = 24);

}  // namespace treeloc
