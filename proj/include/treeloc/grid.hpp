#pragma once

#include <Eigen/Dense>

namespace treeloc {

// Discretization of the compactified real line: theta_k = -pi/2 + (k+1/2)*pi/n
// with w = tan(theta), plus a single node at infinity (both ends of the theta
// circle). Functions are interpolated linearly in theta; beyond the outermost
// nodes the interpolation blends toward the infinity node over the remaining
// half-spacing.
class WGrid {
 public:
  explicit WGrid(int n_nodes);

  int n() const { return n_; }
  const Eigen::ArrayXd& thetas() const { return thetas_; }
  const Eigen::ArrayXd& ws() const { return ws_; }

  // Interpolation stencil for a real evaluation point y: up to two node
  // weights plus a weight on the infinity node; weights are non-negative and
  // sum to 1.
  struct Stencil {
    int i0 = 0, i1 = 0;
    double w0 = 0.0, w1 = 0.0, winf = 0.0;
  };
  Stencil stencil(double y) const;

 private:
  int n_;
  Eigen::ArrayXd thetas_;
  Eigen::ArrayXd ws_;
};

// Non-negative function on a WGrid plus its value at the infinity node.
struct GridFunction {
  const WGrid* grid = nullptr;
  Eigen::ArrayXd values;
  double value_at_infinity = 0.0;

  static GridFunction ones(const WGrid& g);
  static GridFunction zeros(const WGrid& g);

  double interpolate(double y) const;
  double sup() const;  // max over nodes and the infinity value
};

}  // namespace treeloc
