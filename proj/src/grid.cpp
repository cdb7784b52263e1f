#include "treeloc/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace treeloc {

WGrid::WGrid(int n_nodes) : n_(n_nodes) {
  if (n_nodes < 8 || n_nodes > (1 << 20)) {
    throw std::invalid_argument("WGrid: node count out of supported range");
  }
  thetas_.resize(n_);
  ws_.resize(n_);
  for (int k = 0; k < n_; ++k) {
    thetas_[k] = -M_PI_2 + (k + 0.5) * M_PI / n_;
    ws_[k] = std::tan(thetas_[k]);
  }
}

WGrid::Stencil WGrid::stencil(double y) const {
  const double h = M_PI / n_;
  const double theta = std::atan(y);
  Stencil st;
  if (theta <= thetas_[0]) {
    // Blend between the first node and the infinity node at theta = -pi/2.
    const double t = (thetas_[0] - theta) / (0.5 * h);
    st.i0 = st.i1 = 0;
    st.w0 = 1.0 - t;
    st.w1 = 0.0;
    st.winf = t;
  } else if (theta >= thetas_[n_ - 1]) {
    const double t = (theta - thetas_[n_ - 1]) / (0.5 * h);
    st.i0 = st.i1 = n_ - 1;
    st.w0 = 1.0 - t;
    st.w1 = 0.0;
    st.winf = t;
  } else {
    int k = static_cast<int>((theta - thetas_[0]) / h);
    if (k < 0) k = 0;
    if (k > n_ - 2) k = n_ - 2;
    if (theta < thetas_[k]) --k;          // guard against rounding at panel edges
    if (theta > thetas_[k + 1]) ++k;
    const double t = (theta - thetas_[k]) / h;
    st.i0 = k;
    st.i1 = k + 1;
    st.w0 = 1.0 - t;
    st.w1 = t;
    st.winf = 0.0;
  }
  return st;
}

GridFunction GridFunction::ones(const WGrid& g) {
  GridFunction f;
  f.grid = &g;
  f.values = Eigen::ArrayXd::Ones(g.n());
  f.value_at_infinity = 1.0;
  return f;
}

GridFunction GridFunction::zeros(const WGrid& g) {
  GridFunction f;
  f.grid = &g;
  f.values = Eigen::ArrayXd::Zero(g.n());
  f.value_at_infinity = 0.0;
  return f;
}

double GridFunction::interpolate(double y) const {
  const WGrid::Stencil st = grid->stencil(y);
  return st.w0 * values[st.i0] + st.w1 * values[st.i1] + st.winf * value_at_infinity;
}

double GridFunction::sup() const {
  return std::max(values.maxCoeff(), value_at_infinity);
}

}  // namespace treeloc
