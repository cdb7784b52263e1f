#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "treeloc/disorder.hpp"
#include "treeloc/hyperbolic.hpp"
#include "treeloc/rng.hpp"

namespace treeloc {

// One sampled potential on the truncated binary tree: a root value plus one
// colour pair per sphere.  levels[n-1] holds (q_{n,0}, q_{n,1}) for sphere n.
struct PotentialRealization {
  double q_root = 0.0;
  std::vector<std::pair<double, double>> levels;
  double kappa = 0.0;
  int depth = 0;
  std::uint64_t seed = 0;
};

// q_root ~ nu0; per sphere: r ~ nu, (p0, p1) ~ sigma, q_{n,i} = r + kappa p_i.
// Deterministic given the seed.
PotentialRealization sample_potential(int depth, double kappa, const RadialDisorder& nu0,
                                      const RadialDisorder& nu, const TransversalDisorder& sigma,
                                      std::uint64_t seed);
// Variant for callers managing their own counter-RNG substreams.
PotentialRealization sample_potential_stream(int depth, double kappa, const RadialDisorder& nu0,
                                             const RadialDisorder& nu,
                                             const TransversalDisorder& sigma, RngStream& rng);

// Forward Green functions of the truncated operator: g at the root plus the
// colour pair per sphere, all with positive imaginary part when Im z > 0.
struct GreenProfile {
  Complex g0{0.0, 0.0};
  std::vector<std::pair<Complex, Complex>> levels;
  Complex z{0.0, 0.0};
};

// Dirichlet leaves g = -1/(z - q), backward recursion
// g_{n,i} = -1/(g_{(n+1)0} + g_{(n+1)1} + z - q_{n,i}).  Requires Im z > 0;
// regularize_real = true instead shifts real z by +1e-8 i (exploratory runs
// only, results are non-contractual).
GreenProfile forward_green(const PotentialRealization& pot, Complex z,
                           bool regularize_real = false);

// ||P_0 (H - z)^{-1} P_n|| = |g_0| prod_{j=1..n} (|g_{j0}|^2 + |g_{j1}|^2)^{1/2}
// for the truncated operator; the log variant is what moment estimation uses
// at depths where the plain product would overflow.
double moment_norm(const GreenProfile& profile, int n);
double log_moment_norm(const GreenProfile& profile, int n);

// Dense oracle: assembles H on the truncated tree in heap vertex order (root
// at 0, children of v at 2v+1 and 2v+2, child 2v+1 carrying colour 0) and
// solves (H - z) u = delta_root.  depth <= 12.
std::vector<Complex> dense_oracle(const PotentialRealization& pot, Complex z);
// sqrt(sum over sphere n of |u_x|^2) of a dense_oracle column.
double dense_sphere_norm(const std::vector<Complex>& u, int n);

// Half-line chain: g_j = -1/(g_{j+1} + z - q_j) with a Dirichlet far end,
// and its dense tridiagonal counterpart (first resolvent column).
std::vector<Complex> chain_green_1d(const std::vector<double>& q, Complex z);
std::vector<Complex> dense_oracle_1d(const std::vector<double>& q, Complex z);

// Monte-Carlo estimate of E ||P_0 (H - z)^{-1} P_n||^s at z = E + i epsilon.
struct MomentEstimate {
  int n = 0;
  double E = 0.0;
  double epsilon = 0.0;
  double s = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  long long n_samples = 0;
};

// Samples n_samples independent realizations at depth n + depth_buffer; each
// sample draws from its own counter-RNG stream keyed by (n, sample index), so
// the estimate is bit-stable under any thread count and independent across n.
MomentEstimate mc_fractional_moment(int n, double E, double epsilon, double s, double kappa,
                                    const RadialDisorder& nu0, const RadialDisorder& nu,
                                    const TransversalDisorder& sigma, long long n_samples,
                                    int depth_buffer, std::uint64_t seed, int threads = 1);

// Chain version: potential q_0..q_N i.i.d. ~ nu, N = n + length_buffer;
// estimates E |<delta_0, (H - z)^{-1} delta_n>|^s.
MomentEstimate mc_fractional_moment_1d(int n, double E, double epsilon, double s,
                                       const RadialDisorder& nu, long long n_samples,
                                       int length_buffer, std::uint64_t seed, int threads = 1);

}  // namespace treeloc
