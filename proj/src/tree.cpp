#include "treeloc/tree.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

#include "treeloc/errors.hpp"

namespace treeloc {

namespace {

Complex herglotz_step(Complex denominator) {
  if (std::norm(denominator) == 0.0) {
    throw std::domain_error("forward_green: singular energy (zero denominator)");
  }
  return -1.0 / denominator;
}

}  // namespace

PotentialRealization sample_potential_stream(int depth, double kappa, const RadialDisorder& nu0,
                                             const RadialDisorder& nu,
                                             const TransversalDisorder& sigma, RngStream& rng) {
  if (depth < 0) throw std::invalid_argument("sample_potential: depth must be >= 0");
  PotentialRealization pot;
  pot.kappa = kappa;
  pot.depth = depth;
  pot.q_root = nu0.sample(rng);
  pot.levels.reserve(static_cast<std::size_t>(depth));
  const auto& atoms = sigma.atoms();
  for (int n = 1; n <= depth; ++n) {
    const double r = nu.sample(rng);
    const TransversalAtom& a = atoms[sigma.sample_index(rng)];
    pot.levels.emplace_back(r + kappa * a.p0, r + kappa * a.p1);
  }
  return pot;
}

PotentialRealization sample_potential(int depth, double kappa, const RadialDisorder& nu0,
                                      const RadialDisorder& nu, const TransversalDisorder& sigma,
                                      std::uint64_t seed) {
  RngStream rng(seed, 0);
  PotentialRealization pot = sample_potential_stream(depth, kappa, nu0, nu, sigma, rng);
  pot.seed = seed;
  return pot;
}

GreenProfile forward_green(const PotentialRealization& pot, Complex z, bool regularize_real) {
  if (!(z.imag() > 0.0)) {
    if (!regularize_real) throw std::domain_error("forward_green: Im z must be > 0");
    z += Complex(0.0, 1e-8);
  }
  GreenProfile profile;
  profile.z = z;
  const int depth = pot.depth;
  profile.levels.assign(static_cast<std::size_t>(depth), {Complex(0, 0), Complex(0, 0)});
  Complex below_sum(0.0, 0.0);  // g_{(n+1)0} + g_{(n+1)1}, zero below the leaves
  for (int n = depth; n >= 1; --n) {
    const auto& [q0, q1] = pot.levels[static_cast<std::size_t>(n - 1)];
    const Complex g0n = herglotz_step(below_sum + z - q0);
    const Complex g1n = herglotz_step(below_sum + z - q1);
    profile.levels[static_cast<std::size_t>(n - 1)] = {g0n, g1n};
    below_sum = g0n + g1n;
  }
  profile.g0 = herglotz_step(below_sum + z - pot.q_root);
  return profile;
}

double log_moment_norm(const GreenProfile& profile, int n) {
  if (n < 0 || static_cast<std::size_t>(n) > profile.levels.size()) {
    throw std::invalid_argument("moment_norm: n exceeds profile depth");
  }
  double acc = 0.5 * std::log(std::norm(profile.g0));
  for (int j = 1; j <= n; ++j) {
    const auto& [a, b] = profile.levels[static_cast<std::size_t>(j - 1)];
    acc += 0.5 * std::log(std::norm(a) + std::norm(b));
  }
  return acc;
}

double moment_norm(const GreenProfile& profile, int n) {
  return std::exp(log_moment_norm(profile, n));
}

std::vector<Complex> dense_oracle(const PotentialRealization& pot, Complex z) {
  if (pot.depth > 12) {
    throw ResourceError("dense_oracle: depth > 12 (vertex count 2^{depth+1} - 1)");
  }
  const int depth = pot.depth;
  const long count = (1L << (depth + 1)) - 1;

  auto potential_at = [&](long v) {
    if (v == 0) return pot.q_root;
    int level = 0;
    for (long u = v; u > 0; u = (u - 1) / 2) ++level;
    const auto& [q0, q1] = pot.levels[static_cast<std::size_t>(level - 1)];
    return (v % 2 == 1) ? q0 : q1;  // child 2u+1 (odd) carries colour 0
  };

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(3 * count));
  for (long v = 0; v < count; ++v) {
    triplets.emplace_back(v, v, Complex(potential_at(v), 0.0) - z);
    for (long c : {2 * v + 1, 2 * v + 2}) {
      if (c < count) {
        triplets.emplace_back(v, c, Complex(-1.0, 0.0));
        triplets.emplace_back(c, v, Complex(-1.0, 0.0));
      }
    }
  }
  Eigen::SparseMatrix<Complex> H(count, count);
  H.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> solver;
  solver.compute(H);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("dense_oracle: factorization failed (energy too close to spectrum?)");
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(count);
  rhs[0] = Complex(1.0, 0.0);
  const Eigen::VectorXcd u = solver.solve(rhs);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("dense_oracle: solve failed");
  }
  return std::vector<Complex>(u.data(), u.data() + count);
}

double dense_sphere_norm(const std::vector<Complex>& u, int n) {
  if (n < 0) throw std::invalid_argument("dense_sphere_norm: n must be >= 0");
  const long lo = (1L << n) - 1, hi = (1L << (n + 1)) - 1;
  if (static_cast<std::size_t>(hi) > u.size()) {
    throw std::invalid_argument("dense_sphere_norm: sphere outside the solved tree");
  }
  double acc = 0.0;
  for (long v = lo; v < hi; ++v) acc += std::norm(u[static_cast<std::size_t>(v)]);
  return std::sqrt(acc);
}

std::vector<Complex> chain_green_1d(const std::vector<double>& q, Complex z) {
  if (q.empty()) throw std::invalid_argument("chain_green_1d: empty potential");
  if (!(z.imag() > 0.0)) throw std::domain_error("chain_green_1d: Im z must be > 0");
  const std::size_t N = q.size();
  std::vector<Complex> g(N);
  g[N - 1] = herglotz_step(z - q[N - 1]);
  for (std::size_t j = N - 1; j-- > 0;) {
    g[j] = herglotz_step(g[j + 1] + z - q[j]);
  }
  return g;
}

std::vector<Complex> dense_oracle_1d(const std::vector<double>& q, Complex z) {
  if (q.empty()) throw std::invalid_argument("dense_oracle_1d: empty potential");
  const long N = static_cast<long>(q.size());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
  for (long j = 0; j < N; ++j) {
    H(j, j) = Complex(q[static_cast<std::size_t>(j)], 0.0) - z;
    if (j + 1 < N) {
      H(j, j + 1) = Complex(-1.0, 0.0);
      H(j + 1, j) = Complex(-1.0, 0.0);
    }
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(N);
  rhs[0] = Complex(1.0, 0.0);
  const Eigen::VectorXcd u = H.partialPivLu().solve(rhs);
  return std::vector<Complex>(u.data(), u.data() + N);
}

}  // namespace treeloc
