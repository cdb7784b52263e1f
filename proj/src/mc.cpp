#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "treeloc/numerics.hpp"
#include "treeloc/tree.hpp"

namespace treeloc {

namespace {

// Fills values[i] for i in [0, n_samples) from per-sample RNG streams; the
// array is positionally assigned, so the later pairwise reduction is
// bit-stable for any thread count.
void run_samples(long long n_samples, int threads,
                 const std::function<void(long long, long long)>& body) {
  if (threads <= 1) {
    body(0, n_samples);
    return;
  }
  std::vector<std::thread> pool;
  const long long chunk = (n_samples + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long long lo = static_cast<long long>(t) * chunk;
    const long long hi = std::min(n_samples, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(body, lo, hi);
  }
  for (auto& th : pool) th.join();
}

MomentEstimate reduce_estimate(int n, double E, double epsilon, double s,
                               std::vector<double>& values) {
  const long long N = static_cast<long long>(values.size());
  MomentEstimate est;
  est.n = n;
  est.E = E;
  est.epsilon = epsilon;
  est.s = s;
  est.n_samples = N;
  est.mean = pairwise_sum(values) / static_cast<double>(N);
  if (N > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - est.mean;
      sq[i] = d * d;
    }
    est.std_error =
        std::sqrt(pairwise_sum(sq) / (static_cast<double>(N) * static_cast<double>(N - 1)));
  }
  return est;
}

std::uint64_t sample_stream_id(int n, long long i) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n)) << 32) ^
         static_cast<std::uint64_t>(i);
}

}  // namespace

MomentEstimate mc_fractional_moment(int n, double E, double epsilon, double s, double kappa,
                                    const RadialDisorder& nu0, const RadialDisorder& nu,
                                    const TransversalDisorder& sigma, long long n_samples,
                                    int depth_buffer, std::uint64_t seed, int threads) {
  if (n < 0) throw std::invalid_argument("mc_fractional_moment: n must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("mc_fractional_moment: epsilon must be > 0");
  if (n_samples < 1) throw std::invalid_argument("mc_fractional_moment: n_samples must be >= 1");
  if (depth_buffer < 0) throw std::invalid_argument("mc_fractional_moment: negative buffer");
  const int depth = n + depth_buffer;
  const Complex z(E, epsilon);

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  run_samples(n_samples, threads, [&](long long lo, long long hi) {
    for (long long i = lo; i < hi; ++i) {
      RngStream rng(seed, sample_stream_id(n, i));
      const PotentialRealization pot =
          sample_potential_stream(depth, kappa, nu0, nu, sigma, rng);
      const GreenProfile profile = forward_green(pot, z);
      values[static_cast<std::size_t>(i)] = std::exp(s * log_moment_norm(profile, n));
    }
  });
  return reduce_estimate(n, E, epsilon, s, values);
}

MomentEstimate mc_fractional_moment_1d(int n, double E, double epsilon, double s,
                                       const RadialDisorder& nu, long long n_samples,
                                       int length_buffer, std::uint64_t seed, int threads) {
  if (n < 0) throw std::invalid_argument("mc_fractional_moment_1d: n must be >= 0");
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("mc_fractional_moment_1d: epsilon must be > 0");
  }
  if (n_samples < 1) {
    throw std::invalid_argument("mc_fractional_moment_1d: n_samples must be >= 1");
  }
  if (length_buffer < 0) throw std::invalid_argument("mc_fractional_moment_1d: negative buffer");
  const std::size_t length = static_cast<std::size_t>(n + length_buffer) + 1;
  const Complex z(E, epsilon);

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  run_samples(n_samples, threads, [&](long long lo, long long hi) {
    std::vector<double> q(length);
    for (long long i = lo; i < hi; ++i) {
      RngStream rng(seed, sample_stream_id(n, i));
      for (double& qj : q) qj = nu.sample(rng);
      const std::vector<Complex> g = chain_green_1d(q, z);
      double log_amp = 0.0;
      for (int j = 0; j <= n; ++j) log_amp += 0.5 * std::log(std::norm(g[static_cast<std::size_t>(j)]));
      values[static_cast<std::size_t>(i)] = std::exp(s * log_amp);
    }
  });
  return reduce_estimate(n, E, epsilon, s, values);
}

}  // namespace treeloc
