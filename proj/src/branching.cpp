#include "branchbayes/branching.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "branchbayes/bignum.hpp"

namespace branchbayes {

namespace {

constexpr std::int64_t kMaxPopulation = std::numeric_limits<std::int64_t>::max();

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::int64_t binomial_draw(std::int64_t n_trials, double p, std::uint64_t& state) {
  if (n_trials < 0) throw std::invalid_argument("binomial_draw: negative trial count");
  if (p < 0.0 || p > 1.0 || std::isnan(p)) {
    throw std::invalid_argument("binomial_draw: p must lie in [0,1]");
  }
  if (n_trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return n_trials;
  if (p > 0.5) return n_trials - binomial_draw(n_trials, 1.0 - p, state);

  const double q = p;  // q <= 1/2 from here on
  if (static_cast<double>(n_trials) * q < 30.0) {
    // CDF inversion walked up from k = 0.
    const double ratio = q / (1.0 - q);
    double pmf = std::exp(static_cast<double>(n_trials) * std::log1p(-q));
    double cdf = pmf;
    const double target = uniform01(state);
    std::int64_t k = 0;
    while (cdf <= target && k < n_trials) {
      pmf *= ratio * static_cast<double>(n_trials - k) / static_cast<double>(k + 1);
      cdf += pmf;
      ++k;
    }
    return k;
  }

  if (q == 0.5) {
    // One fair Bernoulli per random bit, 64 at a time.
    std::int64_t successes = 0;
    std::int64_t remaining = n_trials;
    while (remaining >= 64) {
      successes += std::popcount(splitmix64(state));
      remaining -= 64;
    }
    if (remaining > 0) {
      const std::uint64_t mask = (~0ULL) >> (64 - remaining);
      successes += std::popcount(splitmix64(state) & mask);
    }
    return successes;
  }

  // Bernoulli blocks encoded as geometric skips: jump over runs of failures.
  const double log1mq = std::log1p(-q);
  std::int64_t successes = 0;
  std::int64_t position = 0;
  while (true) {
    const double u = uniform01(state);
    const double skip = std::floor(std::log1p(-u) / log1mq);
    if (skip >= static_cast<double>(n_trials)) break;  // avoids int overflow on tiny q
    position += static_cast<std::int64_t>(skip) + 1;
    if (position > n_trials) break;
    ++successes;
  }
  return successes;
}

Path simulate_path(std::int64_t x0, double u, std::int64_t n, std::uint64_t seed) {
  if (x0 < 1) throw std::invalid_argument("simulate_path: x0 must be >= 1");
  if (u < 0.0 || u > 1.0 || std::isnan(u)) {
    throw std::invalid_argument("simulate_path: u must lie in [0,1]");
  }
  if (n < 0) throw std::invalid_argument("simulate_path: n must be nonnegative");

  std::uint64_t state = seed;
  splitmix64(state);  // decouple nearby seeds

  Path path;
  path.origin_included = true;
  path.values.reserve(static_cast<std::size_t>(n) + 1);
  path.values.push_back(x0);
  std::int64_t x = x0;
  for (std::int64_t k = 0; k < n; ++k) {
    if (u > 0.0 && x > kMaxPopulation / 2) {
      throw std::overflow_error("simulate_path: population would exceed 2^63-1");
    }
    x += binomial_draw(x, u, state);
    path.values.push_back(x);
  }
  return path;
}

bool validate_admissible(std::span<const std::int64_t> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 1) return false;
    if (i + 1 < values.size()) {
      const std::int64_t x = values[i];
      const std::int64_t y = values[i + 1];
      if (y < x || y > 2 * x) return false;
    }
  }
  return true;
}

PathStats path_stats(const Path& path) {
  const auto obs = path.observed();
  if (obs.size() < 2) {
    throw std::invalid_argument("path_stats: need at least two observed values");
  }
  PathStats stats;
  stats.n = static_cast<std::int64_t>(obs.size());
  stats.x1 = obs.front();
  stats.xn = obs.back();
  stats.sn = std::accumulate(obs.begin(), obs.end(), std::int64_t{0});
  const double s_prev = static_cast<double>(stats.sn - stats.xn);
  const double xn = static_cast<double>(stats.xn);
  stats.b_hat = xn / s_prev;
  stats.r_hat = (s_prev - xn) * (s_prev - xn) / (4.0 * xn * s_prev);
  return stats;
}

LogReal transition_log_likelihood(const Path& path, double u) {
  if (!path.origin_included) {
    throw std::invalid_argument("transition_log_likelihood: origin required");
  }
  if (u <= 0.0 || u >= 1.0 || std::isnan(u)) {
    throw std::invalid_argument("transition_log_likelihood: u must lie in (0,1)");
  }
  if (!validate_admissible(path.values)) {
    return LogReal::zero();
  }
  const double log_u = std::log(u);
  const double log_1mu = std::log1p(-u);
  double acc = 0.0;
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    const std::int64_t prev = path.values[k - 1];
    const std::int64_t next = path.values[k];
    const std::int64_t doubled = next - prev;
    acc += log_binomial(prev, doubled) + doubled * log_u + (2 * prev - next) * log_1mu;
  }
  return LogReal::from_log(acc);
}

}  // namespace branchbayes
