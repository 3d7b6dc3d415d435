#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "branchbayes/logreal.hpp"

namespace branchbayes {

// An observed trajectory of the binary branching process. When
// origin_included is true the first entry is the (latent) initial
// population x_0; otherwise the values are the observations x_1..x_n.
struct Path {
  std::vector<std::int64_t> values;
  bool origin_included = false;

  // The observed part x_1..x_n.
  std::span<const std::int64_t> observed() const {
    std::span<const std::int64_t> all(values);
    return origin_included ? all.subspan(1) : all;
  }
};

// Summary statistics of the observed part; the posterior depends on the
// path only through (x1, xn, sn).
struct PathStats {
  std::int64_t x1 = 0;
  std::int64_t xn = 0;
  std::int64_t sn = 0;  // x1 + ... + xn
  std::int64_t n = 0;   // number of observations
  double b_hat = 0.0;   // xn / s_{n-1}, the observable binary-index estimate
  double r_hat = 0.0;   // (s_{n-1} - xn)^2 / (4 xn s_{n-1})
};

// True iff every consecutive pair satisfies x <= y <= 2x and all entries
// are >= 1. Empty and singleton sequences count as admissible.
bool validate_admissible(std::span<const std::int64_t> values);

// Simulate X_{k+1} = X_k + Binomial(X_k, u) for k = 0..n-1 with a generator
// owned by this call and derived from the seed; identical seed gives an
// identical path. Populations are capped at 2^63-1 with an overflow error.
Path simulate_path(std::int64_t x0, double u, std::int64_t n, std::uint64_t seed);

// Exact binomial draw: inversion when n_trials*min(p,1-p) < 30, summed
// Bernoulli blocks (popcount words at p = 1/2, geometric skips otherwise)
// beyond. No normal approximation anywhere.
std::int64_t binomial_draw(std::int64_t n_trials, double p, std::uint64_t& state);

// Deterministic splitmix64 step; the sole primitive behind all seeding.
std::uint64_t splitmix64(std::uint64_t& state);

// Uniform double in [0,1) from the splitmix64 stream.
double uniform01(std::uint64_t& state);

PathStats path_stats(const Path& path);

// Sum over transitions of log C(x_{k-1}, x_k - x_{k-1}) + (x_k - x_{k-1}) log u
// + (2 x_{k-1} - x_k) log(1-u). Requires the origin; inadmissible paths have
// zero likelihood (-inf), they are not an error.
LogReal transition_log_likelihood(const Path& path, double u);

}  // namespace branchbayes
