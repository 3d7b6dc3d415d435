#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "branchbayes/posterior.hpp"

namespace branchbayes {

// Outcome of one seeded experiment; a pure function of (params, seed).
struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  double statistic = 0.0;
  double threshold = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  bool passed = false;  // statistic <= threshold
};

// Worker count for a parallel region: hardware concurrency capped by the
// BRANCH_BAYES_THREADS environment variable and by the job count. Results
// never depend on it.
int worker_count(std::size_t jobs);

// i.i.d. draws by inverse CDF on the cumulative table. Work is split into
// fixed 65536-sample chunks, each with its own generator derived from
// (seed, chunk index), so the output is identical under any thread count.
std::vector<std::int64_t> sample_discrete(const DiscreteDist& dist, std::int64_t n,
                                          std::uint64_t seed);

// Sup distance between the empirical CDF of the standardized samples and the
// standard Gaussian CDF.
double ks_distance(std::span<const double> samples, double mean, double variance);

enum class CltKind { xi, eta };

// Samples xi_x from mu(rho(u),x) or eta_x from eta_dist(x,u) and measures the
// KS distance to the Gaussian with mean m_u x and variance sigma2_u x.
ExperimentReport clt_experiment(CltKind kind, double u, std::int64_t x, std::int64_t n,
                                std::uint64_t seed);

// Simulates one seeded path started at x0 and, for each n in n_list, compares
// the finite-n X0 marginal with the limit posterior at rho(u) (TV distance)
// and records the posterior sd of U. Two reports per n.
std::vector<ExperimentReport> posterior_consistency_experiment(double u, std::int64_t x0,
                                                               std::span<const std::int64_t> n_list,
                                                               std::uint64_t seed);

// Draws m initial populations from Poisson(lambda0), simulates n generations
// each, and compares the empirical Fisher information
//   mean of (Xn-X0)/u^2 + (Sn-2Xn+2X0)/(1-u)^2
// with its closed form lambda0 pi_n(u)^2, as a relative deviation.
ExperimentReport fisher_info_experiment(double u, std::int64_t n, double lambda0, std::int64_t m,
                                        std::uint64_t seed);

// Knuth's product-of-uniforms Poisson draw; adequate for the small rates
// used here.
std::int64_t poisson_draw(double lambda, std::uint64_t& state);

}  // namespace branchbayes
