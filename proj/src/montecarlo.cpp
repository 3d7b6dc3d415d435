#include "branchbayes/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "branchbayes/hitting.hpp"
#include "branchbayes/kernel.hpp"

namespace branchbayes {

namespace {

constexpr std::int64_t kChunk = 65536;

// Generator state for one chunk. The mixed draw, not the raw counter, seeds
// the chunk: counter states chunk increments apart would otherwise walk the
// same golden-ratio progression a few steps out of phase.
std::uint64_t chunk_state(std::uint64_t seed, std::int64_t chunk) {
  std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(chunk + 1);
  return splitmix64(s);
}

void run_chunked(std::int64_t n_jobs, const std::function<void(std::int64_t)>& run_chunk) {
  const std::int64_t n_chunks = (n_jobs + kChunk - 1) / kChunk;
  const int workers = worker_count(static_cast<std::size_t>(n_chunks));
  if (workers <= 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t c = w; c < n_chunks; c += workers) run_chunk(c);
    });
  }
  for (std::thread& t : pool) t.join();
}

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

int worker_count(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("BRANCH_BAYES_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(jobs, 1)));
}

std::vector<std::int64_t> sample_discrete(const DiscreteDist& dist, std::int64_t n,
                                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_discrete: n must be >= 1");
  std::vector<double> cdf(dist.probs());
  for (std::size_t i = 1; i < cdf.size(); ++i) cdf[i] += cdf[i - 1];
  cdf.back() = 1.0;  // guard against accumulated rounding at the top

  std::vector<std::int64_t> samples(static_cast<std::size_t>(n));
  run_chunked(n, [&](std::int64_t c) {
    std::uint64_t state = chunk_state(seed, c);
    const std::int64_t begin = c * kChunk;
    const std::int64_t end = std::min(n, begin + kChunk);
    for (std::int64_t i = begin; i < end; ++i) {
      const double v = uniform01(state);
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
      const std::int64_t idx = std::min<std::int64_t>(it - cdf.begin(),
                                                      static_cast<std::int64_t>(cdf.size()) - 1);
      samples[static_cast<std::size_t>(i)] = dist.lo() + idx;
    }
  });
  return samples;
}

double ks_distance(std::span<const double> samples, double mean, double variance) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: no samples");
  if (!(variance > 0.0)) throw std::invalid_argument("ks_distance: variance must be positive");
  const double sd = std::sqrt(variance);
  std::vector<double> z(samples.begin(), samples.end());
  for (double& v : z) v = (v - mean) / sd;
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = gaussian_cdf(z[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

ExperimentReport clt_experiment(CltKind kind, double u, std::int64_t x, std::int64_t n,
                                std::uint64_t seed) {
  if (x < 64) throw std::invalid_argument("clt_experiment: x must be >= 64");
  if (!(u > 0.0) || !(u < 1.0)) {
    throw std::invalid_argument("clt_experiment: u must lie strictly inside (0,1)");
  }
  const DiscreteDist dist =
      kind == CltKind::xi ? limit_posterior(rho(u), x) : eta_dist(x, u).dist;
  const std::vector<std::int64_t> samples = sample_discrete(dist, n, seed);
  std::vector<double> vals(samples.begin(), samples.end());
  const ScalarBundle sb = r_scalars(u);
  const double xd = static_cast<double>(x);

  ExperimentReport rep;
  rep.name = kind == CltKind::xi ? "clt_xi" : "clt_eta";
  rep.params = {{"u", u}, {"x", xd}};
  rep.statistic = ks_distance(vals, sb.m * xd, sb.sigma2 * xd);
  rep.threshold = 0.05;
  rep.n_samples = n;
  rep.seed = seed;
  rep.passed = rep.statistic <= rep.threshold;
  return rep;
}

std::vector<ExperimentReport> posterior_consistency_experiment(double u, std::int64_t x0,
                                                               std::span<const std::int64_t> n_list,
                                                               std::uint64_t seed) {
  if (n_list.empty()) throw std::invalid_argument("posterior_consistency_experiment: empty n list");
  for (std::int64_t n : n_list) {
    if (n < 5) throw std::invalid_argument("posterior_consistency_experiment: each n must be >= 5");
  }
  if (!(u >= 0.0) || !(u <= 1.0)) {
    throw std::invalid_argument("posterior_consistency_experiment: u must lie in [0,1]");
  }
  const std::int64_t n_max = *std::max_element(n_list.begin(), n_list.end());
  const Path full = simulate_path(x0, u, n_max, seed);

  std::vector<ExperimentReport> reports;
  reports.reserve(2 * n_list.size());
  for (std::int64_t n : n_list) {
    Path prefix;
    prefix.origin_included = true;
    prefix.values.assign(full.values.begin(), full.values.begin() + n + 1);
    const JointPosterior post = joint_posterior(prefix);
    const DiscreteDist limit = limit_posterior(rho(u), post.x1);
    const double nd = static_cast<double>(n);

    ExperimentReport tv;
    tv.name = "consistency_tv";
    tv.params = {{"u", u}, {"x0", static_cast<double>(x0)}, {"n", nd}};
    tv.statistic = post.x0_marginal.total_variation(limit);
    tv.threshold = 0.1;
    tv.n_samples = n;
    tv.seed = seed;
    tv.passed = tv.statistic <= tv.threshold;
    reports.push_back(std::move(tv));

    ExperimentReport sd;
    sd.name = "consistency_u_sd";
    sd.params = {{"u", u}, {"x0", static_cast<double>(x0)}, {"n", nd}};
    sd.statistic = post.u_sd;
    sd.threshold = 0.05;
    sd.n_samples = n;
    sd.seed = seed;
    sd.passed = sd.statistic <= sd.threshold;
    reports.push_back(std::move(sd));
  }
  return reports;
}

std::int64_t poisson_draw(double lambda, std::uint64_t& state) {
  if (!(lambda > 0.0) || lambda > 700.0) {
    throw std::invalid_argument("poisson_draw: lambda must lie in (0, 700]");
  }
  const double floor = std::exp(-lambda);
  std::int64_t k = 0;
  double p = 1.0;
  for (;;) {
    p *= uniform01(state);
    if (p <= floor) return k;
    ++k;
  }
}

ExperimentReport fisher_info_experiment(double u, std::int64_t n, double lambda0, std::int64_t m,
                                        std::uint64_t seed) {
  if (!(u > 0.0) || !(u < 1.0)) {
    throw std::invalid_argument("fisher_info_experiment: u must lie strictly inside (0,1)");
  }
  if (n < 1) throw std::invalid_argument("fisher_info_experiment: n must be >= 1");
  if (m < 1) throw std::invalid_argument("fisher_info_experiment: m must be >= 1");

  // Per-path contributions are integers, accumulated exactly per chunk and
  // combined in chunk order, so the result is independent of threading.
  const std::int64_t n_chunks = (m + kChunk - 1) / kChunk;
  std::vector<std::int64_t> growth_sum(static_cast<std::size_t>(n_chunks), 0);
  std::vector<std::int64_t> single_sum(static_cast<std::size_t>(n_chunks), 0);
  run_chunked(m, [&](std::int64_t c) {
    std::uint64_t state = chunk_state(seed, c);
    const std::int64_t begin = c * kChunk;
    const std::int64_t end = std::min(m, begin + kChunk);
    std::int64_t growth = 0;
    std::int64_t single = 0;
    for (std::int64_t i = begin; i < end; ++i) {
      const std::int64_t x0 = poisson_draw(lambda0, state);
      if (x0 == 0) continue;  // empty process contributes zero to both sums
      const std::uint64_t path_seed = splitmix64(state);
      const Path path = simulate_path(x0, u, n, path_seed);
      const PathStats st = path_stats(path);
      growth += st.xn - x0;
      single += st.sn - 2 * st.xn + 2 * x0;
    }
    growth_sum[static_cast<std::size_t>(c)] = growth;
    single_sum[static_cast<std::size_t>(c)] = single;
  });
  std::int64_t growth_total = 0;
  std::int64_t single_total = 0;
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    growth_total += growth_sum[static_cast<std::size_t>(c)];
    single_total += single_sum[static_cast<std::size_t>(c)];
  }
  const double md = static_cast<double>(m);
  const double empirical = static_cast<double>(growth_total) / (u * u) / md +
                           static_cast<double>(single_total) / ((1.0 - u) * (1.0 - u)) / md;
  const double pi_n = jeffreys_pi_n(n, u);
  const double target = lambda0 * pi_n * pi_n;

  ExperimentReport rep;
  rep.name = "fisher_info";
  rep.params = {{"u", u},
                {"n", static_cast<double>(n)},
                {"lambda0", lambda0}};
  rep.statistic = std::abs(empirical - target) / target;
  rep.threshold = 0.02;
  rep.n_samples = m;
  rep.seed = seed;
  rep.passed = rep.statistic <= rep.threshold;
  return rep;
}

}  // namespace branchbayes
