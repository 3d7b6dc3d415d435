#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "doctest.h"

#include "branchbayes/bignum.hpp"
#include "branchbayes/branching.hpp"
#include "branchbayes/kernel.hpp"
#include "branchbayes/posterior.hpp"

using namespace branchbayes;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DiscreteDist table_dist(std::int64_t lo, const std::vector<BigRat>& poly, const BigRat& r) {
  // poly holds the coefficients of ascending powers of r, one per support point.
  std::vector<BigRat> w;
  BigRat rp = 1;
  for (const BigRat& c : poly) {
    w.push_back(c * rp);
    rp *= r;
  }
  return DiscreteDist::from_exact(lo, std::move(w));
}

// Trapezoid rule in theta for integral_0^1 u^a (1-u)^c pi_n(u) du with
// u = sin^2(theta); the substituted integrand vanishes at both endpoints
// whenever a >= 1 and c >= 1. Long double throughout.
long double beta_jeffreys_integral(int a, int c, int n, std::size_t intervals) {
  const long double half_pi = std::acos(-1.0L) / 2.0L;
  const long double h = half_pi / static_cast<long double>(intervals);
  long double sum = 0.0L;
  for (std::size_t i = 1; i < intervals; ++i) {
    const long double theta = h * static_cast<long double>(i);
    const long double s = std::sin(theta);
    const long double u = s * s;
    const long double one_minus = 1.0L - u;
    long double pi2 = (std::pow(1.0L + u, static_cast<long double>(n)) - 1.0L) /
                      (u * u * one_minus);
    sum += std::pow(u, static_cast<long double>(a)) *
           std::pow(one_minus, static_cast<long double>(c)) * std::sqrt(pi2) *
           std::sin(2.0L * theta);
  }
  return sum * h;
}

}  // namespace

TEST_CASE("upper_half") {
  CHECK(upper_half(1) == 1);
  CHECK(upper_half(2) == 1);
  CHECK(upper_half(3) == 2);
  CHECK(upper_half(4) == 2);
  CHECK(upper_half(5) == 3);
  CHECK(upper_half(100) == 50);
  CHECK(upper_half(101) == 51);
  CHECK_THROWS_AS(upper_half(0), std::invalid_argument);
}

TEST_CASE("DiscreteDist basics") {
  const DiscreteDist d(3, {std::log(1.0), std::log(3.0)});
  CHECK(d.lo() == 3);
  CHECK(d.hi() == 4);
  CHECK(d.prob(3) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(d.prob(4) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(d.prob(2) == 0.0);
  CHECK(d.prob(5) == 0.0);
  CHECK(d.mean() == doctest::Approx(3.75).epsilon(1e-14));
  CHECK(d.variance() == doctest::Approx(0.1875).epsilon(1e-13));
  CHECK(d.survival(3) == doctest::Approx(1.0));
  CHECK(d.survival(4) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(d.survival(5) == 0.0);
  CHECK_FALSE(d.is_exact());

  const DiscreteDist point = DiscreteDist::dirac(7);
  CHECK(point.size() == 1);
  CHECK(point.prob(7) == 1.0);
  CHECK(point.mean() == 7.0);
  CHECK(point.variance() == 0.0);

  CHECK(d.total_variation(d) == doctest::Approx(0.0));
  CHECK(point.total_variation(DiscreteDist::dirac(8)) == doctest::Approx(1.0));
  const DiscreteDist e(3, {std::log(3.0), std::log(1.0)});
  CHECK(d.total_variation(e) == doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(DiscreteDist(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDist(0, {std::nan("")}), std::invalid_argument);
}

TEST_CASE("DiscreteDist exact mode") {
  const DiscreteDist d = DiscreteDist::from_exact(1, {BigRat(1), BigRat(3)});
  CHECK(d.is_exact());
  CHECK(d.exact_probs()[0] == BigRat(1, 4));
  CHECK(d.exact_probs()[1] == BigRat(3, 4));
  CHECK(d.prob(2) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(d.exact_survival(2) == BigRat(3, 4));
  CHECK(d.exact_survival(1) == BigRat(1));
  CHECK(d.exact_survival(3) == BigRat(0));
  CHECK_THROWS_AS(DiscreteDist::from_exact(0, {BigRat(-1), BigRat(2)}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDist::from_exact(0, {BigRat(0), BigRat(0)}), std::invalid_argument);
}

TEST_CASE("limit posterior matches the small-x closed forms exactly") {
  const std::vector<BigRat> rs = {BigRat(1, 8), BigRat(1, 3), BigRat(1), BigRat(4)};
  for (const BigRat& r : rs) {
    const DiscreteDist x1 = limit_posterior_exact(r, 1);
    const DiscreteDist t1 = table_dist(1, {BigRat(1)}, r);
    const DiscreteDist x2 = limit_posterior_exact(r, 2);
    const DiscreteDist t2 = table_dist(1, {BigRat(1), BigRat(3)}, r);
    const DiscreteDist x3 = limit_posterior_exact(r, 3);
    const DiscreteDist t3 = table_dist(2, {BigRat(3), BigRat(5)}, r);
    const DiscreteDist x4 = limit_posterior_exact(r, 4);
    const DiscreteDist t4 = table_dist(2, {BigRat(3), BigRat(30), BigRat(35)}, r);
    const DiscreteDist x5 = limit_posterior_exact(r, 5);
    const DiscreteDist t5 = table_dist(3, {BigRat(15), BigRat(70), BigRat(63)}, r);

    const DiscreteDist* got[] = {&x1, &x2, &x3, &x4, &x5};
    const DiscreteDist* want[] = {&t1, &t2, &t3, &t4, &t5};
    for (int i = 0; i < 5; ++i) {
      REQUIRE(got[i]->lo() == want[i]->lo());
      REQUIRE(got[i]->size() == want[i]->size());
      for (std::size_t k = 0; k < got[i]->size(); ++k) {
        CHECK(got[i]->exact_probs()[k] == want[i]->exact_probs()[k]);
      }
    }
  }
}

TEST_CASE("limit posterior double route agrees with the exact route") {
  for (double r : {0.008, 0.125, 1.0, 31.4}) {
    const BigRat rq(r);  // binary doubles convert exactly
    for (std::int64_t x : {1, 2, 3, 7, 20, 61, 200}) {
      const DiscreteDist approx = limit_posterior(r, x);
      const DiscreteDist exact = limit_posterior_exact(rq, x);
      REQUIRE(approx.lo() == exact.lo());
      REQUIRE(approx.size() == exact.size());
      for (std::size_t k = 0; k < approx.size(); ++k) {
        const double want = static_cast<double>(exact.exact_probs()[k]);
        CHECK(approx.probs()[k] == doctest::Approx(want).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("limit posterior endpoints are point masses") {
  for (std::int64_t x : {1, 2, 5, 17, 64}) {
    const DiscreteDist at_zero = limit_posterior(0.0, x);
    CHECK(at_zero.size() == 1);
    CHECK(at_zero.prob(upper_half(x)) == 1.0);

    const DiscreteDist at_inf = limit_posterior(kInf, x);
    CHECK(at_inf.size() == 1);
    CHECK(at_inf.prob(x) == 1.0);

    // Continuity toward the endpoints; the stray mass vanishes linearly in
    // r (resp. 1/r) with an x^2 prefactor, so probe well inside the margin.
    CHECK(limit_posterior(1e-12, x).prob(upper_half(x)) > 1.0 - 1e-6);
    CHECK(limit_posterior(1e12, x).prob(x) > 1.0 - 1e-6);
  }
  CHECK_THROWS_AS(limit_posterior(-0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(limit_posterior(1.0, 0), std::invalid_argument);
}

TEST_CASE("limit posterior support and normalization across magnitudes") {
  for (double r : {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}) {
    for (std::int64_t x : {1, 2, 3, 10, 50, 200}) {
      const DiscreteDist d = limit_posterior(r, x);
      CHECK(d.lo() == upper_half(x));
      CHECK(d.hi() == x);
      double total = 0.0;
      for (double p : d.probs()) {
        CHECK(p >= 0.0);
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("limit moments at hand-checked points") {
  const Moments m1 = limit_moments(0.71, 1);
  CHECK(m1.mean == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m1.variance == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

  // At x = 2 the weights are (1, 3r) on {1, 2}; r = 1/8 gives (8/11, 3/11).
  const Moments m2 = limit_moments(0.125, 2);
  CHECK(m2.mean == doctest::Approx(14.0 / 11.0).epsilon(1e-13));
  CHECK(m2.variance == doctest::Approx(24.0 / 121.0).epsilon(1e-12));
}

TEST_CASE("limit moments agree with direct summation") {
  for (double r : {0.05, 0.125, 1.0, 12.0}) {
    for (std::int64_t x = 1; x <= 100; x += (x < 12 ? 1 : 11)) {
      const DiscreteDist d = limit_posterior(r, x);
      double mean = 0.0;
      for (std::int64_t y = d.lo(); y <= d.hi(); ++y) mean += static_cast<double>(y) * d.prob(y);
      double var = 0.0;
      for (std::int64_t y = d.lo(); y <= d.hi(); ++y) {
        const double c = static_cast<double>(y) - mean;
        var += c * c * d.prob(y);
      }
      const Moments m = limit_moments(r, x);
      CHECK(m.mean == doctest::Approx(mean).epsilon(1e-10));
      CHECK(m.variance == doctest::Approx(var).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("moment identities through the coefficient family") {
  // With B(r,x) the normalizing coefficient of the limit posterior,
  //   mean(r,x) B(r,x) = 2r (c_{3/2}(r,x-1) +   c_{3/2}(r,x-2))
  //   x        B(r,x) = 2r (c_{3/2}(r,x-1) + 2 c_{3/2}(r,x-2)).
  for (double r : {0.125, 1.0, 10.0}) {
    for (std::int64_t x = 1; x <= 100; x += (x < 10 ? 1 : 13)) {
      const double log_b = log_c_lambda(0.5, r, x).log();
      const LogReal c1 = log_c_lambda(1.5, r, x - 1);
      const LogReal c2 = (x >= 2) ? log_c_lambda(1.5, r, x - 2) : LogReal::zero();
      const double lhs_mean = std::exp(std::log(2.0 * r) + (c1 + c2).log() - log_b);
      CHECK(lhs_mean == doctest::Approx(limit_moments(r, x).mean).epsilon(1e-9));

      const LogReal twice_c2 = LogReal::from_value(2.0) * c2;
      const double lhs_x = std::exp(std::log(2.0 * r) + (c1 + twice_c2).log() - log_b);
      CHECK(lhs_x == doctest::Approx(static_cast<double>(x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("limit mode") {
  CHECK(limit_mode(0.125, 4) == 3);
  CHECK(limit_mode(1e-9, 11) == 6);
  CHECK(limit_mode(1e9, 11) == 11);
  for (double r : {0.02, 0.125, 0.8, 5.0}) {
    for (std::int64_t x = 1; x <= 120; x += 7) {
      const DiscreteDist d = limit_posterior(r, x);
      std::int64_t argmax = d.lo();
      for (std::int64_t y = d.lo(); y <= d.hi(); ++y) {
        if (d.prob(y) > d.prob(argmax)) argmax = y;
      }
      CHECK(limit_mode(r, x) == argmax);
    }
  }
}

TEST_CASE("limit posterior concentrates at m(r) x for large x") {
  const double u = 0.5;
  const std::int64_t x = 4096;
  const ScalarBundle sc = r_scalars(u);
  const Moments m = limit_moments(sc.r, x);
  CHECK(std::abs(m.mean - sc.m * static_cast<double>(x)) < 1.0);
  CHECK(m.variance == doctest::Approx(sc.sigma2 * static_cast<double>(x)).epsilon(0.01));
  CHECK(std::abs(static_cast<double>(limit_mode(sc.r, x)) - sc.m * static_cast<double>(x)) < 8.0);
}

TEST_CASE("jeffreys prior closed forms") {
  // n = 1 collapses to the arcsine shape 1/sqrt(u(1-u)).
  for (double u : {0.05, 0.2, 0.5, 0.8, 0.99}) {
    CHECK(jeffreys_pi_n(1, u) ==
          doctest::Approx(1.0 / std::sqrt(u * (1.0 - u))).epsilon(1e-13));
  }
  // Squared value at u = 1/2, n = 5: ((3/2)^5 - 1) / (1/4 * 1/2) = 52.75.
  const double p5 = jeffreys_pi_n(5, 0.5);
  CHECK(p5 * p5 == doctest::Approx(52.75).epsilon(1e-13));

  // u pi_n(u)^2 -> n as u -> 0.
  for (std::int64_t n : {std::int64_t{1}, std::int64_t{2}, std::int64_t{5}, std::int64_t{30}}) {
    const double u = 1e-9;
    const double p = jeffreys_pi_n(n, u);
    CHECK(u * p * p == doctest::Approx(static_cast<double>(n)).epsilon(1e-6));
  }

  // log route agrees with the direct route, including where the direct
  // route would underflow.
  for (std::int64_t n : {std::int64_t{2}, std::int64_t{7}}) {
    for (double u : {1e-4, 0.3, 0.9}) {
      CHECK(log_jeffreys_pi_n(n, u) == doctest::Approx(std::log(jeffreys_pi_n(n, u))).epsilon(1e-12));
    }
    const double log_tiny = log_jeffreys_pi_n(n, 1e-300);
    const double asym = 0.5 * (std::log(static_cast<double>(n)) - std::log(1e-300));
    CHECK(log_tiny == doctest::Approx(asym).epsilon(1e-9));
  }

  PriorSpec prior;
  prior.n = 5;
  CHECK(prior.pi_n(0.5) == doctest::Approx(jeffreys_pi_n(5, 0.5)).epsilon(1e-15));
  CHECK(prior.log_pi_n(0.5) == doctest::Approx(log_jeffreys_pi_n(5, 0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(jeffreys_pi_n(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(jeffreys_pi_n(3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(jeffreys_pi_n(3, 1.0), std::invalid_argument);
}

TEST_CASE("marginal_x0_weight is the central binomial weight") {
  for (std::int64_t x = 0; x <= 300; x += (x < 10 ? 1 : 29)) {
    const double want = static_cast<double>(d_half_exact(x));
    CHECK(marginal_x0_weight(x) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("joint posterior on an all-ones path") {
  Path p;
  p.values = {1, 1, 1, 1, 1};
  const JointPosterior post = joint_posterior(p);
  CHECK(post.x1 == 1);
  CHECK(post.xn == 1);
  CHECK(post.sn == 5);
  CHECK(post.n == 5);
  CHECK(post.x0_marginal.size() == 1);
  CHECK(post.x0_marginal.prob(1) == 1.0);
  // No births observed: the posterior mean of u must sit well below 1/2.
  CHECK(post.u_mean < 0.25);
  CHECK(post.u_sd > 0.0);
}

TEST_CASE("joint posterior for a two-step path matches a brute-force oracle") {
  Path p;
  p.values = {2, 3};
  const JointPosterior post = joint_posterior(p);
  REQUIRE(post.x0_marginal.lo() == 1);
  REQUIRE(post.x0_marginal.hi() == 2);

  // Candidates x0 = 1: (a, c) = (2, 1); x0 = 2: (a, c) = (1, 3). The shared
  // transition binomial C(2,1) cancels in the normalization.
  const std::size_t grid = std::size_t{1} << 21;
  const long double i1 = beta_jeffreys_integral(2, 1, 2, grid);
  const long double i2 = beta_jeffreys_integral(1, 3, 2, grid);
  const long double w1 = 0.5L * 1.0L * i1;           // d_{1/2}(1) C(1,1)
  const long double w2 = (3.0L / 8.0L) * 1.0L * i2;  // d_{1/2}(2) C(2,0)
  const double p1 = static_cast<double>(w1 / (w1 + w2));
  const double p2 = static_cast<double>(w2 / (w1 + w2));

  CHECK(std::abs(post.x0_marginal.prob(1) - p1) < 1e-6);
  CHECK(std::abs(post.x0_marginal.prob(2) - p2) < 1e-6);

  // Posterior mean of u through the same trapezoid oracle.
  const long double j1 = beta_jeffreys_integral(3, 1, 2, grid);
  const long double j2 = beta_jeffreys_integral(2, 3, 2, grid);
  const double u_mean = static_cast<double>((0.5L * j1 + (3.0L / 8.0L) * j2) / (w1 + w2));
  CHECK(std::abs(post.u_mean - u_mean) < 1e-6);
}

TEST_CASE("joint posterior densities are normalized on the grid") {
  Path p;
  p.values = {3, 5, 8, 13, 22, 40};
  const JointPosterior post = joint_posterior(p);
  REQUIRE(post.u_grid.size() >= 2);
  REQUIRE(post.u_marginal_density.size() == post.u_grid.size());
  for (std::size_t i = 1; i < post.u_grid.size(); ++i) {
    CHECK(post.u_grid[i] > post.u_grid[i - 1]);
    CHECK(post.u_grid[i] < 1.0);
  }
  CHECK(post.u_grid.front() > 0.0);

  auto trapezoid = [&](const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
      s += 0.5 * (f[i] + f[i - 1]) * (post.u_grid[i] - post.u_grid[i - 1]);
    }
    return s;
  };
  CHECK(trapezoid(post.u_marginal_density) == doctest::Approx(1.0).epsilon(1e-6));
  for (const std::vector<double>& cond : post.u_conditional) {
    REQUIRE(cond.size() == post.u_grid.size());
    CHECK(trapezoid(cond) == doctest::Approx(1.0).epsilon(1e-6));
  }

  // The mixture mean on the grid reproduces the reported posterior mean.
  std::vector<double> weighted(post.u_grid.size());
  for (std::size_t i = 0; i < weighted.size(); ++i) {
    weighted[i] = post.u_grid[i] * post.u_marginal_density[i];
  }
  CHECK(trapezoid(weighted) == doctest::Approx(post.u_mean).epsilon(1e-6));
}

TEST_CASE("joint posterior approaches the limit posterior along a long path") {
  const Path sim = simulate_path(5, 0.5, 30, 20240817);
  Path observed;
  observed.origin_included = true;
  observed.values = sim.values;
  const JointPosterior post = joint_posterior(observed);
  const DiscreteDist limit = limit_posterior(rho(0.5), post.x1);
  CHECK(post.x0_marginal.total_variation(limit) <= 0.1);
  CHECK(post.u_mean == doctest::Approx(0.5).epsilon(0.08));
  CHECK(post.u_sd < 0.05);
}

TEST_CASE("joint posterior treats a constant path as nearly degenerate") {
  Path p;
  p.values.assign(30, 5);
  const JointPosterior post = joint_posterior(p);
  CHECK(post.x0_marginal.total_variation(DiscreteDist::dirac(5)) <= 0.05);
  CHECK(post.x0_marginal.prob(5) > 0.9);
}

TEST_CASE("joint posterior input validation") {
  Path decreasing;
  decreasing.values = {3, 2};
  CHECK_THROWS_AS(joint_posterior(decreasing), std::invalid_argument);
  Path jump;
  jump.values = {2, 5};
  CHECK_THROWS_AS(joint_posterior(jump), std::invalid_argument);
  Path empty;
  CHECK_THROWS_AS(joint_posterior(empty), std::invalid_argument);
  Path origin_only;
  origin_only.values = {4};
  origin_only.origin_included = true;
  CHECK_THROWS_AS(joint_posterior(origin_only), std::invalid_argument);
}

TEST_CASE("stochastic ordering of limit posteriors in r") {
  const DiscreteDist lo = limit_posterior_exact(BigRat(1), 2);
  const DiscreteDist hi = limit_posterior_exact(BigRat(2), 2);
  CHECK(stochastic_leq(lo, hi));
  CHECK_FALSE(stochastic_leq(hi, lo));
  CHECK(stochastic_leq(lo, lo));

  const DiscreteDist flo = limit_posterior(1.0, 2);
  const DiscreteDist fhi = limit_posterior(2.0, 2);
  CHECK(stochastic_leq(flo, fhi));
  CHECK_FALSE(stochastic_leq(fhi, flo));
}

TEST_CASE("naive ratio crosses unity at u = 1/3") {
  CHECK(naive_ratio_exact(BigRat(1, 3)) == BigRat(1));
  for (double u = 0.05; u < 0.33; u += 0.05) CHECK(naive_ratio(u) > 1.0);
  for (double u = 0.35; u < 0.99; u += 0.05) CHECK(naive_ratio(u) < 1.0);
  for (double u : {0.1, 0.25, 1.0 / 3.0, 0.5, 0.9}) {
    const BigRat uq(u);
    CHECK(naive_ratio(u) == doctest::Approx(static_cast<double>(naive_ratio_exact(uq))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(naive_ratio(0.0), std::invalid_argument);
  CHECK_THROWS_AS(naive_ratio(1.0), std::invalid_argument);
}

TEST_CASE("standardized mgf") {
  CHECK(standardized_mgf(0.5, 100, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double target = std::exp(1.0 / 27.0);  // sigma2(1/2) t^2 / 2 at t = 1
  CHECK(std::abs(standardized_mgf(0.5, 4096, 1.0) - target) < 0.02);
  CHECK(std::abs(standardized_mgf(0.5, 4096, -1.0) - target) < 0.02);
  CHECK_THROWS_AS(standardized_mgf(0.5, 4096, 1e6), std::overflow_error);
  CHECK_THROWS_AS(standardized_mgf(0.0, 100, 1.0), std::invalid_argument);
}
