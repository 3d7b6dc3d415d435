#pragma once

#include <cstdint>
#include <vector>

#include "branchbayes/bignum.hpp"
#include "branchbayes/branching.hpp"
#include "branchbayes/logreal.hpp"

namespace branchbayes {

// A finite distribution on a contiguous integer range, carried as
// unnormalized log weights plus normalized probabilities. Distributions
// built from exact rationals additionally keep exact probabilities, used by
// the closed-form table tests and the exact ordering checks.
class DiscreteDist {
 public:
  DiscreteDist(std::int64_t lo, std::vector<double> log_weights);
  static DiscreteDist dirac(std::int64_t at);
  static DiscreteDist from_exact(std::int64_t lo, std::vector<BigRat> weights);

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(probs_.size()) - 1; }
  std::size_t size() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& log_weights() const { return log_weights_; }

  bool is_exact() const { return !exact_probs_.empty(); }
  const std::vector<BigRat>& exact_probs() const { return exact_probs_; }

  double prob(std::int64_t y) const;
  double mean() const;
  double variance() const;
  // P(Y >= z).
  double survival(std::int64_t z) const;
  BigRat exact_survival(std::int64_t z) const;
  double total_variation(const DiscreteDist& other) const;

 private:
  std::int64_t lo_ = 0;
  std::vector<double> log_weights_;
  std::vector<double> probs_;
  std::vector<BigRat> exact_probs_;
};

// Jeffreys priors of the model: Lambda carries the improper density
// 1/sqrt(lambda) (felt only through the integrated-out weight d_{1/2}(x0)),
// U the proper unnormalized density pi_n.
struct PriorSpec {
  std::int64_t n = 1;
  double pi_n(double u) const;
  double log_pi_n(double u) const;
};

// The finite-n posterior of (X0, U) given observations x_{1:n}, reduced to
// (x1, xn, sn): per-x0 marginal weights and conditional U densities on a
// shared quadrature grid.
struct JointPosterior {
  std::int64_t x1 = 0;
  std::int64_t xn = 0;
  std::int64_t sn = 0;
  std::int64_t n = 0;

  DiscreteDist x0_marginal = DiscreteDist::dirac(0);  // support {h(x1)..x1}
  std::vector<double> u_grid;                     // nodes in (0,1)
  std::vector<std::vector<double>> u_conditional; // per x0, density on u_grid
  std::vector<double> u_marginal_density;         // mixture over x0
  double u_mean = 0.0;
  double u_sd = 0.0;
};

// Smallest integer h with 2h >= x.
std::int64_t upper_half(std::int64_t x);

// The limit posterior mu(r,x) with weights C(2y,y) C(y,x-y) r^y on
// y in {h(x)..x}; r = +inf gives the Dirac at x, r = 0 the Dirac at h(x).
DiscreteDist limit_posterior(double r, std::int64_t x);
DiscreteDist limit_posterior_exact(const BigRat& r, std::int64_t x);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean and variance of mu(r,x). The mean is computed both from the
// normalized weights and through A(r,x) = 2r (c_{3/2}(r,x-1) + c_{3/2}(r,x-2));
// the routes must agree to relative 1e-9.
Moments limit_moments(double r, std::int64_t x);

// Smallest maximizer of nu(r,x), found by scanning the weight ratio for its
// crossing below 1 (the ratio sequence is nonincreasing, so the weights are
// unimodal). Ties break toward the smaller y.
std::int64_t limit_mode(double r, std::int64_t x);

// Unnormalized Jeffreys prior density of U based on n generations:
// pi_n(u) = sqrt( ((1+u)^n - 1) / (u^2 (1-u)) ). Diverges at both endpoints.
double jeffreys_pi_n(std::int64_t n, double u);
double log_jeffreys_pi_n(std::int64_t n, double u);

// The Lambda-integrated-out weight 2^{-2x} C(2x,x) of X0 = x (the sqrt(pi)
// factor cancels in normalization); equals d_{1/2}(x).
double marginal_x0_weight(std::int64_t x);

// Finite-n joint posterior from an observed path x_{1:n} (n >= 2). The
// U-integral per x0 runs in log space under the substitution u = sin^2(theta),
// with the peak located first and adaptive Simpson refined around it.
JointPosterior joint_posterior(const Path& path);

// True iff d2 stochastically dominates d1: the survival function of d2 is
// >= that of d1 everywhere. Exact comparison when both sides are exact,
// otherwise with tolerance 1e-12.
bool stochastic_leq(const DiscreteDist& d1, const DiscreteDist& d2, double tol = 1e-12);

// Ratio of the Bayesian mean E_u(xi_2) to the naive prediction 2/(1+u);
// equals 1 at u = 1/3, exceeds 1 below, drops below 1 above.
double naive_ratio(double u);
BigRat naive_ratio_exact(const BigRat& u);

// F_x(t) = exp(-t sqrt(x) m_u) B(r e^{t/sqrt(x)}, x) / B(r, x) with
// r = rho(u); converges to exp(sigma2_u t^2 / 2) as x grows.
double standardized_mgf(double u, std::int64_t x, double t);

}  // namespace branchbayes
