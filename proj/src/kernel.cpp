#include "branchbayes/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "branchbayes/bignum.hpp"

namespace branchbayes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stirling tail S(z) with lgamma(z) = (z-1/2) log z - z + log(2 pi)/2 + S(z).
// Six Bernoulli terms keep the truncation error below 1e-22 for z >= 16.
double stirling_tail(double z) {
  const double w = 1.0 / z;
  const double w2 = w * w;
  return w * (1.0 / 12 + w2 * (-1.0 / 360 + w2 * (1.0 / 1260 + w2 * (-1.0 / 1680 + w2 * (1.0 / 1188 - w2 * 691.0 / 360360)))));
}

}  // namespace

BigNat binomial(std::int64_t n, std::int64_t k) {
  if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
  if (k < 0 || k > n) return BigNat(0);
  k = std::min(k, n - k);
  BigNat result(1);
  for (std::int64_t j = 1; j <= k; ++j) {
    result *= (n - k + j);
    result /= j;
  }
  return result;
}

double log_gamma_ratio(std::int64_t x, double lambda) {
  // log Gamma(x+lambda) - log Gamma(x+1).
  if (x <= 64) {
    return std::lgamma(x + lambda) - std::lgamma(x + 1.0);
  }
  // Stirling with the large terms grouped so nothing big cancels:
  // (x+1/2) log1p((lambda-1)/(x+1)) + (lambda-1)(log(x+lambda) - 1) + tails.
  const double a = x + lambda;
  const double b = x + 1.0;
  return (x + 0.5) * std::log1p((lambda - 1.0) / b) + (lambda - 1.0) * (std::log(a) - 1.0) +
         (stirling_tail(a) - stirling_tail(b));
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (n < 0) throw std::invalid_argument("log_binomial: n must be nonnegative");
  if (k < 0 || k > n) return -kInf;
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

BigRat d_half_exact(std::int64_t x) {
  BigNat four_pow(1);
  four_pow <<= 2 * x;
  return BigRat(binomial(2 * x, x), four_pow);
}

double log_d_lambda(double lambda, std::int64_t x) {
  if (lambda <= 0.0) throw std::invalid_argument("d_lambda: lambda must be positive");
  if (x < 0) return -kInf;
  if (x == 0) return 0.0;
  if (x <= 64) {
    double log_prod = 0.0;
    for (std::int64_t j = 0; j < x; ++j) {
      log_prod += std::log((lambda + j) / (1.0 + j));
    }
    return log_prod;
  }
  return log_gamma_ratio(x, lambda) - std::lgamma(lambda);
}

double d_lambda(double lambda, std::int64_t x) {
  if (lambda <= 0.0) throw std::invalid_argument("d_lambda: lambda must be positive");
  if (x < 0) return 0.0;
  if (x <= 64) {
    double prod = 1.0;
    for (std::int64_t j = 0; j < x; ++j) {
      prod *= (lambda + j) / (1.0 + j);
    }
    return prod;
  }
  return std::exp(log_d_lambda(lambda, x));
}

double gamma_of_r(double r) {
  if (r <= 0.0) throw std::invalid_argument("gamma_of_r: r must be positive");
  return 1.0 / (2.0 * (std::sqrt(r * (1.0 + r)) + r));
}

double m_of_r(double r) {
  if (r <= 0.0) throw std::invalid_argument("m_of_r: r must be positive");
  return 0.5 * (1.0 + std::sqrt(r / (1.0 + r)));
}

double sigma2_of_r(double r) {
  if (r <= 0.0) throw std::invalid_argument("sigma2_of_r: r must be positive");
  return 0.25 * std::sqrt(r / ((1.0 + r) * (1.0 + r) * (1.0 + r)));
}

double rho(double u) {
  if (u < 0.0 || u > 1.0 || std::isnan(u)) {
    throw std::invalid_argument("rho: u must lie in [0,1]");
  }
  if (u == 0.0) return kInf;
  return (1.0 - u) * (1.0 - u) / (4.0 * u);
}

double u_from_r(double r) {
  if (r < 0.0 || std::isnan(r)) throw std::invalid_argument("u_from_r: r must be nonnegative");
  if (r == 0.0) return 1.0;
  if (std::isinf(r)) return 0.0;
  const double g = gamma_of_r(r);
  return g / (1.0 + g);
}

LogReal CoefTable::at(std::int64_t x) const {
  if (x < 0) return LogReal::zero();
  if (x > x_max()) throw std::out_of_range("CoefTable::at: index beyond x_max");
  return coeffs[static_cast<std::size_t>(x)];
}

namespace {

// Shared core: log coefficients for x = 0..x_max given precomputed log d_lambda.
std::vector<LogReal> c_lambda_core(double lambda, double r, std::int64_t x_max) {
  const double g = gamma_of_r(r);
  const double log_g = std::log(g);
  const double log_q = std::log(g / (g + 1.0));  // inner ratio, < 0

  std::vector<double> ld(static_cast<std::size_t>(x_max) + 1);
  ld[0] = 0.0;
  for (std::int64_t b = 1; b <= x_max; ++b) {
    ld[static_cast<std::size_t>(b)] =
        ld[static_cast<std::size_t>(b - 1)] + std::log((lambda + (b - 1)) / static_cast<double>(b));
  }

  std::vector<LogReal> coeffs(static_cast<std::size_t>(x_max) + 1);
  for (std::int64_t x = 0; x <= x_max; ++x) {
    const double ldx = ld[static_cast<std::size_t>(x)];
    // S = sum_{b=0}^{x} (-q)^b d(b) d(x-b)/d(x), alternating with geometric
    // decay; accumulated in plain doubles after factoring out d(x) gamma^-x.
    double s = 0.0;
    double sign = 1.0;
    for (std::int64_t b = 0; b <= x; ++b) {
      const double log_term = b * log_q + ld[static_cast<std::size_t>(b)] +
                              ld[static_cast<std::size_t>(x - b)] - ldx;
      s += sign * std::exp(log_term);
      sign = -sign;
    }
    if (!(s > 0.0)) {
      throw std::runtime_error("c_lambda: inner sum lost positivity");
    }
    coeffs[static_cast<std::size_t>(x)] = LogReal::from_log(ldx - x * log_g + std::log(s));
  }
  return coeffs;
}

}  // namespace

CoefTable c_lambda_table(double lambda, double r, std::int64_t x_max) {
  if (lambda <= 0.0) throw std::invalid_argument("c_lambda_table: lambda must be positive");
  if (r <= 0.0) throw std::invalid_argument("c_lambda_table: r must be positive");
  if (x_max < 0) throw std::invalid_argument("c_lambda_table: x_max must be nonnegative");
  return CoefTable{lambda, r, c_lambda_core(lambda, r, x_max)};
}

LogReal log_c_lambda(double lambda, double r, std::int64_t x) {
  if (x < 0) return LogReal::zero();
  if (lambda <= 0.0) throw std::invalid_argument("log_c_lambda: lambda must be positive");
  if (r <= 0.0) throw std::invalid_argument("log_c_lambda: r must be positive");
  return c_lambda_core(lambda, r, x).back();
}

ScalarBundle r_scalars(double u) {
  if (u < 0.0 || u > 1.0 || std::isnan(u)) {
    throw std::invalid_argument("r_scalars: u must lie in [0,1]");
  }
  ScalarBundle b;
  b.u = u;
  if (u == 0.0 || u == 1.0) {
    b.degenerate = true;
    b.r = rho(u);
    b.gamma = (u == 0.0) ? kInf : 0.0;
    b.gamma2 = b.gamma + 1.0;
    b.m = 1.0 / (1.0 + u);
    b.sigma2 = 0.0;
    return b;
  }
  b.r = rho(u);
  const double gamma_formula = gamma_of_r(b.r);
  const double gamma_identity = u / (1.0 - u);
  const double m_formula = m_of_r(b.r);
  const double m_identity = 1.0 / (1.0 + u);
  const double s2_formula = sigma2_of_r(b.r);
  const double s2_identity = u * (1.0 - u) / ((1.0 + u) * (1.0 + u) * (1.0 + u));
  auto agree = [](double a, double c) {
    return std::abs(a - c) <= 1e-12 * std::max({std::abs(a), std::abs(c), 1e-300});
  };
  if (!agree(gamma_formula, gamma_identity) || !agree(m_formula, m_identity) ||
      !agree(s2_formula, s2_identity)) {
    throw std::runtime_error("r_scalars: formula and identity routes disagree beyond 1e-12");
  }
  b.gamma = gamma_identity;
  b.gamma2 = gamma_identity + 1.0;
  b.m = m_identity;
  b.sigma2 = s2_identity;
  return b;
}

}  // namespace branchbayes
