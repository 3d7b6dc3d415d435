#include "branchbayes/hitting.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "branchbayes/bignum.hpp"
#include "branchbayes/kernel.hpp"

namespace branchbayes {

namespace {

void check_u(double u, const char* who) {
  if (!(u > 0.0) || !(u < 1.0)) {
    throw std::invalid_argument(std::string(who) + ": u must lie strictly inside (0,1)");
  }
}

// (-u)^k with explicit sign tracking; x stays small enough here that plain
// powers do not overflow (they may underflow to 0, which is the right limit).
double neg_u_pow(double u, std::int64_t k) {
  const double p = std::pow(u, static_cast<double>(k));
  return (k % 2 == 0) ? p : -p;
}

// P(sigma_y = x) extended to y = 0 (a point mass at 0), used by zeta_pmf.
double sigma_pmf_ext(std::int64_t y, std::int64_t x, double u) {
  if (y == 0) return x == 0 ? 1.0 : 0.0;
  if (x < y || x > 2 * y) return 0.0;
  return std::exp(log_binomial(y, x - y) + static_cast<double>(x - y) * std::log(u) +
                  static_cast<double>(2 * y - x) * std::log1p(-u));
}

}  // namespace

double sigma_pmf(std::int64_t y, std::int64_t x, double u) {
  if (y < 1) throw std::invalid_argument("sigma_pmf: y must be >= 1");
  check_u(u, "sigma_pmf");
  return sigma_pmf_ext(y, x, u);
}

double hitting_prob(std::int64_t x, double u) {
  if (x < 1) throw std::invalid_argument("hitting_prob: x must be >= 1");
  check_u(u, "hitting_prob");
  return (1.0 - neg_u_pow(u, x + 1)) / (1.0 + u);
}

HittingDist eta_dist(std::int64_t x, double u) {
  if (x < 1) throw std::invalid_argument("eta_dist: x must be >= 1");
  check_u(u, "eta_dist");
  const std::int64_t h = upper_half(x);
  const double log_u = std::log(u);
  const double log_1mu = std::log1p(-u);
  std::vector<double> lw_sigma;
  lw_sigma.reserve(static_cast<std::size_t>(x - h + 1));
  for (std::int64_t y = h; y <= x; ++y) {
    lw_sigma.push_back(log_binomial(y, x - y) + static_cast<double>(x - y) * log_u +
                       static_cast<double>(2 * y - x) * log_1mu);
  }
  HittingDist out;
  out.x = x;
  out.u = u;
  out.dist = DiscreteDist(h, lw_sigma);
  out.hitting_prob = hitting_prob(x, u);

  // The same measure through the tilted weights C(y,x-y) (4r)^y at r=rho(u):
  // they differ from the sigma weights by the constant factor (u/(1-u))^x.
  const double log_4r = std::log(4.0 * rho(u));
  std::vector<double> lw_tilt;
  lw_tilt.reserve(lw_sigma.size());
  for (std::int64_t y = h; y <= x; ++y) {
    lw_tilt.push_back(log_binomial(y, x - y) + static_cast<double>(y) * log_4r);
  }
  const DiscreteDist tilted(h, lw_tilt);
  for (std::size_t i = 0; i < out.dist.size(); ++i) {
    if (std::abs(out.dist.probs()[i] - tilted.probs()[i]) > 1e-12) {
      throw std::runtime_error("eta_dist: sigma route and tilted route disagree");
    }
  }
  return out;
}

double zeta_pmf(std::int64_t x, std::int64_t y, double u) {
  if (x < 1 || y < 1) throw std::invalid_argument("zeta_pmf: x and y must be >= 1");
  check_u(u, "zeta_pmf");
  return sigma_pmf_ext(y - 1, x - 1, u) + u * sigma_pmf_ext(y - 1, x - 2, u);
}

double eta_alternating_identity_check(std::int64_t x, double u) {
  const HittingDist eta = eta_dist(x, u);
  const double prefactor = (1.0 + u) / (1.0 - neg_u_pow(u, x + 1));
  double worst = 0.0;
  for (std::int64_t y = eta.dist.lo(); y <= eta.dist.hi(); ++y) {
    double sum = 0.0;
    for (std::int64_t z = 0; z < x; ++z) {
      sum += neg_u_pow(u, z) * zeta_pmf(x + 1 - z, y + 1, u);
    }
    worst = std::max(worst, std::abs(eta.dist.prob(y) - prefactor * sum));
  }
  return worst;
}

double eta_mean_exact(std::int64_t x, double u) {
  if (x < 1) throw std::invalid_argument("eta_mean_exact: x must be >= 1");
  check_u(u, "eta_mean_exact");
  const double closed = static_cast<double>(x + 1) / (1.0 + u) *
                            (1.0 + neg_u_pow(u, x + 2)) / (1.0 - neg_u_pow(u, x + 1)) -
                        (1.0 + u * u) / ((1.0 + u) * (1.0 + u));
  if (x <= 200) {
    const double direct = eta_dist(x, u).dist.mean();
    if (std::abs(closed - direct) > 1e-10) {
      throw std::runtime_error("eta_mean_exact: closed form and direct expectation disagree");
    }
  }
  return closed;
}

EtaMeanBounds eta_mean_bounds(std::int64_t x, double u) {
  if (x < 1) throw std::invalid_argument("eta_mean_bounds: x must be >= 1");
  check_u(u, "eta_mean_bounds");
  const double m = static_cast<double>(x) / (1.0 + u);
  const double denom2 = (1.0 + u) * (1.0 + u);
  EtaMeanBounds b;
  b.lower = m - 2.0 * u * u / denom2;
  b.upper = m + 2.0 * u / denom2;
  const double mean = eta_mean_exact(x, u);
  const double slack = 1e-9;
  if (x % 2 == 1) {
    b.parity_bound_ok = mean >= m - slack;
  } else {
    b.parity_bound_ok = mean <= m + u * (1.0 - u) / (1.0 + u) + slack;
  }
  return b;
}

double g_closed_form(double r, std::int64_t x) {
  if (!(r > 0.0) || std::isinf(r)) {
    throw std::invalid_argument("g_closed_form: r must be finite and positive");
  }
  if (x < 0) throw std::invalid_argument("g_closed_form: x must be >= 0");
  const double g = gamma_of_r(r);
  const double g2 = g + 1.0;
  const double sign = (x % 2 == 0) ? 1.0 : -1.0;  // -(-g2)^{-(x+1)} = (-1)^x g2^{-(x+1)}
  return g * g2 / (g + g2) *
         (std::pow(g, -static_cast<double>(x + 1)) +
          sign * std::pow(g2, -static_cast<double>(x + 1)));
}

}  // namespace branchbayes
