#include "branchbayes/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "branchbayes/kernel.hpp"
#include "branchbayes/quadrature.hpp"

namespace branchbayes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

DiscreteDist::DiscreteDist(std::int64_t lo, std::vector<double> log_weights)
    : lo_(lo), log_weights_(std::move(log_weights)) {
  if (log_weights_.empty()) fail("DiscreteDist: empty support");
  for (double lw : log_weights_) {
    if (std::isnan(lw) || lw == kInf) fail("DiscreteDist: weight must be finite or zero");
  }
  const double total = log_sum_exp(std::span<const double>(log_weights_));
  if (std::isinf(total)) fail("DiscreteDist: all weights are zero");
  probs_.resize(log_weights_.size());
  for (std::size_t i = 0; i < log_weights_.size(); ++i) {
    probs_[i] = std::exp(log_weights_[i] - total);
  }
}

DiscreteDist DiscreteDist::dirac(std::int64_t at) {
  DiscreteDist d(at, std::vector<double>{0.0});
  d.exact_probs_ = {BigRat(1)};
  return d;
}

DiscreteDist DiscreteDist::from_exact(std::int64_t lo, std::vector<BigRat> weights) {
  if (weights.empty()) fail("DiscreteDist: empty support");
  BigRat total(0);
  for (const BigRat& w : weights) {
    if (w < 0) fail("DiscreteDist: negative weight");
    total += w;
  }
  if (total == 0) fail("DiscreteDist: all weights are zero");
  std::vector<double> lws(weights.size());
  std::vector<BigRat> ps(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    ps[i] = weights[i] / total;
    const double p = ps[i].convert_to<double>();
    lws[i] = p > 0.0 ? std::log(p) : -kInf;
  }
  DiscreteDist d(lo, std::move(lws));
  d.exact_probs_ = std::move(ps);
  return d;
}

double DiscreteDist::prob(std::int64_t y) const {
  if (y < lo_ || y > hi()) return 0.0;
  return probs_[static_cast<std::size_t>(y - lo_)];
}

double DiscreteDist::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    m += probs_[i] * static_cast<double>(lo_ + static_cast<std::int64_t>(i));
  }
  return m;
}

double DiscreteDist::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double d = static_cast<double>(lo_ + static_cast<std::int64_t>(i)) - m;
    v += probs_[i] * d * d;
  }
  return v;
}

double DiscreteDist::survival(std::int64_t z) const {
  double s = 0.0;
  const std::int64_t from = std::max(z, lo_);
  for (std::int64_t y = from; y <= hi(); ++y) {
    s += probs_[static_cast<std::size_t>(y - lo_)];
  }
  return s;
}

BigRat DiscreteDist::exact_survival(std::int64_t z) const {
  if (!is_exact()) throw std::logic_error("DiscreteDist: exact_survival on a float-only distribution");
  BigRat s(0);
  const std::int64_t from = std::max(z, lo_);
  for (std::int64_t y = from; y <= hi(); ++y) {
    s += exact_probs_[static_cast<std::size_t>(y - lo_)];
  }
  return s;
}

double DiscreteDist::total_variation(const DiscreteDist& other) const {
  const std::int64_t a = std::min(lo_, other.lo_);
  const std::int64_t b = std::max(hi(), other.hi());
  double tv = 0.0;
  for (std::int64_t y = a; y <= b; ++y) {
    tv += std::abs(prob(y) - other.prob(y));
  }
  return 0.5 * tv;
}

std::int64_t upper_half(std::int64_t x) {
  if (x < 1) fail("upper_half: x must be >= 1");
  return (x + 1) / 2;
}

DiscreteDist limit_posterior(double r, std::int64_t x) {
  if (x < 1) fail("limit_posterior: x must be >= 1");
  if (std::isnan(r) || r < 0.0) fail("limit_posterior: r must lie in [0, +inf]");
  if (r == 0.0) return DiscreteDist::dirac(upper_half(x));
  if (std::isinf(r)) return DiscreteDist::dirac(x);
  const std::int64_t h = upper_half(x);
  const double log_r = std::log(r);
  std::vector<double> lws;
  lws.reserve(static_cast<std::size_t>(x - h + 1));
  for (std::int64_t y = h; y <= x; ++y) {
    lws.push_back(log_binomial(2 * y, y) + log_binomial(y, x - y) +
                  static_cast<double>(y) * log_r);
  }
  return DiscreteDist(h, std::move(lws));
}

DiscreteDist limit_posterior_exact(const BigRat& r, std::int64_t x) {
  if (x < 1) fail("limit_posterior_exact: x must be >= 1");
  if (r < 0) fail("limit_posterior_exact: r must be >= 0");
  if (r == 0) return DiscreteDist::dirac(upper_half(x));
  const std::int64_t h = upper_half(x);
  const BigNat num = boost::multiprecision::numerator(r);
  const BigNat den = boost::multiprecision::denominator(r);
  std::vector<BigRat> ws;
  ws.reserve(static_cast<std::size_t>(x - h + 1));
  for (std::int64_t y = h; y <= x; ++y) {
    const unsigned py = static_cast<unsigned>(y);
    const BigNat top = binomial(2 * y, y) * binomial(y, x - y) * boost::multiprecision::pow(num, py);
    ws.emplace_back(top, boost::multiprecision::pow(den, py));
  }
  return DiscreteDist::from_exact(h, std::move(ws));
}

Moments limit_moments(double r, std::int64_t x) {
  if (x < 1) fail("limit_moments: x must be >= 1");
  if (!(r > 0.0) || std::isinf(r)) fail("limit_moments: r must be finite and positive");
  const DiscreteDist d = limit_posterior(r, x);
  Moments mom;
  mom.mean = d.mean();
  mom.variance = d.variance();

  // Independent route for the mean: x-th coefficient of the derivative
  // identity, A(r,x) = 2r (c_{3/2}(r,x-1) + c_{3/2}(r,x-2)), divided by
  // B(r,x) = c_{1/2}(r,x).
  const LogReal b = log_c_lambda(0.5, r, x);
  const LogReal c1 = x >= 1 ? log_c_lambda(1.5, r, x - 1) : LogReal::zero();
  const LogReal c2 = x >= 2 ? log_c_lambda(1.5, r, x - 2) : LogReal::zero();
  const LogReal a = LogReal::from_value(2.0 * r) * (c1 + c2);
  const double mean_via_coeffs = (a / b).value();
  if (std::abs(mean_via_coeffs - mom.mean) > 1e-9 * mom.mean) {
    throw std::runtime_error("limit_moments: weight route and coefficient route disagree");
  }
  return mom;
}

std::int64_t limit_mode(double r, std::int64_t x) {
  if (x < 1) fail("limit_mode: x must be >= 1");
  if (!(r > 0.0) || std::isinf(r)) fail("limit_mode: r must be finite and positive");
  const double half_x = 0.5 * static_cast<double>(x);
  std::int64_t y = upper_half(x);
  while (y < x) {
    const double yd = static_cast<double>(y);
    const double ratio = (yd + 0.5) * (static_cast<double>(x) - yd) * r /
                         ((yd + 1.0 - half_x) * (yd + 0.5 - half_x));
    if (!(ratio > 1.0)) break;  // a tie keeps the smaller maximizer
    ++y;
  }
  return y;
}

namespace {

// log((1+u)^n - 1); the small-u branch avoids the loss of (1+u)^n - 1 when
// n*u underflows the log1p/expm1 path.
double log_growth_factor(std::int64_t n, double u, double log_u) {
  const double nd = static_cast<double>(n);
  if (nd * u < 1e-8) {
    return std::log(nd) + log_u + std::log1p(0.5 * (nd - 1.0) * u);
  }
  const double t = nd * std::log1p(u);
  if (t > 40.0) return t + std::log1p(-std::exp(-t));
  return std::log(std::expm1(t));
}

}  // namespace

double log_jeffreys_pi_n(std::int64_t n, double u) {
  if (n < 1) fail("jeffreys_pi_n: n must be >= 1");
  if (!(u > 0.0) || !(u < 1.0)) fail("jeffreys_pi_n: u must lie strictly inside (0,1)");
  const double log_u = std::log(u);
  return 0.5 * (log_growth_factor(n, u, log_u) - 2.0 * log_u - std::log1p(-u));
}

double jeffreys_pi_n(std::int64_t n, double u) { return std::exp(log_jeffreys_pi_n(n, u)); }

double PriorSpec::pi_n(double u) const { return jeffreys_pi_n(n, u); }

double PriorSpec::log_pi_n(double u) const { return log_jeffreys_pi_n(n, u); }

double marginal_x0_weight(std::int64_t x) { return d_lambda(0.5, x); }

namespace {

// Log of the U-integrand for one candidate x0, in the variable theta with
// u = sin^2(theta). The substitution absorbs both endpoint singularities of
// pi_n: with a = xn - x0 and c = sn - 2 xn + 2 x0,
//   L(theta) = (2a - 1) log sin + 2c log cos + log((1+u)^n - 1)/2 + log 2,
// which is finite at theta = 0 when a = 0 and at theta = pi/2 when c = 0.
class ThetaIntegrand {
 public:
  ThetaIntegrand(std::int64_t a, std::int64_t c, std::int64_t n, int u_power)
      : a_(a), c_(c), n_(n), u_power_(u_power) {}

  double operator()(double theta) const {
    const double s = std::sin(theta);
    const double co = std::cos(theta);
    if (s <= 0.0) {
      if (a_ > 0 || u_power_ > 0) return -kInf;
      return std::log(2.0) + 0.5 * std::log(static_cast<double>(n_));
    }
    const double log_s = std::log(s);
    const double u = s * s;
    double v = (2.0 * static_cast<double>(a_) - 1.0) * log_s +
               0.5 * log_growth_factor(n_, u, 2.0 * log_s) + std::log(2.0) +
               2.0 * static_cast<double>(u_power_) * log_s;
    if (c_ > 0) {
      if (co <= 0.0) return -kInf;
      v += 2.0 * static_cast<double>(c_) * std::log(co);
    }
    return v;
  }

 private:
  std::int64_t a_;
  std::int64_t c_;
  std::int64_t n_;
  int u_power_;  // extra factor u^k for conditional moments
};

constexpr double kHalfPi = std::numbers::pi / 2.0;

double log_integral(const ThetaIntegrand& f, PeakInfo* peak_out = nullptr) {
  const auto fn = std::function<double(double)>(std::cref(f));
  const PeakInfo peak = locate_log_peak(fn, 0.0, kHalfPi);
  if (peak_out != nullptr) *peak_out = peak;
  return log_adaptive_simpson(fn, 0.0, kHalfPi, peak).log_integral;
}

}  // namespace

JointPosterior joint_posterior(const Path& path) {
  const auto obs = path.observed();
  if (obs.size() < 2) fail("joint_posterior: need at least two observed values");
  if (!validate_admissible(obs)) fail("joint_posterior: path is not admissible");
  const PathStats st = path_stats(path);

  JointPosterior post;
  post.x1 = st.x1;
  post.xn = st.xn;
  post.sn = st.sn;
  post.n = st.n;

  const std::int64_t h = upper_half(st.x1);
  const std::size_t count = static_cast<std::size_t>(st.x1 - h + 1);

  // Transition binomials for steps 2..n are common to every x0 and cancel in
  // normalization; only the x0-dependent pieces are kept.
  std::vector<double> log_w(count);
  std::vector<double> cond_mean(count);
  std::vector<double> cond_second(count);
  std::vector<double> log_norm(count);
  std::vector<PeakInfo> peaks(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t x0 = h + static_cast<std::int64_t>(i);
    const std::int64_t a = st.xn - x0;
    const std::int64_t c = st.sn - 2 * st.xn + 2 * x0;
    if (a < 0 || c < 0) throw std::logic_error("joint_posterior: exponents left the admissible cone");
    const double li = log_integral(ThetaIntegrand(a, c, st.n, 0), &peaks[i]);
    const double li_u = log_integral(ThetaIntegrand(a, c, st.n, 1));
    const double li_uu = log_integral(ThetaIntegrand(a, c, st.n, 2));
    log_norm[i] = li;
    cond_mean[i] = std::exp(li_u - li);
    cond_second[i] = std::exp(li_uu - li);
    log_w[i] = log_d_lambda(0.5, x0) + log_binomial(x0, st.x1 - x0) + li;
  }
  post.x0_marginal = DiscreteDist(h, log_w);

  // Shared grid: a coarse sweep of (0, pi/2) plus a fine window spanning
  // every conditional peak, so each density is resolved on its own scale.
  double win_lo = kHalfPi;
  double win_hi = 0.0;
  for (const PeakInfo& p : peaks) {
    win_lo = std::min(win_lo, p.position - 15.0 * p.width);
    win_hi = std::max(win_hi, p.position + 15.0 * p.width);
  }
  win_lo = std::max(win_lo, 1e-9);
  win_hi = std::min(win_hi, kHalfPi - 1e-9);
  std::vector<double> thetas;
  constexpr int kCoarse = 256;
  constexpr int kFine = 4096;
  for (int j = 1; j < kCoarse; ++j) {
    thetas.push_back(kHalfPi * static_cast<double>(j) / kCoarse);
  }
  if (win_hi > win_lo) {
    for (int j = 0; j <= kFine; ++j) {
      thetas.push_back(win_lo + (win_hi - win_lo) * static_cast<double>(j) / kFine);
    }
  }
  std::sort(thetas.begin(), thetas.end());

  post.u_grid.reserve(thetas.size());
  std::vector<double> grid_theta;
  grid_theta.reserve(thetas.size());
  for (double t : thetas) {
    const double u = std::sin(t) * std::sin(t);
    if (u <= 0.0 || u >= 1.0) continue;
    if (!post.u_grid.empty() && u <= post.u_grid.back()) continue;
    post.u_grid.push_back(u);
    grid_theta.push_back(t);
  }

  post.u_conditional.assign(count, std::vector<double>(post.u_grid.size(), 0.0));
  post.u_marginal_density.assign(post.u_grid.size(), 0.0);
  const std::vector<double>& w = post.x0_marginal.probs();
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t x0 = h + static_cast<std::int64_t>(i);
    const ThetaIntegrand f(st.xn - x0, st.sn - 2 * st.xn + 2 * x0, st.n, 0);
    for (std::size_t j = 0; j < post.u_grid.size(); ++j) {
      const double t = grid_theta[j];
      // Density in u: divide the theta-integrand by du/dtheta = sin(2 theta).
      const double log_density = f(t) - std::log(std::sin(2.0 * t)) - log_norm[i];
      const double d = std::exp(log_density);
      post.u_conditional[i][j] = d;
      post.u_marginal_density[j] += w[i] * d;
    }
  }

  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    mean += w[i] * cond_mean[i];
    second += w[i] * cond_second[i];
  }
  post.u_mean = mean;
  post.u_sd = std::sqrt(std::max(0.0, second - mean * mean));
  return post;
}

bool stochastic_leq(const DiscreteDist& d1, const DiscreteDist& d2, double tol) {
  const std::int64_t a = std::min(d1.lo(), d2.lo());
  const std::int64_t b = std::max(d1.hi(), d2.hi());
  const bool exact = d1.is_exact() && d2.is_exact();
  for (std::int64_t z = a; z <= b; ++z) {
    if (exact) {
      if (d1.exact_survival(z) > d2.exact_survival(z)) return false;
    } else {
      if (d1.survival(z) > d2.survival(z) + tol) return false;
    }
  }
  return true;
}

double naive_ratio(double u) {
  if (!(u > 0.0) || !(u < 1.0)) fail("naive_ratio: u must lie strictly inside (0,1)");
  const double one_m = 1.0 - u;
  const double direct =
      (4.0 * u + 6.0 * one_m * one_m) * (1.0 + u) / (2.0 * (4.0 * u + 3.0 * one_m * one_m));
  // Same quantity through the posterior mean of xi_2 at r = rho(u).
  const double via_mean = limit_moments(rho(u), 2).mean * (1.0 + u) / 2.0;
  if (std::abs(direct - via_mean) > 1e-12 * direct) {
    throw std::runtime_error("naive_ratio: closed form and posterior mean disagree");
  }
  return direct;
}

BigRat naive_ratio_exact(const BigRat& u) {
  if (!(u > 0) || !(u < 1)) fail("naive_ratio_exact: u must lie strictly inside (0,1)");
  const BigRat one_m = BigRat(1) - u;
  const BigRat direct =
      (4 * u + 6 * one_m * one_m) * (1 + u) / (2 * (4 * u + 3 * one_m * one_m));
  const BigRat r = one_m * one_m / (4 * u);
  const DiscreteDist d = limit_posterior_exact(r, 2);
  BigRat mean(0);
  for (std::size_t i = 0; i < d.exact_probs().size(); ++i) {
    mean += d.exact_probs()[i] * BigRat(d.lo() + static_cast<std::int64_t>(i));
  }
  if (direct != mean * (1 + u) / 2) {
    throw std::runtime_error("naive_ratio_exact: closed form and posterior mean disagree");
  }
  return direct;
}

double standardized_mgf(double u, std::int64_t x, double t) {
  if (!(u > 0.0) || !(u < 1.0)) fail("standardized_mgf: u must lie strictly inside (0,1)");
  if (x < 1) fail("standardized_mgf: x must be >= 1");
  if (!std::isfinite(t)) fail("standardized_mgf: t must be finite");
  const ScalarBundle sb = r_scalars(u);
  const double sqrt_x = std::sqrt(static_cast<double>(x));
  const double r_tilt = sb.r * std::exp(t / sqrt_x);
  if (!std::isfinite(r_tilt) || r_tilt <= 0.0) {
    throw std::overflow_error("standardized_mgf: tilted parameter overflowed");
  }
  const double log_f = -t * sqrt_x * sb.m + log_c_lambda(0.5, r_tilt, x).log() -
                       log_c_lambda(0.5, sb.r, x).log();
  const double f = std::exp(log_f);
  if (!std::isfinite(f)) {
    throw std::overflow_error("standardized_mgf: value overflowed");
  }
  return f;
}

}  // namespace branchbayes
