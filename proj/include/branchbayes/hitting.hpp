#pragma once

#include <cstdint>

#include "branchbayes/posterior.hpp"

namespace branchbayes {

// Conditional distribution of the parent count eta_x given the hit H_x,
// together with P(H_x); support {h(x)..x}.
struct HittingDist {
  std::int64_t x = 0;
  double u = 0.0;
  DiscreteDist dist = DiscreteDist::dirac(0);
  double hitting_prob = 0.0;
};

// P(sigma_y = x) = C(y, x-y) u^{x-y} (1-u)^{2y-x} for y <= x <= 2y, else 0:
// the offspring sum of y parents, each leaving 1 or 2 children.
double sigma_pmf(std::int64_t y, std::int64_t x, double u);

// P(H_x) = (1 - (-u)^{x+1}) / (1+u), the chance the offspring sums ever hit
// x exactly. Equals the sum of sigma_pmf(y, x, u) over y.
double hitting_prob(std::int64_t x, double u);

// P(eta_x = y) = P(sigma_y = x) / P(H_x) on y in {h(x)..x}, computed in log
// space. Asserted equal (to 1e-12) to the normalization of the tilted
// measure with weights C(y, x-y) (4r)^y at r = rho(u).
HittingDist eta_dist(std::int64_t x, double u);

// First-passage pmf of zeta_x = inf{y >= 1 : sigma_y >= x}. The sum either
// lands exactly on x-1 and any child count works, or on x-2 and the next
// parent must leave two:
//   P(zeta_x = y) = P(sigma_{y-1} = x-1) + u P(sigma_{y-1} = x-2).
double zeta_pmf(std::int64_t x, std::int64_t y, double u);

// Max absolute deviation, over the support, between eta_dist and the
// alternating representation
//   P(eta_x = y) = (1+u)/(1-(-u)^{x+1}) sum_{z=0}^{x-1} (-u)^z P(zeta_{x+1-z} = y+1).
double eta_alternating_identity_check(std::int64_t x, double u);

// E(eta_x) = (x+1)/(1+u) (1+(-u)^{x+2})/(1-(-u)^{x+1}) - (1+u^2)/(1+u)^2.
// Cross-checked against the direct expectation of eta_dist for x <= 200.
double eta_mean_exact(std::int64_t x, double u);

struct EtaMeanBounds {
  double lower = 0.0;  // x/(1+u) - 2u^2/(1+u)^2
  double upper = 0.0;  // x/(1+u) + 2u/(1+u)^2
  bool parity_bound_ok = false;
};

// General bounds on E(eta_x) plus the parity refinement: odd x stay above
// x/(1+u), even x stay below x/(1+u) + u(1-u)/(1+u).
EtaMeanBounds eta_mean_bounds(std::int64_t x, double u);

// g_x(r) = sum_y C(y, x-y) (4r)^y via the two-pole closed form
//   gamma gamma2/(gamma+gamma2) (gamma^{-(x+1)} - (-gamma2)^{-(x+1)});
// also the x-th coefficient c_1(r,x).
double g_closed_form(double r, std::int64_t x);

}  // namespace branchbayes
