#pragma once

#include <cstdint>
#include <vector>

#include "branchbayes/logreal.hpp"

namespace branchbayes {

// Taylor coefficients of (1-z)^{-lambda}:
//   d_lambda(x) = Gamma(x+lambda) / (Gamma(x+1) Gamma(lambda)).
// Exact product for x <= 64, log-gamma differences beyond; relative error
// <= 1e-12 up to x = 1e6.
double d_lambda(double lambda, std::int64_t x);
double log_d_lambda(double lambda, std::int64_t x);

// log( Gamma(x+lambda) / Gamma(x+1) ), computed without the cancellation a
// naive lgamma difference suffers from at large x.
double log_gamma_ratio(std::int64_t x, double lambda);

// gamma(r) = (sqrt((1+r)/r) - 1) / 2, evaluated in the algebraically
// equivalent form 1 / (2 (sqrt(r(1+r)) + r)) which stays accurate as r
// grows. gamma2 = gamma + 1.
double gamma_of_r(double r);

// m(r) = (1 + sqrt(r/(1+r))) / 2 and sigma2(r) = sqrt(r/(1+r)^3) / 4.
double m_of_r(double r);
double sigma2_of_r(double r);

// rho(u) = (1-u)^2 / (4u) on [0,1], with rho(0) = +inf and rho(1) = 0.
double rho(double u);

// Inverse of rho on (0, +inf]: the u in [0,1) with rho(u) = r.
double u_from_r(double r);

// Coefficients c_lambda(r,x) of C_lambda(r,z) = (1 - 4rz(1+z))^{-lambda},
// stored as log values. coeffs[0] = 1 and every entry is positive.
struct CoefTable {
  double lambda = 0.0;
  double r = 0.0;
  std::vector<LogReal> coeffs;  // index x = 0..x_max

  std::int64_t x_max() const { return static_cast<std::int64_t>(coeffs.size()) - 1; }
  // Coefficient for any integer index; zero for x < 0 (handy in the
  // shifted identities A(r,x) = 2r (c(x-1) + c(x-2))).
  LogReal at(std::int64_t x) const;
};

CoefTable c_lambda_table(double lambda, double r, std::int64_t x_max);

// Single coefficient, via the Cauchy product of the two one-pole expansions.
// The alternating inner sum runs in ordinary space after the dominant factor
// d_lambda(x) gamma^{-x} is pulled out; its terms decay geometrically with
// ratio gamma/(gamma+1) < 1.
LogReal log_c_lambda(double lambda, double r, std::int64_t x);

// Asymptotic scalars attached to one parameter value u. For interior u the
// r-formula route and the u-identity route are cross-checked to 1e-12; the
// endpoints u = 0, 1 yield a degenerate bundle used for the Dirac limits.
struct ScalarBundle {
  double u = 0.0;
  double r = 0.0;        // rho(u); +inf at u = 0
  double gamma = 0.0;    // gamma(r) = u/(1-u)
  double gamma2 = 0.0;   // gamma + 1
  double m = 0.0;        // 1/(1+u)
  double sigma2 = 0.0;   // u(1-u)/(1+u)^3
  bool degenerate = false;
};

ScalarBundle r_scalars(double u);

}  // namespace branchbayes
