#pragma once

#include <cstdint>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace branchbayes {

// Exact arbitrary-precision carriers. BigNat values are kept nonnegative by
// construction; BigRat is used for the exact-rational distribution mode.
using BigNat = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

// C(n,k), exact. Returns 0 when k < 0 or k > n.
BigNat binomial(std::int64_t n, std::int64_t k);

// log C(n,k) as a double, -inf when k < 0 or k > n. Accurate to a few ulp
// for n up to ~1e15 via the stable log-gamma ratio in kernel.cpp.
double log_binomial(std::int64_t n, std::int64_t k);

// Exact d_{1/2}(x) = C(2x,x) / 4^x as a rational.
BigRat d_half_exact(std::int64_t x);

}  // namespace branchbayes
