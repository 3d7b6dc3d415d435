#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace branchbayes {

// A nonnegative real carried by its natural logarithm. log() == -inf encodes
// an exact zero weight. All distribution weights in this library are
// nonnegative, so no sign field is needed.
class LogReal {
 public:
  constexpr LogReal() : log_(-std::numeric_limits<double>::infinity()) {}

  static constexpr LogReal from_log(double log_value) { return LogReal(log_value); }

  static LogReal from_value(double value) {
    if (value < 0.0 || std::isnan(value)) {
      throw std::invalid_argument("LogReal::from_value: negative or NaN weight");
    }
    return LogReal(std::log(value));
  }

  static constexpr LogReal zero() { return LogReal(); }
  static constexpr LogReal one() { return LogReal(0.0); }

  constexpr double log() const { return log_; }
  double value() const { return std::exp(log_); }
  constexpr bool is_zero() const { return std::isinf(log_) && log_ < 0.0; }

  friend constexpr LogReal operator*(LogReal a, LogReal b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogReal(a.log_ + b.log_);
  }
  friend constexpr LogReal operator/(LogReal a, LogReal b) {
    if (a.is_zero()) return zero();
    return LogReal(a.log_ - b.log_);
  }
  friend LogReal operator+(LogReal a, LogReal b);

  friend constexpr bool operator<(LogReal a, LogReal b) { return a.log_ < b.log_; }
  friend constexpr bool operator==(LogReal a, LogReal b) { return a.log_ == b.log_; }

 private:
  explicit constexpr LogReal(double log_value) : log_(log_value) {}
  double log_;
};

// log(sum_i exp(v_i)) without overflow; exactly -inf iff every input is -inf.
// Throws on an empty list.
LogReal log_sum_exp(std::span<const LogReal> values);
double log_sum_exp(std::span<const double> log_values);

inline LogReal operator+(LogReal a, LogReal b) {
  const LogReal pair[2] = {a, b};
  return log_sum_exp(pair);
}

}  // namespace branchbayes
