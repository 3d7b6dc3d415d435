#include "branchbayes/logreal.hpp"

#include <algorithm>
#include <cmath>

namespace branchbayes {

double log_sum_exp(std::span<const double> log_values) {
  if (log_values.empty()) {
    throw std::invalid_argument("log_sum_exp: empty list");
  }
  const double max = *std::max_element(log_values.begin(), log_values.end());
  if (std::isinf(max) && max < 0.0) {
    return max;  // all weights are exactly zero
  }
  double acc = 0.0;
  for (double v : log_values) {
    acc += std::exp(v - max);
  }
  return max + std::log(acc);
}

LogReal log_sum_exp(std::span<const LogReal> values) {
  if (values.empty()) {
    throw std::invalid_argument("log_sum_exp: empty list");
  }
  std::vector<double> logs(values.size());
  std::transform(values.begin(), values.end(), logs.begin(),
                 [](LogReal v) { return v.log(); });
  return LogReal::from_log(log_sum_exp(std::span<const double>(logs)));
}

}  // namespace branchbayes
