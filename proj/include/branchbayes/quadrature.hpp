#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

namespace branchbayes {

// Raised when an iterative numerical procedure exhausts its refinement cap.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Location and local width of the maximum of a log-integrand on [a, b].
// The width comes from the curvature at the peak (Laplace scale) and falls
// back to (b-a)/4 when the peak sits on the boundary or is flat.
struct PeakInfo {
  double position = 0.0;
  double log_max = 0.0;
  double width = 0.0;
};

// Coarse scan to bracket the global maximum, then golden-section refinement.
PeakInfo locate_log_peak(const std::function<double(double)>& log_f, double a, double b,
                         int scan_points = 129);

struct QuadResult {
  double log_integral = 0.0;
  std::size_t evaluations = 0;
};

// log of integral_a^b exp(log_f(t)) dt by adaptive Simpson on the shifted
// integrand exp(log_f - shift). The initial partition is seeded with points
// around the peak so a narrow spike cannot slip between nodes. Throws
// NumericalError when max_evals is exhausted before rel_tol is met.
QuadResult log_adaptive_simpson(const std::function<double(double)>& log_f, double a, double b,
                                const PeakInfo& peak, double rel_tol = 1e-8,
                                std::size_t max_evals = (std::size_t{1} << 20));

}  // namespace branchbayes
