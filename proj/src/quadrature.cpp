#include "branchbayes/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace branchbayes {

namespace {

constexpr double kGolden = 0.6180339887498949;

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          int iterations = 200) {
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < iterations && hi - lo > 1e-14 * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

// Distance from the peak at which log_f has fallen by 1/2, probed by doubling
// then bisection. Measuring an O(1) drop keeps the estimate reliable when the
// log values are large enough that rounding noise swamps local curvature.
// Returns +inf when the boundary arrives before the drop does.
double drop_distance(const std::function<double(double)>& log_f, double peak, double log_max,
                     double a, double b, double dir) {
  const double span = b - a;
  const double limit = dir > 0.0 ? b - peak : peak - a;
  if (limit <= 1e-15 * span) return std::numeric_limits<double>::infinity();
  double prev = 0.0;
  for (double d = std::max(span * 1e-12, 1e-15);; d = std::min(d * 2.0, limit)) {
    if (log_max - log_f(peak + dir * d) >= 0.5) {
      double lo = prev;
      double hi = d;
      for (int i = 0; i < 30; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (log_max - log_f(peak + dir * mid) >= 0.5) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    prev = d;
    if (d >= limit) return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

PeakInfo locate_log_peak(const std::function<double(double)>& log_f, double a, double b,
                         int scan_points) {
  const double span = b - a;
  double best_t = a;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan_points; ++i) {
    const double t = a + span * (static_cast<double>(i) + 0.5) / (scan_points + 1.0);
    const double v = log_f(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  const double step = span / (scan_points + 1.0);
  const double lo = std::max(a, best_t - 2.0 * step);
  const double hi = std::min(b, best_t + 2.0 * step);
  const double peak = golden_section_max(log_f, lo, hi);

  PeakInfo info;
  info.position = peak;
  info.log_max = log_f(peak);
  // Width of the bump: nearest half-unit drop in the log on either side, or
  // a quarter of the span when the function stays flat to both boundaries.
  const double wl = drop_distance(log_f, peak, info.log_max, a, b, -1.0);
  const double wr = drop_distance(log_f, peak, info.log_max, a, b, 1.0);
  info.width = std::min(std::min(wl, wr), span / 4.0);
  return info;
}

namespace {

struct SimpsonState {
  const std::function<double(double)>* log_f;
  double shift;
  double abs_tol;  // on the shifted scale
  std::size_t evals;
  std::size_t max_evals;

  double eval(double t) {
    if (++evals > max_evals) {
      throw NumericalError("adaptive Simpson: refinement cap exhausted before convergence");
    }
    const double v = (*log_f)(t);
    if (std::isnan(v)) {
      throw NumericalError("adaptive Simpson: integrand returned NaN");
    }
    if (std::isinf(v) && v < 0.0) return 0.0;
    return std::exp(v - shift);
  }
};

double adaptive_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                     double whole, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.eval(lm);
  const double frm = st.eval(rm);
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double split = left + right;
  if (depth > 0 && (std::abs(split - whole) <= 15.0 * st.abs_tol * h || h < 1e-15)) {
    return split + (split - whole) / 15.0;
  }
  return adaptive_step(st, a, m, fa, flm, fm, left, depth + 1) +
         adaptive_step(st, m, b, fm, frm, fb, right, depth + 1);
}

}  // namespace

QuadResult log_adaptive_simpson(const std::function<double(double)>& log_f, double a, double b,
                                const PeakInfo& peak, double rel_tol, std::size_t max_evals) {
  if (!(b > a)) throw std::invalid_argument("log_adaptive_simpson: empty interval");

  // Seed nodes: interval ends plus a ladder around the peak so the initial
  // Simpson pass sees the spike.
  std::vector<double> nodes = {a, b};
  for (double k : {40.0, 20.0, 10.0, 5.0, 2.0, 1.0}) {
    nodes.push_back(std::clamp(peak.position - k * peak.width, a, b));
    nodes.push_back(std::clamp(peak.position + k * peak.width, a, b));
  }
  nodes.push_back(std::clamp(peak.position, a, b));
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-300; }),
              nodes.end());

  SimpsonState st{&log_f, peak.log_max, 0.0, 0, max_evals};
  // The shifted integrand peaks at ~1 with width ~peak.width, so its
  // integral is of order peak.width; set the absolute tolerance density
  // accordingly. Rounding of log values of magnitude |log_max| leaves
  // relative noise ~|log_max| * eps in the shifted values, so refinement
  // below that floor can never converge; don't ask for it.
  const double log_noise = std::abs(peak.log_max) * 1e-14;
  st.abs_tol = std::max(rel_tol * std::max(peak.width, 1e-12) / (b - a), log_noise);

  double total = 0.0;
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = st.eval(nodes[i]);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double lo = nodes[i];
    const double hi = nodes[i + 1];
    const double mid = 0.5 * (lo + hi);
    const double fm = st.eval(mid);
    const double whole = (hi - lo) / 6.0 * (values[i] + 4.0 * fm + values[i + 1]);
    total += adaptive_step(st, lo, hi, values[i], fm, values[i + 1], whole, 0);
  }
  if (!(total > 0.0)) {
    throw NumericalError("adaptive Simpson: integral underflowed to zero");
  }
  return QuadResult{peak.log_max + std::log(total), st.evals};
}

}  // namespace branchbayes
