#pragma once

#include <cmath>
#include <utility>

namespace turnpike {

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section minimization of f on [a, b]. Works for any continuous
/// unimodal f, including ones with a kink at the minimizer.
template <typename F>
GoldenResult golden_section_minimize(F&& f, double a, double b, double tol = 1e-12,
                                     int max_iters = 200) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iters && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double xm = 0.5 * (a + b);
  return GoldenResult{xm, f(xm)};
}

}  // namespace turnpike
