#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

namespace turnpike {

/// Order of a vector p-norm. Valid orders are p > 1 and p = infinity.
/// Infinity is a first-class value of its own, not a large float stand-in.
class NormOrder {
public:
  static NormOrder infinity() { return NormOrder(std::numeric_limits<double>::infinity()); }

  static NormOrder p(double order) {
    if (std::isnan(order) || order <= 1.0) {
      throw std::invalid_argument("NormOrder: order must be > 1 or infinity");
    }
    return NormOrder(order);
  }

  static NormOrder two() { return NormOrder(2.0); }

  bool is_infinite() const { return std::isinf(p_); }

  /// The numeric order; +inf for the max norm.
  double value() const { return p_; }

  friend bool operator==(const NormOrder&, const NormOrder&) = default;

private:
  explicit NormOrder(double order) : p_(order) {}
  double p_;
};

namespace detail {

/// p-norm without input validation. Finite orders are evaluated on the
/// rescaled vector v/max|v| so large entries cannot overflow pow().
inline double norm_unchecked(std::span<const double> v, NormOrder p) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (p.is_infinite() || m == 0.0) return m;
  if (p.value() == 2.0) {
    double acc = 0.0;
    for (double x : v) {
      const double s = x / m;
      acc += s * s;
    }
    return m * std::sqrt(acc);
  }
  double acc = 0.0;
  for (double x : v) acc += std::pow(std::abs(x) / m, p.value());
  return m * std::pow(acc, 1.0 / p.value());
}

/// Sum of squares, no rescaling. Inner-loop kernel for the 2-norm case.
inline double sum_squares(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace detail

/// ||v||_p for p > 1, or the max-magnitude entry for p = infinity.
inline double vector_norm(std::span<const double> v, NormOrder p) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("vector_norm: non-finite input entry");
  }
  return detail::norm_unchecked(v, p);
}

}  // namespace turnpike
