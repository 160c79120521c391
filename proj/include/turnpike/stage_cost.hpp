#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "turnpike/norms.hpp"
#include "turnpike/types.hpp"

namespace turnpike {

/// Parameters pi = (s_x, s_u, p_x, p_u, q, r) of the regularization family
///
///   ell(x, u) = q * ||x - x_bar||_{p_x}^{s_x} + r * ||u||_{p_u}^{s_u}.
///
/// (q, p_x, s_x) weight the state deviation and (r, p_u, s_u) the input.
struct StageCostParams {
  double s_x = 2.0;
  double s_u = 2.0;
  NormOrder p_x = NormOrder::two();
  NormOrder p_u = NormOrder::two();
  double q = 1e-2;
  double r = 1e-3;

  /// Convex quadratic parametrization (2, 2, 2, 2, q, r).
  static StageCostParams quadratic(double q, double r) {
    StageCostParams pi;
    pi.q = q;
    pi.r = r;
    pi.validate();
    return pi;
  }

  /// Max-norm state penalization (1, 2, inf, 2, q, r); used to evaluate
  /// depth bounds that do not scale with the number of samples.
  static StageCostParams max_norm_eval(double q = 1.0, double r = 1e-3) {
    StageCostParams pi;
    pi.s_x = 1.0;
    pi.p_x = NormOrder::infinity();
    pi.q = q;
    pi.r = r;
    pi.validate();
    return pi;
  }

  /// Strict admissibility: q, r > 0 and both exponents > 1 (norm orders
  /// are > 1 or infinity by construction).
  bool is_admissible() const { return q > 0.0 && r > 0.0 && s_x > 1.0 && s_u > 1.0; }

  /// Evaluation requires only q, r > 0 and exponents >= 1. s = 1 is allowed
  /// so that max-norm a-posteriori bounds can be expressed; such costs are
  /// not differentiable at the anchor and are rejected by the gradient path.
  void validate() const {
    if (!(q > 0.0) || !(r > 0.0)) throw std::invalid_argument("StageCostParams: q and r must be > 0");
    if (!(s_x >= 1.0) || !(s_u >= 1.0)) throw std::invalid_argument("StageCostParams: exponents must be >= 1");
  }

  /// True when the cost is differentiable in both arguments: finite norm
  /// orders and exponents > 1.
  bool is_smooth() const {
    return !p_x.is_infinite() && !p_u.is_infinite() && s_x > 1.0 && s_u > 1.0;
  }
};

namespace detail {

/// ||x - x_bar||_p without materializing the deviation vector.
inline double deviation_norm(std::span<const double> x, std::span<const double> xbar, NormOrder p) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - xbar[i]));
  if (p.is_infinite() || m == 0.0) return m;
  double acc = 0.0;
  if (p.value() == 2.0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = (x[i] - xbar[i]) / m;
      acc += s * s;
    }
    return m * std::sqrt(acc);
  }
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i] - xbar[i]) / m, p.value());
  return m * std::pow(acc, 1.0 / p.value());
}

inline double pow_exponent(double base, double s) {
  if (s == 2.0) return base * base;
  if (s == 1.0) return base;
  return std::pow(base, s);
}

}  // namespace detail

/// Stage cost on raw spans; x and x_bar live in R^{d*D}, u in R^{d^2+d}.
inline double stage_cost(std::span<const double> x, std::span<const double> u,
                         std::span<const double> xbar, const StageCostParams& pi) {
  if (x.size() != xbar.size()) throw std::invalid_argument("stage_cost: state/anchor dimension mismatch");
  double state_term;
  if (!pi.p_x.is_infinite() && pi.p_x.value() == 2.0 && pi.s_x == 2.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - xbar[i];
      acc += d * d;
    }
    state_term = acc;
  } else {
    state_term = detail::pow_exponent(detail::deviation_norm(x, xbar, pi.p_x), pi.s_x);
  }
  double input_term;
  if (!pi.p_u.is_infinite() && pi.p_u.value() == 2.0 && pi.s_u == 2.0) {
    input_term = detail::sum_squares(u);
  } else {
    input_term = detail::pow_exponent(detail::norm_unchecked(u, pi.p_u), pi.s_u);
  }
  return pi.q * state_term + pi.r * input_term;
}

inline double stage_cost(const EnsembleState& x, std::span<const double> u,
                         const EnsembleState& xbar, const StageCostParams& pi) {
  if (x.dim() != xbar.dim() || x.count() != xbar.count()) {
    throw std::invalid_argument("stage_cost: ensemble shape mismatch");
  }
  return stage_cost(std::span<const double>(x.flat()), u, std::span<const double>(xbar.flat()), pi);
}

/// Empirical terminal loss: mean over samples of the squared 2-norm
/// distance between the final state block and its anchor.
inline double terminal_loss(const EnsembleState& x_final, const EnsembleState& xbar) {
  if (x_final.dim() != xbar.dim() || x_final.count() != xbar.count()) {
    throw std::invalid_argument("terminal_loss: ensemble shape mismatch");
  }
  const int D = x_final.count();
  if (D == 0) throw std::invalid_argument("terminal_loss: empty ensemble");
  double acc = 0.0;
  const auto& a = x_final.flat();
  const auto& b = xbar.flat();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(D);
}

namespace detail {

inline void require_smooth_norm_power(NormOrder p, double s) {
  if (p.is_infinite() || s <= 1.0) {
    throw std::invalid_argument(
        "gradient undefined for this pi; train with a smooth pi and evaluate bounds via norm transfer");
  }
}

/// out[i] += factor * sign(v_i) |v_i|^{p-1} for one entry.
inline double norm_power_entry(double v, double pv) {
  if (pv == 2.0) return v;
  if (v == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(v), pv - 1.0), v);
}

}  // namespace detail

/// Accumulates weight * d/dx ||x - x_bar||_p^s into out.
/// Defined for finite p > 1 and s > 1; the gradient at x = x_bar is zero.
inline void add_norm_power_gradient(std::span<const double> x, std::span<const double> xbar,
                                    double weight, double s, NormOrder p, std::span<double> out) {
  detail::require_smooth_norm_power(p, s);
  const double norm = detail::deviation_norm(x, xbar, p);
  if (norm == 0.0) return;
  const double pv = p.value();
  const double factor = weight * s * std::pow(norm, s - pv);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] += factor * detail::norm_power_entry(x[i] - xbar[i], pv);
  }
}

/// Accumulates weight * d/dv ||v||_p^s into out.
inline void add_norm_power_gradient(std::span<const double> v, double weight, double s,
                                    NormOrder p, std::span<double> out) {
  detail::require_smooth_norm_power(p, s);
  const double norm = detail::norm_unchecked(v, p);
  if (norm == 0.0) return;
  const double pv = p.value();
  const double factor = weight * s * std::pow(norm, s - pv);
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] += factor * detail::norm_power_entry(v[i], pv);
  }
}

}  // namespace turnpike
