#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "turnpike/dynamics.hpp"
#include "turnpike/stage_cost.hpp"
#include "turnpike/types.hpp"

namespace turnpike {

/// Gradient of sum_k ell(x_k, u_k) + gamma * ell_f(x_N) with respect to all
/// layer weights, by one reverse sweep over a recorded trajectory.
///
/// The residual update x_{k+1} = x_k + sigma(A x_k + b) stores sigma(z)
/// implicitly as the state increment, so sigma'(z) is recovered from
/// x_{k+1} - x_k without re-evaluating the activation.
inline NetworkWeights objective_gradient(const Trajectory& traj, const EnsembleState& xbar,
                                         const StageCostParams& pi, double gamma,
                                         ActivationKind kind = ActivationKind::Tanh) {
  if (!pi.is_smooth()) {
    throw std::invalid_argument(
        "gradient undefined for this pi; train with a smooth pi and evaluate bounds via norm transfer");
  }
  const int N = traj.depth();
  const int d = traj.states.front().dim();
  const int D = traj.states.front().count();
  if (xbar.dim() != d || xbar.count() != D) {
    throw std::invalid_argument("objective_gradient: anchor shape mismatch");
  }

  NetworkWeights grad = NetworkWeights::zeros(d, N);

  // Costate of the terminal loss: gamma * (2/D) (x_N - x_bar).
  const auto& xN = traj.states.back().flat();
  const auto& xb = xbar.flat();
  std::vector<double> costate(xN.size());
  const double tscale = gamma * 2.0 / static_cast<double>(D);
  for (std::size_t i = 0; i < xN.size(); ++i) costate[i] = tscale * (xN[i] - xb[i]);

  std::vector<double> t(static_cast<std::size_t>(d));
  std::vector<double> gu(static_cast<std::size_t>(control_size(d)));
  for (int k = N - 1; k >= 0; --k) {
    const EnsembleState& xk = traj.states[static_cast<std::size_t>(k)];
    const EnsembleState& xk1 = traj.states[static_cast<std::size_t>(k) + 1];
    const std::vector<double>& u = traj.controls[static_cast<std::size_t>(k)];
    std::fill(gu.begin(), gu.end(), 0.0);

    for (int i = 0; i < D; ++i) {
      const auto x = xk.sample(i);
      const auto x1 = xk1.sample(i);
      double* lam = costate.data() + static_cast<std::ptrdiff_t>(i) * d;

      // t = sigma'(z) .* lambda_{k+1}, with sigma(z) = x_{k+1} - x_k.
      for (int a = 0; a < d; ++a) {
        t[static_cast<std::size_t>(a)] =
            activate_derivative_from_value(kind, x1[a] - x[a]) * lam[a];
      }
      // dF/dA and dF/db contributions: outer product t x^T and t itself.
      for (int j = 0; j < d; ++j) {
        const double xj = x[j];
        double* gcol = gu.data() + static_cast<std::ptrdiff_t>(j) * d;
        for (int a = 0; a < d; ++a) gcol[a] += t[static_cast<std::size_t>(a)] * xj;
      }
      for (int a = 0; a < d; ++a) gu[static_cast<std::size_t>(d) * d + a] += t[static_cast<std::size_t>(a)];
      // lambda_k = lambda_{k+1} + A^T t  (state partial added below).
      for (int j = 0; j < d; ++j) {
        const double* col = u.data() + static_cast<std::ptrdiff_t>(j) * d;
        double acc = 0.0;
        for (int a = 0; a < d; ++a) acc += col[a] * t[static_cast<std::size_t>(a)];
        lam[j] += acc;
      }
    }

    // Stage-cost partials: r d||u||^{s_u}/du and q d||x-x_bar||^{s_x}/dx.
    add_norm_power_gradient(u, pi.r, pi.s_u, pi.p_u, gu);
    add_norm_power_gradient(xk.flat(), xbar.flat(), pi.q, pi.s_x, pi.p_x, costate);

    WeightLayer& gl = grad.layers[static_cast<std::size_t>(k)];
    gl.A.assign(gu.begin(), gu.begin() + static_cast<std::ptrdiff_t>(d) * d);
    gl.b.assign(gu.begin() + static_cast<std::ptrdiff_t>(d) * d, gu.end());
  }
  return grad;
}

/// Rolls out and differentiates in one call.
inline NetworkWeights gradient(const EnsembleState& x0, const NetworkWeights& w,
                               const EnsembleState& xbar, const StageCostParams& pi,
                               double gamma, ActivationKind kind = ActivationKind::Tanh) {
  return objective_gradient(rollout(x0, w, kind, xbar, pi), xbar, pi, gamma, kind);
}

inline double gradient_inf_norm(const NetworkWeights& g) {
  double m = 0.0;
  for (const WeightLayer& l : g.layers) {
    for (double v : l.A) m = std::max(m, std::abs(v));
    for (double v : l.b) m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace turnpike
