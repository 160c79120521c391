#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "turnpike/golden.hpp"
#include "turnpike/stage_cost.hpp"
#include "turnpike/types.hpp"

namespace turnpike {

struct EpsilonOccupation {
  int inside = 0;   // #Q_eps
  int outside = 0;  // #Qhat_eps, complement within {0..N-1}
};

/// Counts layer indices k in {0..N-1} whose state lies within eps of the
/// anchor in the given norm. The terminal index N is excluded.
inline EpsilonOccupation epsilon_occupation(const Trajectory& traj, const EnsembleState& xbar,
                                            double eps, NormOrder p) {
  if (!(eps > 0.0)) throw std::invalid_argument("epsilon_occupation: eps must be > 0");
  EpsilonOccupation occ;
  const int N = traj.depth();
  for (int k = 0; k < N; ++k) {
    const double dist = detail::deviation_norm(traj.states[static_cast<std::size_t>(k)].flat(),
                                               xbar.flat(), p);
    if (dist <= eps) {
      ++occ.inside;
    } else {
      ++occ.outside;
    }
  }
  return occ;
}

struct DissipationCheck {
  bool holds = false;                      // both checks below
  bool dissipation_holds = false;          // (1-nu) ell_k >= 0 for every k
  double min_slack = 0.0;                  // min_k (1-nu) ell_k
  bool turnpike_inequality_holds = false;  // #Qhat_eps q eps^{s_x} <= sum_k ell_k
  double turnpike_lhs = 0.0;
  double turnpike_rhs = 0.0;
};

/// Verifies the zero-storage dissipation certificate along a trajectory:
/// with lambda == 0 and ell(x_bar, 0) = 0 the dissipation inequality reduces
/// to (1-nu) ell_k >= 0, and the occupation bound to
/// #Qhat_eps * q * eps^{s_x} <= sum_k ell_k. Stage costs are re-evaluated
/// under the given pi.
inline DissipationCheck check_dissipation(const Trajectory& traj, const EnsembleState& xbar,
                                          const StageCostParams& pi, double nu,
                                          double eps = 1.0) {
  if (!(nu > 0.0) || nu > 1.0) throw std::invalid_argument("check_dissipation: nu must be in (0, 1]");
  pi.validate();
  DissipationCheck out;
  const int N = traj.depth();
  double total = 0.0;
  double min_cost = std::numeric_limits<double>::infinity();
  for (int k = 0; k < N; ++k) {
    const double c = stage_cost(traj.states[static_cast<std::size_t>(k)],
                                traj.controls[static_cast<std::size_t>(k)], xbar, pi);
    total += c;
    min_cost = std::min(min_cost, c);
  }
  if (N == 0) min_cost = 0.0;
  out.min_slack = (1.0 - nu) * min_cost;
  out.dissipation_holds = out.min_slack >= 0.0;
  const EpsilonOccupation occ = epsilon_occupation(traj, xbar, eps, pi.p_x);
  out.turnpike_lhs = occ.outside * pi.q * detail::pow_exponent(eps, pi.s_x);
  out.turnpike_rhs = total;
  out.turnpike_inequality_holds = out.turnpike_lhs <= out.turnpike_rhs;
  out.holds = out.dissipation_holds && out.turnpike_inequality_holds;
  return out;
}

struct BetaRhoFit {
  double beta = 0.0;
  double rho = 0.0;
  double v_hat = 0.0;  // beta / (1 - rho)
};

namespace detail {

/// log of the tight beta for a fixed rho: max_k (log ell_k - k log rho),
/// over the positive entries.
inline double log_tight_beta(const std::vector<std::pair<int, double>>& log_costs, double rho) {
  const double lr = std::log(rho);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [k, ll] : log_costs) best = std::max(best, ll - k * lr);
  return best;
}

}  // namespace detail

/// Fits exponential-decay constants (beta, rho) to a nonnegative stage-cost
/// sequence by minimizing beta/(1-rho) subject to ell_k <= beta rho^k.
///
/// For fixed rho the tight beta is max_k ell_k / rho^k, which reduces the
/// problem to one dimension. beta/(1-rho) is a max of quasiconvex pieces and
/// hence quasiconvex in rho, so a dense grid (1000 points) followed by
/// golden-section refinement on the best bracket finds the minimum. The
/// search interval is [1e-6, 1-1e-6]; all evaluation is done in log space.
inline BetaRhoFit estimate_beta_rho(std::span<const double> stage_costs) {
  if (stage_costs.empty()) throw std::invalid_argument("estimate_beta_rho: empty sequence");
  std::vector<std::pair<int, double>> log_costs;
  for (std::size_t k = 0; k < stage_costs.size(); ++k) {
    const double c = stage_costs[k];
    if (std::isnan(c) || c < 0.0) throw std::invalid_argument("estimate_beta_rho: costs must be >= 0");
    if (c > 0.0) log_costs.emplace_back(static_cast<int>(k), std::log(c));
  }
  if (log_costs.empty()) return BetaRhoFit{0.0, 0.0, 0.0};

  const auto log_objective = [&](double rho) {
    return detail::log_tight_beta(log_costs, rho) - std::log1p(-rho);
  };

  const double lo = 1e-6;
  const double hi = 1.0 - 1e-6;
  const int grid = 1000;
  int best_i = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double rho = lo + (hi - lo) * i / (grid - 1);
    const double v = log_objective(rho);
    if (v < best_val) {
      best_val = v;
      best_i = i;
    }
  }
  const double bracket_lo = lo + (hi - lo) * std::max(0, best_i - 1) / (grid - 1);
  const double bracket_hi = lo + (hi - lo) * std::min(grid - 1, best_i + 1) / (grid - 1);
  GoldenResult res = golden_section_minimize(log_objective, bracket_lo, bracket_hi, 1e-14, 300);
  double rho = res.value <= best_val ? res.x : lo + (hi - lo) * best_i / (grid - 1);

  double beta = std::exp(detail::log_tight_beta(log_costs, rho));
  // The log-space argmax can be a few ulps short of feasibility; nudge up.
  for (int guard = 0; guard < 64; ++guard) {
    bool feasible = true;
    for (std::size_t k = 0; k < stage_costs.size(); ++k) {
      if (stage_costs[k] > beta * std::pow(rho, static_cast<double>(k))) {
        feasible = false;
        break;
      }
    }
    if (feasible) break;
    beta *= 1.0 + 1e-14;
  }
  return BetaRhoFit{beta, rho, beta / (1.0 - rho)};
}

/// Explicit depth bound beta / ((1-rho) q eps^{s_x}); with s_x = 2 this is
/// the exponential-reachability bound in its standard quadratic form.
inline double depth_bound_formula(double beta, double rho, double q, double eps, double s_x) {
  if (!(beta >= 0.0)) throw std::invalid_argument("depth_bound_formula: beta must be >= 0");
  if (!(rho >= 0.0) || rho >= 1.0) throw std::invalid_argument("depth_bound_formula: rho must be in [0, 1)");
  if (!(q > 0.0)) throw std::invalid_argument("depth_bound_formula: q must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("depth_bound_formula: eps must be > 0");
  return beta / ((1.0 - rho) * q * detail::pow_exponent(eps, s_x));
}

/// Norm-transfer depth bound: the trajectory is re-costed under eval_pi and
/// divided by the eval-norm lower bound alpha(eps) = q eps^{s_x}. Permits
/// max-norm evaluation of trainings done in the 2-norm.
inline double depth_bound_from_cost(const Trajectory& traj, const EnsembleState& xbar,
                                    const StageCostParams& eval_pi, double eps) {
  eval_pi.validate();
  if (!(eps > 0.0)) throw std::invalid_argument("depth_bound_from_cost: eps must be > 0");
  double total = 0.0;
  for (int k = 0; k < traj.depth(); ++k) {
    total += stage_cost(traj.states[static_cast<std::size_t>(k)],
                        traj.controls[static_cast<std::size_t>(k)], xbar, eval_pi);
  }
  return total / (eval_pi.q * detail::pow_exponent(eps, eval_pi.s_x));
}

/// A-posteriori turnpike diagnostics for one evaluation parametrization.
struct TurnpikeReport {
  double epsilon = 0.0;
  int q_eps_count = 0;       // #Q_eps
  int q_eps_complement = 0;  // #Qhat_eps
  double beta = 0.0;
  double rho = 0.0;
  double v_hat = 0.0;          // beta / (1-rho)
  double n_hat_formula = 0.0;  // from (beta, rho) and the training stage cost
  double n_hat_cost = 0.0;     // from re-costing the trajectory under eval_pi
  StageCostParams eval_pi;
};

/// Full a-posteriori analysis: fits (beta, rho) to the recorded stage costs,
/// evaluates the formula bound for the training parametrization, and the
/// cost-based bound once per requested evaluation parametrization. Occupation
/// counts use the state norm of the pi under evaluation.
inline std::vector<TurnpikeReport> analyze(const Trajectory& traj, const EnsembleState& xbar,
                                           const StageCostParams& training_pi,
                                           const std::vector<StageCostParams>& eval_pis,
                                           double eps) {
  const BetaRhoFit fit = estimate_beta_rho(traj.stage_costs);
  const double n_formula =
      depth_bound_formula(fit.beta, fit.rho, training_pi.q, eps, training_pi.s_x);
  std::vector<TurnpikeReport> reports;
  reports.reserve(eval_pis.size());
  for (const StageCostParams& eval_pi : eval_pis) {
    TurnpikeReport rep;
    rep.epsilon = eps;
    const EpsilonOccupation occ = epsilon_occupation(traj, xbar, eps, eval_pi.p_x);
    rep.q_eps_count = occ.inside;
    rep.q_eps_complement = occ.outside;
    rep.beta = fit.beta;
    rep.rho = fit.rho;
    rep.v_hat = fit.v_hat;
    rep.n_hat_formula = n_formula;
    rep.n_hat_cost = depth_bound_from_cost(traj, xbar, eval_pi, eps);
    rep.eval_pi = eval_pi;
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace turnpike
