#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "turnpike/adjoint.hpp"
#include "turnpike/dynamics.hpp"
#include "turnpike/types.hpp"

namespace turnpike {

enum class StepRule { FixedStep, Adam };

struct TrainConfig {
  int depth = 10;
  StageCostParams pi = StageCostParams::quadratic(1e-2, 1e-3);
  std::optional<double> gamma;  // defaults to 100 * D when unset
  ActivationKind activation = ActivationKind::Tanh;
  int max_iters = 50000;
  StepRule step_rule = StepRule::Adam;
  double step_size = 1.0;  // in rescaled control variables
  double init_scale = 0.1;
  double tol_grad = 1e-6;
  double input_rescale = 100.0;  // controls are optimized as u * input_rescale
  std::uint64_t seed = 1;

  void validate() const {
    pi.validate();
    if (depth < 1) throw std::invalid_argument("TrainConfig: depth must be >= 1");
    if (gamma && !(*gamma >= 0.0)) throw std::invalid_argument("TrainConfig: gamma must be >= 0");
    if (max_iters < 1) throw std::invalid_argument("TrainConfig: max_iters must be >= 1");
    if (!(step_size > 0.0)) throw std::invalid_argument("TrainConfig: step_size must be > 0");
    if (!(init_scale >= 0.0)) throw std::invalid_argument("TrainConfig: init_scale must be >= 0");
    if (!(tol_grad > 0.0)) throw std::invalid_argument("TrainConfig: tol_grad must be > 0");
    if (!(input_rescale > 0.0)) throw std::invalid_argument("TrainConfig: input_rescale must be > 0");
  }

  double resolve_gamma(int samples) const { return gamma ? *gamma : 100.0 * samples; }
};

struct TrainResult {
  NetworkWeights weights;
  Trajectory trajectory;
  double objective = 0.0;
  std::vector<double> history;  // objective per visited iterate
  bool converged = false;
  int iterations = 0;
};

/// OCP value of a recorded trajectory: sum of stage costs plus the
/// gamma-weighted terminal loss.
inline double objective(const Trajectory& traj, double gamma) {
  double total = 0.0;
  for (double c : traj.stage_costs) total += c;
  return total + gamma * traj.terminal_loss;
}

inline std::vector<double> weights_to_flat(const NetworkWeights& w) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(w.depth()) * control_size(w.dim));
  for (const WeightLayer& l : w.layers) {
    flat.insert(flat.end(), l.A.begin(), l.A.end());
    flat.insert(flat.end(), l.b.begin(), l.b.end());
  }
  return flat;
}

inline NetworkWeights flat_to_weights(std::span<const double> flat, int dim, int depth) {
  if (static_cast<int>(flat.size()) != depth * control_size(dim)) {
    throw std::invalid_argument("flat_to_weights: length mismatch");
  }
  NetworkWeights w = NetworkWeights::zeros(dim, depth);
  std::size_t pos = 0;
  for (WeightLayer& l : w.layers) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l.A.size(), l.A.begin());
    pos += l.A.size();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), l.b.size(), l.b.begin());
    pos += l.b.size();
  }
  return w;
}

namespace detail {

struct AdamState {
  std::vector<double> m;
  std::vector<double> s;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), s(n, 0.0) {}

  void step(std::vector<double>& x, const std::vector<double>& g, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      s[i] = beta2 * s[i] + (1.0 - beta2) * g[i] * g[i];
      x[i] -= lr * (m[i] / c1) / (std::sqrt(s[i] / c2) + eps);
    }
  }
};

}  // namespace detail

/// Trains the network by direct single shooting: adjoint gradients of the
/// penalized OCP objective, driven by Adam or step-halving gradient descent.
/// Controls are optimized in rescaled variables v = input_rescale * u.
/// Deterministic for a fixed seed.
inline TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (!cfg.pi.is_smooth()) {
    throw std::invalid_argument(
        "gradient undefined for this pi; train with a smooth pi and evaluate bounds via norm transfer");
  }
  const int d = data.dim;
  const int N = cfg.depth;
  const double gamma = cfg.resolve_gamma(data.count());
  const double scale = cfg.input_rescale;
  const EnsembleState x0 = data.initial_state();
  const EnsembleState xbar = data.anchor_state();

  NetworkWeights w0 = NetworkWeights::zeros(d, N);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-cfg.init_scale, cfg.init_scale);
  if (cfg.init_scale > 0.0) {
    for (WeightLayer& l : w0.layers) {
      for (double& a : l.A) a = unif(rng);
      for (double& b : l.b) b = unif(rng);
    }
  }

  std::vector<double> v = weights_to_flat(w0);
  for (double& x : v) x *= scale;

  detail::AdamState adam(v.size());
  double gd_step = cfg.step_size;

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.max_iters));
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> best_v = v;

  const auto eval = [&](const std::vector<double>& vars) {
    std::vector<double> phys(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) phys[i] = vars[i] / scale;
    NetworkWeights w = flat_to_weights(phys, d, N);
    return rollout(x0, w, cfg.activation, xbar, cfg.pi);
  };

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    Trajectory traj = eval(v);
    const double obj = objective(traj, gamma);
    if (!std::isfinite(obj)) {
      throw std::runtime_error("train: objective became non-finite at iteration " +
                               std::to_string(iter));
    }
    result.history.push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best_v = v;
    }

    NetworkWeights grad = objective_gradient(traj, xbar, cfg.pi, gamma, cfg.activation);
    if (gradient_inf_norm(grad) <= cfg.tol_grad) {
      result.converged = true;
      ++iter;
      break;
    }
    std::vector<double> g = weights_to_flat(grad);
    for (double& x : g) x /= scale;

    if (cfg.step_rule == StepRule::Adam) {
      adam.step(v, g, cfg.step_size);
    } else {
      // Fixed step with halving on ascent; keeps the history monotone.
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        std::vector<double> trial = v;
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] -= gd_step * g[i];
        const double trial_obj = objective(eval(trial), gamma);
        if (std::isfinite(trial_obj) && trial_obj <= obj) {
          v = std::move(trial);
          moved = true;
          break;
        }
        gd_step *= 0.5;
      }
      if (!moved) {
        ++iter;
        break;  // no descent direction at representable step sizes
      }
    }
  }

  result.iterations = iter;
  std::vector<double> phys(best_v.size());
  for (std::size_t i = 0; i < best_v.size(); ++i) phys[i] = best_v[i] / scale;
  result.weights = flat_to_weights(phys, d, N);
  result.trajectory = rollout(x0, result.weights, cfg.activation, xbar, cfg.pi);
  result.objective = objective(result.trajectory, gamma);
  return result;
}

}  // namespace turnpike
