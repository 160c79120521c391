#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "turnpike/activation.hpp"
#include "turnpike/stage_cost.hpp"
#include "turnpike/types.hpp"

namespace turnpike {

inline constexpr int control_size(int dim) { return dim * dim + dim; }

/// Packs (A, b) into the flat control layout: vect(A) column-major, then b.
inline std::vector<double> encode_control(std::span<const double> A, std::span<const double> b) {
  std::vector<double> u(A.size() + b.size());
  std::copy(A.begin(), A.end(), u.begin());
  std::copy(b.begin(), b.end(), u.begin() + static_cast<std::ptrdiff_t>(A.size()));
  return u;
}

inline std::vector<double> encode_control(const WeightLayer& layer) {
  return encode_control(layer.A, layer.b);
}

inline WeightLayer decode_control(std::span<const double> u, int dim) {
  if (static_cast<int>(u.size()) != control_size(dim)) {
    throw std::invalid_argument("decode_control: control length does not match dimension");
  }
  WeightLayer layer;
  layer.A.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(dim) * dim);
  layer.b.assign(u.begin() + static_cast<std::ptrdiff_t>(dim) * dim, u.end());
  return layer;
}

namespace detail {

/// One residual block applied in place to a single sample:
/// x <- x + sigma(A x + b), with A column-major and z as scratch.
inline void residual_block_inplace(std::span<double> x, std::span<const double> A,
                                   std::span<const double> b, ActivationKind kind,
                                   std::span<double> z) {
  const int d = static_cast<int>(x.size());
  for (int a = 0; a < d; ++a) z[a] = b[a];
  for (int j = 0; j < d; ++j) {
    const double xj = x[j];
    const double* col = A.data() + static_cast<std::ptrdiff_t>(j) * d;
    for (int a = 0; a < d; ++a) z[a] += col[a] * xj;
  }
  for (int a = 0; a < d; ++a) x[a] += activate(kind, z[a]);
}

}  // namespace detail

/// x + sigma(A x + b) for a single sample, A column-major d x d.
inline std::vector<double> forward_layer(std::span<const double> x, std::span<const double> A,
                                         std::span<const double> b, ActivationKind kind) {
  const int d = static_cast<int>(x.size());
  if (static_cast<int>(b.size()) != d || static_cast<int>(A.size()) != d * d) {
    throw std::invalid_argument("forward_layer: dimension mismatch");
  }
  std::vector<double> out(x.begin(), x.end());
  std::vector<double> z(static_cast<std::size_t>(d));
  detail::residual_block_inplace(out, A, b, kind, z);
  return out;
}

/// One step of the ensemble dynamics: the same (A, b) decoded from u is
/// applied to every sample block of x.
inline EnsembleState ensemble_step(const EnsembleState& x, std::span<const double> u,
                                   ActivationKind kind) {
  const int d = x.dim();
  if (static_cast<int>(u.size()) != control_size(d)) {
    throw std::invalid_argument("ensemble_step: control length does not match state dimension");
  }
  const auto A = u.first(static_cast<std::size_t>(d) * d);
  const auto b = u.subspan(static_cast<std::size_t>(d) * d);
  EnsembleState out = x;
  std::vector<double> z(static_cast<std::size_t>(d));
  for (int i = 0; i < x.count(); ++i) {
    detail::residual_block_inplace(out.sample(i), A, b, kind, z);
  }
  return out;
}

/// Propagates x0 through all layers of w, recording states, controls,
/// per-layer stage costs under pi and the terminal loss against x_bar.
inline Trajectory rollout(const EnsembleState& x0, const NetworkWeights& w, ActivationKind kind,
                          const EnsembleState& xbar, const StageCostParams& pi) {
  if (w.dim != x0.dim()) throw std::invalid_argument("rollout: weight/state dimension mismatch");
  if (x0.dim() != xbar.dim() || x0.count() != xbar.count()) {
    throw std::invalid_argument("rollout: state/anchor shape mismatch");
  }
  const int N = w.depth();
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(N) + 1);
  traj.controls.reserve(static_cast<std::size_t>(N));
  traj.stage_costs.reserve(static_cast<std::size_t>(N));
  traj.states.push_back(x0);
  for (int k = 0; k < N; ++k) {
    std::vector<double> u = encode_control(w.layers[static_cast<std::size_t>(k)]);
    traj.stage_costs.push_back(stage_cost(traj.states.back(), u, xbar, pi));
    traj.states.push_back(ensemble_step(traj.states.back(), u, kind));
    traj.controls.push_back(std::move(u));
  }
  traj.terminal_loss = terminal_loss(traj.states.back(), xbar);
  return traj;
}

}  // namespace turnpike
