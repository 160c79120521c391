#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "turnpike/dynamics.hpp"
#include "turnpike/types.hpp"

namespace turnpike {

/// Distinct (anchor, class label) pairs used by the terminal classifier.
using ClassList = std::vector<std::pair<std::vector<double>, int>>;

struct SpiralConfig {
  int samples = 300;              // total D, split evenly between the classes
  double start_radius = 0.25;     // nu
  double noise_amplitude = 0.2;   // uniform noise in [-a, a] per coordinate
  std::uint64_t seed = 1;
  std::array<std::array<double, 2>, 2> class_anchors{{{1.0, 0.0}, {-1.0, 0.0}}};
  std::array<double, 2> start_angles{0.0, std::numbers::pi};

  void validate() const {
    if (samples < 2 || samples % 2 != 0) throw std::invalid_argument("samples must be even");
    if (!(start_radius > 0.0)) throw std::invalid_argument("start_radius must be > 0");
    if (!(noise_amplitude >= 0.0)) throw std::invalid_argument("noise_amplitude must be >= 0");
  }
};

/// Two intertwined planar spirals, one full turn each. Sample i of class c
/// sits at angle-radius parameter j = 2*pi/(D/2) * i, position
/// (j nu cos(j + phi_c), j nu sin(j + phi_c)), plus uniform noise. Anchors
/// are the class anchors; labels are 1 and 2. Deterministic per seed.
inline Dataset generate_two_spiral(const SpiralConfig& cfg) {
  cfg.validate();
  const int per_class = cfg.samples / 2;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> noise(-cfg.noise_amplitude, cfg.noise_amplitude);

  Dataset data;
  data.dim = 2;
  data.samples.reserve(static_cast<std::size_t>(cfg.samples));
  for (int c = 0; c < 2; ++c) {
    const double phi = cfg.start_angles[static_cast<std::size_t>(c)];
    const auto& anchor = cfg.class_anchors[static_cast<std::size_t>(c)];
    for (int i = 1; i <= per_class; ++i) {
      const double j = 2.0 * std::numbers::pi / per_class * i;
      double px = j * cfg.start_radius * std::cos(j + phi);
      double py = j * cfg.start_radius * std::sin(j + phi);
      if (cfg.noise_amplitude > 0.0) {
        px += noise(rng);
        py += noise(rng);
      }
      Sample s;
      s.x = {px, py};
      s.anchor = {anchor[0], anchor[1]};
      s.label = c + 1;
      data.samples.push_back(std::move(s));
    }
  }
  return data;
}

/// Terminal-state classifier: the label of the strictly nearest anchor if
/// that anchor lies within delta, otherwise nullopt (reject). An exact
/// distance tie also rejects.
inline std::optional<int> classify(std::span<const double> x_final, const ClassList& classes,
                                   double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("classify: delta must be > 0");
  double best = std::numeric_limits<double>::infinity();
  int best_label = 0;
  bool tie = false;
  for (const auto& [anchor, label] : classes) {
    if (anchor.size() != x_final.size()) throw std::invalid_argument("classify: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < anchor.size(); ++i) {
      const double d = x_final[i] - anchor[i];
      acc += d * d;
    }
    const double dist = std::sqrt(acc);
    if (dist == best) {
      tie = true;
    } else if (dist < best) {
      best = dist;
      best_label = label;
      tie = false;
    }
  }
  if (tie || !(best < delta)) return std::nullopt;
  return best_label;
}

namespace detail {

inline std::vector<double> propagate_sample(std::vector<double> x, const NetworkWeights& w,
                                            ActivationKind kind) {
  std::vector<double> z(x.size());
  for (const WeightLayer& l : w.layers) {
    residual_block_inplace(std::span<double>(x), l.A, l.b, kind, z);
  }
  return x;
}

}  // namespace detail

/// Fraction of samples whose propagated terminal state is rejected or
/// classified with a label other than its own.
inline double empirical_risk(const Dataset& data, const NetworkWeights& w, ActivationKind kind,
                             double delta) {
  data.validate();
  if (w.dim != data.dim) throw std::invalid_argument("empirical_risk: dimension mismatch");
  const ClassList classes = data.label_classes();
  int misclassified = 0;
  for (const Sample& s : data.samples) {
    const std::vector<double> xN = detail::propagate_sample(s.x, w, kind);
    const std::optional<int> predicted = classify(xN, classes, delta);
    if (!predicted || *predicted != s.label) ++misclassified;
  }
  return static_cast<double>(misclassified) / static_cast<double>(data.count());
}

/// Classification of a uniform resolution x resolution grid over [lo, hi]^2.
/// labels[iy * resolution + ix] holds the class label at (x(ix), y(iy)),
/// or 0 for reject.
struct DecisionGrid {
  int resolution = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> labels;

  double coord(int index) const {
    return lo + (hi - lo) * index / (resolution - 1);
  }
};

inline DecisionGrid decision_grid(const NetworkWeights& w, ActivationKind kind,
                                  const ClassList& classes, double delta, double lo, double hi,
                                  int resolution) {
  if (resolution < 2) throw std::invalid_argument("decision_grid: resolution must be >= 2");
  if (!(lo < hi)) throw std::invalid_argument("decision_grid: min < max required");
  if (w.dim != 2) throw std::invalid_argument("decision_grid: expects a planar network");
  DecisionGrid grid;
  grid.resolution = resolution;
  grid.lo = lo;
  grid.hi = hi;
  grid.labels.resize(static_cast<std::size_t>(resolution) * resolution);
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      const std::vector<double> xN =
          detail::propagate_sample({grid.coord(ix), grid.coord(iy)}, w, kind);
      const std::optional<int> label = classify(xN, classes, delta);
      grid.labels[static_cast<std::size_t>(iy) * resolution + ix] = label.value_or(0);
    }
  }
  return grid;
}

}  // namespace turnpike
