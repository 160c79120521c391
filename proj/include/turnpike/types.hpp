#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace turnpike {

/// Stacked state of all D samples, a flat vector of length d*D.
/// Sample i occupies the contiguous block [i*d, (i+1)*d).
class EnsembleState {
public:
  EnsembleState() = default;

  EnsembleState(int dim, int count, double fill = 0.0)
      : dim_(dim), count_(count), data_(static_cast<std::size_t>(dim) * count, fill) {
    if (dim <= 0 || count < 0) throw std::invalid_argument("EnsembleState: dim must be > 0, count >= 0");
  }

  static EnsembleState from_flat(int dim, std::vector<double> flat) {
    if (dim <= 0 || flat.size() % static_cast<std::size_t>(dim) != 0) {
      throw std::invalid_argument("EnsembleState: flat length must be a multiple of dim");
    }
    EnsembleState s;
    s.dim_ = dim;
    s.count_ = static_cast<int>(flat.size() / static_cast<std::size_t>(dim));
    s.data_ = std::move(flat);
    return s;
  }

  int dim() const { return dim_; }
  int count() const { return count_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> sample(int i) {
    return std::span<double>(data_).subspan(static_cast<std::size_t>(i) * dim_, dim_);
  }
  std::span<const double> sample(int i) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(i) * dim_, dim_);
  }

  std::vector<double>& flat() { return data_; }
  const std::vector<double>& flat() const { return data_; }

  friend bool operator==(const EnsembleState&, const EnsembleState&) = default;

private:
  int dim_ = 0;
  int count_ = 0;
  std::vector<double> data_;
};

/// One data point: feature vector x, the anchor state x_bar it should be
/// steered to, and an integer class label.
struct Sample {
  std::vector<double> x;
  std::vector<double> anchor;
  int label = 0;
};

struct Dataset {
  int dim = 0;
  std::vector<Sample> samples;

  int count() const { return static_cast<int>(samples.size()); }

  void validate() const {
    if (dim <= 0) throw std::invalid_argument("Dataset: dim must be positive");
    if (samples.empty()) throw std::invalid_argument("Dataset: needs at least one sample");
    for (const Sample& s : samples) {
      if (static_cast<int>(s.x.size()) != dim || static_cast<int>(s.anchor.size()) != dim) {
        throw std::invalid_argument("Dataset: sample dimension mismatch");
      }
    }
  }

  /// vect(X): the stacked feature vectors, the OCP initial condition.
  EnsembleState initial_state() const {
    EnsembleState s(dim, count());
    for (int i = 0; i < count(); ++i) {
      auto block = s.sample(i);
      for (int j = 0; j < dim; ++j) block[j] = samples[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(j)];
    }
    return s;
  }

  /// Stacked anchors x_bar, the turnpike reference of the ensemble.
  EnsembleState anchor_state() const {
    EnsembleState s(dim, count());
    for (int i = 0; i < count(); ++i) {
      auto block = s.sample(i);
      for (int j = 0; j < dim; ++j) block[j] = samples[static_cast<std::size_t>(i)].anchor[static_cast<std::size_t>(j)];
    }
    return s;
  }

  /// Distinct (anchor, label) pairs in order of first appearance.
  std::vector<std::pair<std::vector<double>, int>> label_classes() const {
    std::vector<std::pair<std::vector<double>, int>> classes;
    for (const Sample& s : samples) {
      bool seen = false;
      for (const auto& c : classes) seen = seen || c.second == s.label;
      if (!seen) classes.emplace_back(s.anchor, s.label);
    }
    return classes;
  }
};

/// Weights of one residual layer; A is d x d, stored column-major.
struct WeightLayer {
  std::vector<double> A;
  std::vector<double> b;
};

/// The OCP decision variables: per-layer (A_k, b_k), k = 0..N-1.
struct NetworkWeights {
  int dim = 0;
  std::vector<WeightLayer> layers;

  int depth() const { return static_cast<int>(layers.size()); }

  static NetworkWeights zeros(int dim, int depth) {
    if (dim <= 0 || depth < 0) throw std::invalid_argument("NetworkWeights: dim > 0, depth >= 0 required");
    NetworkWeights w;
    w.dim = dim;
    w.layers.assign(static_cast<std::size_t>(depth),
                    WeightLayer{std::vector<double>(static_cast<std::size_t>(dim) * dim, 0.0),
                                std::vector<double>(static_cast<std::size_t>(dim), 0.0)});
    return w;
  }

  void validate() const {
    if (dim <= 0) throw std::invalid_argument("NetworkWeights: dim must be positive");
    for (const WeightLayer& l : layers) {
      if (l.A.size() != static_cast<std::size_t>(dim) * dim || l.b.size() != static_cast<std::size_t>(dim)) {
        throw std::invalid_argument("NetworkWeights: layer dimension mismatch");
      }
      for (double v : l.A) {
        if (!std::isfinite(v)) throw std::invalid_argument("NetworkWeights: non-finite entry in A");
      }
      for (double v : l.b) {
        if (!std::isfinite(v)) throw std::invalid_argument("NetworkWeights: non-finite entry in b");
      }
    }
  }
};

/// Rollout record: states x_0..x_N, flattened controls u_0..u_{N-1}
/// (vect(A_k) column-major, then b_k), per-layer stage costs and the
/// terminal loss at x_N.
struct Trajectory {
  std::vector<EnsembleState> states;
  std::vector<std::vector<double>> controls;
  std::vector<double> stage_costs;
  double terminal_loss = 0.0;

  int depth() const { return static_cast<int>(controls.size()); }
};

}  // namespace turnpike
