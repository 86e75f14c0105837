#pragma once

// Dense feedforward regression networks trained by batch-mode
// backpropagation.
//
// Layout conventions: samples are columns. Layer l holds W^(l) (q_l×q_{l-1})
// and b^(l) (q_l×1). A forward pass over Z^(0) (n×(p+s), the p training
// columns followed by the s validation columns) computes
//
//   S^(l) = W^(l)·Z^(l-1) + b^(l)·1ᵀ,     Z^(l) = φ^(l)(S^(l)).
//
// Only the training columns feed the backward pass:
//
//   Δ^(k) = φ^(k)'(S^(k)) ⊙ ∇L                       (m×p)
//   Δ^(r) = φ^(r)'(S^(r)) ⊙ (W^(r+1)ᵀ·Δ^(r+1))
//   ∇W^(r) = (1/p)·Δ^(r)·Z^(r-1)ᵀ,   ∇b^(r) = (1/p)·Δ^(r)·1
//
// Activation derivatives are taken at the pre-activations S, not at Z.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "treg/activations.hpp"
#include "treg/errors.hpp"
#include "treg/initializers.hpp"
#include "treg/losses.hpp"
#include "treg/matrix.hpp"
#include "treg/optimizers.hpp"

namespace treg::nn {

struct LayerSpec {
  std::size_t units = 1;
  Activation activation = act::Identity{};
};

struct NetworkConfig {
  std::vector<LayerSpec> layers;
  Loss loss = loss_kind::Mse{};
  Optimizer optimizer = opt::Adam{};
  Initializer initializer = init::XavierUniform{};
  std::size_t max_epochs = 1000;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
};

// Throws ConfigError unless the config can train a network with
// `target_dim` outputs.
inline void validate(const NetworkConfig& config, std::size_t target_dim) {
  if (config.layers.empty()) throw ConfigError("network needs at least one layer");
  for (std::size_t l = 0; l < config.layers.size(); ++l) {
    if (config.layers[l].units < 1) {
      throw ConfigError("layer " + std::to_string(l + 1) + " has no units");
    }
  }
  if (config.layers.back().units != target_dim) {
    throw ConfigError("output layer has " +
                      std::to_string(config.layers.back().units) +
                      " units but there are " + std::to_string(target_dim) +
                      " target columns");
  }
  if (config.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (!(config.tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  treg::validate(config.optimizer);
}

struct Layer {
  Matrix weights;  // q_l × q_{l-1}
  Vector biases;   // q_l × 1
  Activation activation;
  OptimizerState weight_state;
  OptimizerState bias_state;
};

struct NetworkState {
  std::size_t input_dim = 0;
  std::vector<Layer> layers;
  std::size_t epoch = 1;

  std::size_t output_dim() const { return layers.back().weights.rows(); }
};

// Weights of layer l (0-based) are drawn from a stream seeded with seed + l.
inline NetworkState init_network(const NetworkConfig& config,
                                 std::size_t input_dim) {
  if (config.layers.empty()) throw ConfigError("network needs at least one layer");
  if (input_dim < 1) throw ConfigError("input dimension must be >= 1");
  NetworkState state;
  state.input_dim = input_dim;
  std::size_t fan_in = input_dim;
  for (std::size_t l = 0; l < config.layers.size(); ++l) {
    const LayerSpec& spec = config.layers[l];
    SeededRng rng(config.seed + l);
    Layer layer{init_weights(config.initializer, fan_in, spec.units, rng),
                init_biases(spec.units), spec.activation, {}, {}};
    layer.weight_state = OptimizerState::for_block(layer.weights);
    layer.bias_state = OptimizerState::for_block(layer.biases);
    state.layers.push_back(std::move(layer));
    fan_in = spec.units;
  }
  return state;
}

struct ForwardCache {
  Matrix input;                      // Z^(0)
  std::vector<Matrix> preactivations;  // S^(1..k)
  std::vector<Matrix> activations;     // Z^(1..k)

  const Matrix& output() const { return activations.back(); }

  // Z^(l) for l = 0..k.
  const Matrix& layer_output(std::size_t l) const {
    return l == 0 ? input : activations[l - 1];
  }
};

namespace detail {

inline Matrix affine(const Layer& layer, const Matrix& z_prev) {
  Matrix s = matmul(layer.weights, z_prev);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const double b = layer.biases(i, 0);
    for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) += b;
  }
  return s;
}

inline void check_input(const NetworkState& state, const Matrix& z0) {
  if (z0.rows() != state.input_dim) {
    throw ShapeError("network input has " + std::to_string(z0.rows()) +
                     " rows, expected " + std::to_string(state.input_dim));
  }
}

inline double average_loss(const Loss& loss, const Matrix& outputs,
                           const Matrix& targets, std::size_t first_col) {
  double total = 0.0;
  for (std::size_t i = 0; i < targets.cols(); ++i) {
    total += treg::loss(loss, outputs.col(first_col + i), targets.col(i));
  }
  return total / static_cast<double>(targets.cols());
}

}  // namespace detail

inline ForwardCache forward(const NetworkState& state, const Matrix& z0) {
  detail::check_input(state, z0);
  ForwardCache cache;
  cache.input = z0;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const Layer& layer = state.layers[l];
    Matrix s = detail::affine(layer, cache.layer_output(l));
    Matrix z = apply_matrix(layer.activation, s);
    if (!z.all_finite() || !s.all_finite()) {
      throw DivergenceError("forward: non-finite values in layer " +
                                std::to_string(l + 1),
                            l + 1);
    }
    cache.preactivations.push_back(std::move(s));
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

// Z^(k) for `features` (n×q), without keeping intermediate layers.
inline Matrix predict(const NetworkState& state, const Matrix& features) {
  detail::check_input(state, features);
  Matrix z = features;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const Layer& layer = state.layers[l];
    z = apply_matrix(layer.activation, detail::affine(layer, z));
    if (!z.all_finite()) {
      throw DivergenceError("predict: non-finite values in layer " +
                                std::to_string(l + 1),
                            l + 1);
    }
  }
  return z;
}

// ϑ: mean loss over the trailing val_targets.cols() columns of the cache.
inline double batch_validation_loss(const ForwardCache& cache,
                                    const Matrix& val_targets, const Loss& loss) {
  const Matrix& out = cache.output();
  if (val_targets.cols() == 0 || val_targets.cols() > out.cols() ||
      val_targets.rows() != out.rows()) {
    throw ShapeError("batch_validation_loss: targets " +
                     val_targets.shape_string() + " vs network output " +
                     out.shape_string());
  }
  return detail::average_loss(loss, out, val_targets,
                              out.cols() - val_targets.cols());
}

// ψ^(k): mean loss over the leading train_targets.cols() columns.
inline double batch_training_loss(const ForwardCache& cache,
                                  const Matrix& train_targets, const Loss& loss) {
  const Matrix& out = cache.output();
  if (train_targets.cols() == 0 || train_targets.cols() > out.cols() ||
      train_targets.rows() != out.rows()) {
    throw ShapeError("batch_training_loss: targets " +
                     train_targets.shape_string() + " vs network output " +
                     out.shape_string());
  }
  return detail::average_loss(loss, out, train_targets, 0);
}

// Δ^(k) over the leading train_targets.cols() columns of the cache.
inline Matrix output_delta(const ForwardCache& cache, const Matrix& train_targets,
                           const Loss& loss, const Activation& output_activation) {
  const Matrix& out = cache.output();
  const std::size_t p = train_targets.cols();
  if (p == 0 || p > out.cols() || train_targets.rows() != out.rows()) {
    throw ShapeError("output_delta: targets " + train_targets.shape_string() +
                     " vs network output " + out.shape_string());
  }
  Matrix loss_grad(out.rows(), p);
  for (std::size_t i = 0; i < p; ++i) {
    const std::vector<double> g =
        loss_gradient(loss, out.col(i), train_targets.col(i));
    for (std::size_t r = 0; r < g.size(); ++r) loss_grad(r, i) = g[r];
  }
  const Matrix s_train = column_block(cache.preactivations.back(), 0, p);
  return derivative_matrix(output_activation, s_train).backprop(loss_grad);
}

inline Matrix hidden_delta(const Matrix& delta_next, const Matrix& w_next,
                           const Matrix& preact, const Activation& activation) {
  if (w_next.rows() != delta_next.rows() || w_next.cols() != preact.rows() ||
      delta_next.cols() != preact.cols()) {
    throw ShapeError("hidden_delta: delta " + delta_next.shape_string() +
                     ", weights " + w_next.shape_string() + ", pre-activations " +
                     preact.shape_string());
  }
  return derivative_matrix(activation, preact)
      .backprop(matmul(transpose(w_next), delta_next));
}

struct LayerGradients {
  Matrix grad_w;
  Vector grad_b;
};

// (1/p)·Δ·Zᵀ, the average of the per-sample outer products δ_i ⊗ z_i, and
// the average delta column.
inline LayerGradients layer_gradients(const Matrix& delta,
                                      const Matrix& z_prev_train) {
  if (delta.cols() != z_prev_train.cols() || delta.cols() == 0) {
    throw ShapeError("layer_gradients: delta " + delta.shape_string() +
                     " vs previous layer " + z_prev_train.shape_string());
  }
  const double inv_p = 1.0 / static_cast<double>(delta.cols());
  return {inv_p * matmul(delta, transpose(z_prev_train)), inv_p * row_sums(delta)};
}

// Gradients of ψ^(k) for every layer, from a cache whose leading
// train_targets.cols() columns are the training samples.
inline std::vector<LayerGradients> backward(const NetworkState& state,
                                            const ForwardCache& cache,
                                            const Matrix& train_targets,
                                            const Loss& loss) {
  const std::size_t k = state.layers.size();
  const std::size_t p = train_targets.cols();
  std::vector<LayerGradients> grads(k);
  Matrix delta = output_delta(cache, train_targets, loss, state.layers.back().activation);
  for (std::size_t r = k; r-- > 0;) {
    grads[r] = layer_gradients(delta, column_block(cache.layer_output(r), 0, p));
    if (r > 0) {
      delta = hidden_delta(delta, state.layers[r].weights,
                           column_block(cache.preactivations[r - 1], 0, p),
                           state.layers[r - 1].activation);
    }
  }
  return grads;
}

// Applies the optimizer to every (W, b) block.
inline void apply_gradients(NetworkState& state,
                            const std::vector<LayerGradients>& grads,
                            const Optimizer& optimizer) {
  for (std::size_t r = state.layers.size(); r-- > 0;) {
    Layer& layer = state.layers[r];
    auto w = optimizer_step(optimizer, std::move(layer.weight_state),
                            std::move(layer.weights), grads[r].grad_w);
    layer.weights = std::move(w.params);
    layer.weight_state = std::move(w.state);
    auto b = optimizer_step(optimizer, std::move(layer.bias_state),
                            std::move(layer.biases), grads[r].grad_b);
    layer.biases = std::move(b.params);
    layer.bias_state = std::move(b.state);
  }
}

enum class StopReason { ToleranceReached, MaxEpochs };

inline const char* to_string(StopReason r) {
  return r == StopReason::ToleranceReached ? "tolerance-reached" : "max-epochs";
}

struct TrainReport {
  std::vector<double> epoch_losses;  // ϑ_1, ϑ_2, ...
  StopReason stop_reason = StopReason::MaxEpochs;
  std::size_t epochs_run = 0;
  double final_gap = 0.0;
};

struct TrainResult {
  NetworkState state;
  TrainReport report;
};

// Batch-mode backpropagation. Each epoch runs a forward pass over the
// training and validation columns side by side, measures the validation
// loss ϑ_t and its change c = |ϑ_t − ϑ_{t-1}| (ϑ_0 is the largest double),
// and, while c ≥ tolerance, back-propagates the training columns and
// updates every layer. Training stops once c ≤ tolerance or after
// max_epochs epochs.
inline TrainResult train(NetworkState state, const Matrix& train_features,
                         const Matrix& train_targets, const Matrix& val_features,
                         const Matrix& val_targets, const NetworkConfig& config) {
  validate(config, state.output_dim());
  if (train_features.cols() == 0 || val_features.cols() == 0) {
    throw DataError("train: training and validation sets must be non-empty");
  }
  if (train_targets.cols() != train_features.cols() ||
      val_targets.cols() != val_features.cols()) {
    throw ShapeError("train: feature and target column counts differ");
  }
  const Matrix z0 = hstack(train_features, val_features);

  TrainReport report;
  double previous = std::numeric_limits<double>::max();
  double gap = std::numeric_limits<double>::max();
  std::size_t t = 1;
  while (gap > config.tolerance && t <= config.max_epochs) {
    ForwardCache cache;
    try {
      cache = forward(state, z0);
    } catch (const DivergenceError& e) {
      throw DivergenceError("train: diverged at epoch " + std::to_string(t) +
                                " (" + e.what() + ")",
                            t);
    }
    const double theta = batch_validation_loss(cache, val_targets, config.loss);
    if (!std::isfinite(theta)) {
      throw DivergenceError("train: validation loss is not finite at epoch " +
                                std::to_string(t),
                            t);
    }
    report.epoch_losses.push_back(theta);
    gap = std::abs(theta - previous);
    previous = theta;
    if (gap >= config.tolerance) {
      try {
        apply_gradients(state, backward(state, cache, train_targets, config.loss),
                        config.optimizer);
      } catch (const DivergenceError& e) {
        throw DivergenceError("train: diverged at epoch " + std::to_string(t) +
                                  " (" + e.what() + ")",
                              t);
      }
    }
    ++t;
    state.epoch = t;
  }
  report.epochs_run = t - 1;
  report.final_gap = gap;
  report.stop_reason =
      gap > config.tolerance ? StopReason::MaxEpochs : StopReason::ToleranceReached;
  return {std::move(state), std::move(report)};
}

}  // namespace treg::nn
