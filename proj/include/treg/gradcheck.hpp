#pragma once

// Finite-difference verification of backpropagated gradients on randomly
// generated small networks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "treg/network.hpp"
#include "treg/rng.hpp"

namespace treg::nn {

struct GradcheckOptions {
  std::size_t configurations = 50;
  double step = 1e-5;
  // Differences below this are treated as exact agreement.
  double absolute_floor = 1e-7;
};

struct GradcheckResult {
  std::size_t configurations = 0;
  std::size_t entries_checked = 0;
  double max_relative_error = 0.0;
};

inline double gradient_relative_error(double analytic, double numeric,
                                      double absolute_floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= absolute_floor) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

// Random smooth problem: n ∈ {2,3}, up to three layers of width ≤ 5,
// sigmoid/swish/identity activations, mse or log_cosh loss, p ≤ 8 samples.
struct GradcheckProblem {
  NetworkState state;
  Matrix features;
  Matrix targets;
  Loss loss;
};

inline GradcheckProblem random_gradcheck_problem(SeededRng& rng) {
  const std::size_t n = 2 + rng.below(2);
  const std::size_t k = 1 + rng.below(3);
  const std::size_t p = 1 + rng.below(8);
  const Activation smooth[] = {act::Sigmoid{}, act::Swish{}, act::Identity{}};

  NetworkConfig config;
  for (std::size_t l = 0; l < k; ++l) {
    config.layers.push_back({1 + rng.below(5), smooth[rng.below(3)]});
  }
  config.loss = rng.below(2) == 0 ? Loss{loss_kind::Mse{}} : Loss{loss_kind::LogCosh{}};
  config.initializer = init::RandomUniform{1.0};
  config.seed = rng.next_u64() >> 1;

  NetworkState state = init_network(config, n);
  for (Layer& layer : state.layers)
    for (double& b : layer.biases.values()) b = rng.symmetric_uniform(0.5);

  const std::size_t m = config.layers.back().units;
  Matrix x(n, p), y(m, p);
  for (double& v : x.values()) v = rng.symmetric_uniform(1.0);
  for (double& v : y.values()) v = rng.symmetric_uniform(1.0);
  return {std::move(state), std::move(x), std::move(y), config.loss};
}

// Worst relative error over every weight and bias entry of one problem.
inline double check_gradients(GradcheckProblem& problem, const GradcheckOptions& options,
                              std::size_t* entries = nullptr) {
  NetworkState& state = problem.state;
  const auto loss_at = [&] {
    return batch_training_loss(forward(state, problem.features), problem.targets,
                               problem.loss);
  };
  const auto grads = backward(state, forward(state, problem.features),
                              problem.targets, problem.loss);
  double worst = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + options.step;
    const double up = loss_at();
    param = saved - options.step;
    const double down = loss_at();
    param = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    worst = std::max(worst, gradient_relative_error(analytic, numeric,
                                                    options.absolute_floor));
    if (entries) ++*entries;
  };
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    Layer& layer = state.layers[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i)
      probe(layer.weights.values()[i], grads[l].grad_w.values()[i]);
    for (std::size_t i = 0; i < layer.biases.size(); ++i)
      probe(layer.biases.values()[i], grads[l].grad_b.values()[i]);
  }
  return worst;
}

inline GradcheckResult run_gradcheck(std::uint64_t seed,
                                     const GradcheckOptions& options = {}) {
  SeededRng rng(seed);
  GradcheckResult result;
  for (std::size_t c = 0; c < options.configurations; ++c) {
    GradcheckProblem problem = random_gradcheck_problem(rng);
    result.max_relative_error =
        std::max(result.max_relative_error,
                 check_gradients(problem, options, &result.entries_checked));
    ++result.configurations;
  }
  return result;
}

}  // namespace treg::nn
