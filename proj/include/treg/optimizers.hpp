#pragma once

// Parameter update rules ω(gradient, params) for one parameter block
// (a weight matrix or a bias vector). Plain gradient descent is
//
//   p' = p − γ·g
//
// and the remaining kinds are the standard formulations of momentum,
// Nesterov momentum, AdaGrad, RMSProp, Adam and Nadam. Every product,
// square root and quotient below acts entrywise.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "treg/errors.hpp"
#include "treg/matrix.hpp"
#include "treg/overloaded.hpp"

namespace treg {

namespace opt {
struct Gd {
  double gamma = 0.01;
};
struct Momentum {
  double gamma = 0.01;
  double mu = 0.9;
};
struct Nesterov {
  double gamma = 0.01;
  double mu = 0.9;
};
struct AdaGrad {
  double gamma = 0.01;
  double eps = 1e-8;
};
struct RmsProp {
  double gamma = 0.01;
  double rho = 0.9;
  double eps = 1e-8;
};
struct Adam {
  double gamma = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};
struct Nadam {
  double gamma = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};
}  // namespace opt

using Optimizer = std::variant<opt::Gd, opt::Momentum, opt::Nesterov,
                               opt::AdaGrad, opt::RmsProp, opt::Adam, opt::Nadam>;

inline std::string optimizer_name(const Optimizer& o) {
  static const char* const names[] = {"gd",      "momentum", "nesterov", "adagrad",
                                      "rmsprop", "adam",     "nadam"};
  return names[o.index()];
}

inline double learning_rate(const Optimizer& o) {
  return std::visit([](const auto& k) { return k.gamma; }, o);
}

// Default hyperparameters for `name`; `gamma` overrides the learning rate.
inline Optimizer parse_optimizer(const std::string& name,
                                 std::optional<double> gamma = std::nullopt) {
  Optimizer o;
  if (name == "gd") o = opt::Gd{};
  else if (name == "momentum") o = opt::Momentum{};
  else if (name == "nesterov") o = opt::Nesterov{};
  else if (name == "adagrad") o = opt::AdaGrad{};
  else if (name == "rmsprop") o = opt::RmsProp{};
  else if (name == "adam") o = opt::Adam{};
  else if (name == "nadam") o = opt::Nadam{};
  else throw ConfigError("unknown optimizer '" + name + "'");
  if (gamma) std::visit([&](auto& k) { k.gamma = *gamma; }, o);
  return o;
}

inline void validate(const Optimizer& o) {
  auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
  const bool ok = std::visit(
      detail::overloaded{
          [](const opt::Gd& k) { return k.gamma > 0.0; },
          [&](const opt::Momentum& k) { return k.gamma > 0.0 && unit(k.mu); },
          [&](const opt::Nesterov& k) { return k.gamma > 0.0 && unit(k.mu); },
          [](const opt::AdaGrad& k) { return k.gamma > 0.0 && k.eps > 0.0; },
          [&](const opt::RmsProp& k) {
            return k.gamma > 0.0 && unit(k.rho) && k.eps > 0.0;
          },
          [&](const opt::Adam& k) {
            return k.gamma > 0.0 && unit(k.beta1) && unit(k.beta2) && k.eps > 0.0;
          },
          [&](const opt::Nadam& k) {
            return k.gamma > 0.0 && unit(k.beta1) && unit(k.beta2) && k.eps > 0.0;
          },
      },
      o);
  if (!ok) throw ConfigError("invalid hyperparameters for optimizer '" + optimizer_name(o) + "'");
}

// Accumulators for one parameter block. `first` is the velocity (momentum
// kinds) or first-moment estimate (Adam kinds); `second` is the squared
// gradient accumulator or second-moment estimate. Both start at zero.
struct OptimizerState {
  Matrix first;
  Matrix second;
  std::uint64_t timestep = 0;

  static OptimizerState for_block(const Matrix& params) {
    return {Matrix(params.rows(), params.cols()),
            Matrix(params.rows(), params.cols()), 0};
  }
};

struct OptimizerStep {
  Matrix params;
  OptimizerState state;
};

inline OptimizerStep optimizer_step(const Optimizer& kind, OptimizerState state,
                                    Matrix params, const Matrix& grad) {
  if (!params.same_shape(grad) || !params.same_shape(state.first) ||
      !params.same_shape(state.second)) {
    throw ShapeError("optimizer_step: params " + params.shape_string() +
                     ", grad " + grad.shape_string() + ", state " +
                     state.first.shape_string());
  }
  if (!grad.all_finite()) {
    throw DivergenceError("optimizer_step: non-finite gradient at step " +
                              std::to_string(state.timestep + 1),
                          state.timestep + 1);
  }
  ++state.timestep;
  const std::size_t n = params.size();
  double* p = params.data();
  double* a = state.first.data();
  double* b = state.second.data();
  const double* g = grad.data();
  const double t = static_cast<double>(state.timestep);

  std::visit(
      detail::overloaded{
          [&](const opt::Gd& k) {
            for (std::size_t i = 0; i < n; ++i) p[i] -= k.gamma * g[i];
          },
          [&](const opt::Momentum& k) {
            for (std::size_t i = 0; i < n; ++i) {
              a[i] = k.mu * a[i] + k.gamma * g[i];
              p[i] -= a[i];
            }
          },
          [&](const opt::Nesterov& k) {
            for (std::size_t i = 0; i < n; ++i) {
              a[i] = k.mu * a[i] + k.gamma * g[i];
              p[i] -= k.mu * a[i] + k.gamma * g[i];
            }
          },
          [&](const opt::AdaGrad& k) {
            for (std::size_t i = 0; i < n; ++i) {
              b[i] += g[i] * g[i];
              p[i] -= k.gamma * g[i] / (std::sqrt(b[i]) + k.eps);
            }
          },
          [&](const opt::RmsProp& k) {
            for (std::size_t i = 0; i < n; ++i) {
              b[i] = k.rho * b[i] + (1.0 - k.rho) * g[i] * g[i];
              p[i] -= k.gamma * g[i] / (std::sqrt(b[i]) + k.eps);
            }
          },
          [&](const opt::Adam& k) {
            const double c1 = 1.0 - std::pow(k.beta1, t);
            const double c2 = 1.0 - std::pow(k.beta2, t);
            for (std::size_t i = 0; i < n; ++i) {
              a[i] = k.beta1 * a[i] + (1.0 - k.beta1) * g[i];
              b[i] = k.beta2 * b[i] + (1.0 - k.beta2) * g[i] * g[i];
              const double m_hat = a[i] / c1;
              const double v_hat = b[i] / c2;
              p[i] -= k.gamma * m_hat / (std::sqrt(v_hat) + k.eps);
            }
          },
          [&](const opt::Nadam& k) {
            const double c1 = 1.0 - std::pow(k.beta1, t);
            const double c2 = 1.0 - std::pow(k.beta2, t);
            for (std::size_t i = 0; i < n; ++i) {
              a[i] = k.beta1 * a[i] + (1.0 - k.beta1) * g[i];
              b[i] = k.beta2 * b[i] + (1.0 - k.beta2) * g[i] * g[i];
              const double m_hat = a[i] / c1;
              const double v_hat = b[i] / c2;
              const double lookahead = k.beta1 * m_hat + (1.0 - k.beta1) * g[i] / c1;
              p[i] -= k.gamma * lookahead / (std::sqrt(v_hat) + k.eps);
            }
          },
      },
      kind);
  return {std::move(params), std::move(state)};
}

}  // namespace treg
