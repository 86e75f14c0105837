#pragma once

// Activation functions, their derivatives, and their application to the
// unit-value matrices of a layer (rows are units, columns are samples).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "treg/errors.hpp"
#include "treg/matrix.hpp"
#include "treg/overloaded.hpp"

namespace treg {

namespace act {

struct Sigmoid {};
struct Relu {};
struct LeakyRelu {
  double beta = 0.01;
};
// Same shape as LeakyRelu; beta is a fixed hyperparameter, not trained.
struct ParametricRelu {
  double beta = 0.25;
};
struct Elu {
  double beta = 1.0;
};
struct Swish {};
// Normalizes each column; only valid as a whole-layer activation.
struct Softmax {};
// Not among the classic catalog, but needed for linear regression outputs.
struct Identity {};

}  // namespace act

using Activation = std::variant<act::Sigmoid, act::Relu, act::LeakyRelu,
                                act::ParametricRelu, act::Elu, act::Swish,
                                act::Softmax, act::Identity>;

inline bool is_softmax(const Activation& a) {
  return std::holds_alternative<act::Softmax>(a);
}

inline std::string activation_name(const Activation& a) {
  static const char* const names[] = {"sigmoid", "relu",    "leaky_relu",
                                      "prelu",   "elu",     "swish",
                                      "softmax", "identity"};
  return names[a.index()];
}

// Returns the hyperparameter β for the ReLU-family kinds that carry one.
inline std::optional<double> activation_beta(const Activation& a) {
  if (auto* p = std::get_if<act::LeakyRelu>(&a)) return p->beta;
  if (auto* p = std::get_if<act::ParametricRelu>(&a)) return p->beta;
  if (auto* p = std::get_if<act::Elu>(&a)) return p->beta;
  return std::nullopt;
}

// Looks up an activation by its config name. `beta` overrides the default
// for leaky_relu, prelu and elu and is rejected for every other kind.
inline Activation parse_activation(const std::string& name,
                                   std::optional<double> beta = std::nullopt) {
  auto no_beta = [&](Activation a) -> Activation {
    if (beta) throw ConfigError("activation '" + name + "' takes no parameter");
    return a;
  };
  if (name == "sigmoid") return no_beta(act::Sigmoid{});
  if (name == "relu") return no_beta(act::Relu{});
  if (name == "swish") return no_beta(act::Swish{});
  if (name == "softmax") return no_beta(act::Softmax{});
  if (name == "identity") return no_beta(act::Identity{});
  if (name == "leaky_relu") return act::LeakyRelu{beta.value_or(act::LeakyRelu{}.beta)};
  if (name == "prelu") return act::ParametricRelu{beta.value_or(act::ParametricRelu{}.beta)};
  if (name == "elu") return act::Elu{beta.value_or(act::Elu{}.beta)};
  throw ConfigError("unknown activation '" + name + "'");
}

namespace detail {

// Logistic 1/(1+e^{-x}), evaluated without overflow for large |x|.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

inline double apply_scalar(const Activation& kind, double x) {
  return std::visit(
      detail::overloaded{
          [x](act::Sigmoid) { return detail::logistic(x); },
          [x](act::Relu) { return std::max(0.0, x); },
          [x](act::LeakyRelu a) { return x > 0.0 ? x : a.beta * x; },
          [x](act::ParametricRelu a) { return x > 0.0 ? x : a.beta * x; },
          [x](act::Elu a) { return x > 0.0 ? x : a.beta * std::expm1(x); },
          [x](act::Swish) { return x * detail::logistic(x); },
          [](act::Softmax) -> double {
            throw MisuseError("softmax has no scalar form; apply it to a layer");
          },
          [x](act::Identity) { return x; },
      },
      kind);
}

// At the kinks of the ReLU family the left derivative is returned.
inline double derivative_scalar(const Activation& kind, double x) {
  return std::visit(
      detail::overloaded{
          [x](act::Sigmoid) {
            const double s = detail::logistic(x);
            return s * (1.0 - s);
          },
          [x](act::Relu) { return x > 0.0 ? 1.0 : 0.0; },
          [x](act::LeakyRelu a) { return x > 0.0 ? 1.0 : a.beta; },
          [x](act::ParametricRelu a) { return x > 0.0 ? 1.0 : a.beta; },
          [x](act::Elu a) { return x > 0.0 ? 1.0 : a.beta * std::exp(x); },
          [x](act::Swish) {
            const double s = detail::logistic(x);
            return s + x * s * (1.0 - s);
          },
          [](act::Softmax) -> double {
            throw MisuseError("softmax has no scalar derivative; use its Jacobian");
          },
          [](act::Identity) { return 1.0; },
      },
      kind);
}

// Column-wise softmax; the column max is subtracted before exponentiation.
inline Matrix softmax_columns(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.rows(); ++i) top = std::max(top, a(i, j));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      out(i, j) = std::exp(a(i, j) - top);
      sum += out(i, j);
    }
    for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) /= sum;
  }
  return out;
}

inline Matrix apply_matrix(const Activation& kind, const Matrix& a) {
  if (is_softmax(kind)) return softmax_columns(a);
  Matrix out = a;
  for (double& v : out.values()) v = apply_scalar(kind, v);
  return out;
}

// Derivative of a layer activation at the pre-activations `a`: an entrywise
// matrix for diagonal kinds, one Jacobian per column for softmax.
class ActivationDerivative {
 public:
  explicit ActivationDerivative(Matrix diagonal) : value_(std::move(diagonal)) {}
  explicit ActivationDerivative(std::vector<Matrix> jacobians)
      : value_(std::move(jacobians)) {}

  bool is_diagonal() const { return std::holds_alternative<Matrix>(value_); }
  const Matrix& diagonal() const { return std::get<Matrix>(value_); }
  const std::vector<Matrix>& jacobians() const {
    return std::get<std::vector<Matrix>>(value_);
  }

  // Chain rule for each column i: J_iᵀ · upstream_i. For diagonal kinds this
  // is the entrywise product.
  Matrix backprop(const Matrix& upstream) const {
    if (is_diagonal()) return hadamard(diagonal(), upstream);
    const auto& jac = jacobians();
    if (jac.size() != upstream.cols()) {
      throw ShapeError("ActivationDerivative::backprop: " +
                       std::to_string(jac.size()) + " Jacobians for " +
                       upstream.shape_string() + " upstream");
    }
    Matrix out(upstream.rows(), upstream.cols());
    for (std::size_t c = 0; c < jac.size(); ++c) {
      const Matrix& j = jac[c];
      if (j.rows() != upstream.rows()) {
        throw ShapeError("ActivationDerivative::backprop: Jacobian " +
                         j.shape_string() + " vs upstream " +
                         upstream.shape_string());
      }
      for (std::size_t r = 0; r < j.cols(); ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < j.rows(); ++k) s += j(k, r) * upstream(k, c);
        out(r, c) = s;
      }
    }
    return out;
  }

 private:
  std::variant<Matrix, std::vector<Matrix>> value_;
};

inline ActivationDerivative derivative_matrix(const Activation& kind,
                                              const Matrix& a) {
  if (is_softmax(kind)) {
    const Matrix s = softmax_columns(a);
    std::vector<Matrix> jacobians;
    jacobians.reserve(a.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) {
      Matrix j(a.rows(), a.rows());
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t k = 0; k < a.rows(); ++k)
          j(r, k) = s(r, c) * ((r == k ? 1.0 : 0.0) - s(k, c));
      jacobians.push_back(std::move(j));
    }
    return ActivationDerivative(std::move(jacobians));
  }
  Matrix d = a;
  for (double& v : d.values()) v = derivative_scalar(kind, v);
  return ActivationDerivative(std::move(d));
}

}  // namespace treg
