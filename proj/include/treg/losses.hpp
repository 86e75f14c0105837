#pragma once

// Regression losses L(x, y) over m-vectors, x the prediction and y the
// target, and their gradients with respect to x.
//
// Formulas follow the classic catalog as usually printed, including two
// quirks that are kept on purpose:
//   * Huber carries no 1/m factor, unlike the other five.
//   * Poisson is (1/m)Σ(x_i − x_i·log y_i), which puts the prediction
//     outside the logarithm. The conventional form is (1/m)Σ(x_i − y_i·log x_i);
//     it is not substituted here.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "treg/errors.hpp"
#include "treg/overloaded.hpp"

namespace treg {

namespace loss_kind {
struct Mse {};
struct Mae {};
struct Huber {
  double delta = 1.0;
};
struct LogCosh {};
struct Msle {};
struct Poisson {};
}  // namespace loss_kind

using Loss = std::variant<loss_kind::Mse, loss_kind::Mae, loss_kind::Huber,
                          loss_kind::LogCosh, loss_kind::Msle,
                          loss_kind::Poisson>;

inline std::string loss_name(const Loss& l) {
  static const char* const names[] = {"mse",      "mae",  "huber",
                                      "log_cosh", "msle", "poisson"};
  return names[l.index()];
}

inline Loss parse_loss(const std::string& name, double huber_delta = 1.0) {
  if (name == "mse") return loss_kind::Mse{};
  if (name == "mae") return loss_kind::Mae{};
  if (name == "huber") {
    if (!(huber_delta > 0.0)) throw ConfigError("huber delta must be > 0");
    return loss_kind::Huber{huber_delta};
  }
  if (name == "log_cosh") return loss_kind::LogCosh{};
  if (name == "msle") return loss_kind::Msle{};
  if (name == "poisson") return loss_kind::Poisson{};
  throw ConfigError("unknown loss '" + name + "'");
}

namespace detail {

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// log(cosh(r)) without overflow for large |r|.
inline double log_cosh(double r) {
  const double a = std::abs(r);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

inline void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ShapeError("loss: prediction has length " + std::to_string(x.size()) +
                     " but target has length " + std::to_string(y.size()));
  }
  if (x.empty()) throw ShapeError("loss: empty vectors");
}

inline void check_domain(const Loss& kind, std::span<const double> x,
                         std::span<const double> y) {
  if (std::holds_alternative<loss_kind::Msle>(kind)) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] > -1.0) || !(y[i] > -1.0)) {
        throw DomainError("msle: entries must exceed -1 (index " +
                          std::to_string(i) + ")");
      }
    }
  } else if (std::holds_alternative<loss_kind::Poisson>(kind)) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(y[i] > 0.0)) {
        throw DomainError("poisson: target must be positive (index " +
                          std::to_string(i) + ")");
      }
    }
  }
}

}  // namespace detail

inline double loss(const Loss& kind, std::span<const double> x,
                   std::span<const double> y) {
  detail::check_lengths(x, y);
  detail::check_domain(kind, x, y);
  const double m = static_cast<double>(x.size());
  double sum = 0.0;
  std::visit(
      detail::overloaded{
          [&](loss_kind::Mse) {
            for (std::size_t i = 0; i < x.size(); ++i) {
              const double r = x[i] - y[i];
              sum += r * r;
            }
            sum /= m;
          },
          [&](loss_kind::Mae) {
            for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
            sum /= m;
          },
          [&](loss_kind::Huber h) {
            for (std::size_t i = 0; i < x.size(); ++i) {
              const double a = std::abs(x[i] - y[i]);
              sum += a <= h.delta ? 0.5 * a * a : h.delta * a - 0.5 * h.delta * h.delta;
            }
          },
          [&](loss_kind::LogCosh) {
            for (std::size_t i = 0; i < x.size(); ++i) sum += detail::log_cosh(x[i] - y[i]);
            sum /= m;
          },
          [&](loss_kind::Msle) {
            for (std::size_t i = 0; i < x.size(); ++i) {
              const double r = std::log1p(x[i]) - std::log1p(y[i]);
              sum += r * r;
            }
            sum /= m;
          },
          [&](loss_kind::Poisson) {
            for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] - x[i] * std::log(y[i]);
            sum /= m;
          },
      },
      kind);
  return sum;
}

// ∂L/∂x. sign(0) = 0 at the MAE and Huber kinks.
inline std::vector<double> loss_gradient(const Loss& kind,
                                         std::span<const double> x,
                                         std::span<const double> y) {
  detail::check_lengths(x, y);
  detail::check_domain(kind, x, y);
  const double m = static_cast<double>(x.size());
  std::vector<double> g(x.size());
  std::visit(
      detail::overloaded{
          [&](loss_kind::Mse) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * (x[i] - y[i]) / m;
          },
          [&](loss_kind::Mae) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = detail::sign(x[i] - y[i]) / m;
          },
          [&](loss_kind::Huber h) {
            for (std::size_t i = 0; i < x.size(); ++i) {
              const double r = x[i] - y[i];
              g[i] = std::abs(r) <= h.delta ? r : h.delta * detail::sign(r);
            }
          },
          [&](loss_kind::LogCosh) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = std::tanh(x[i] - y[i]) / m;
          },
          [&](loss_kind::Msle) {
            for (std::size_t i = 0; i < x.size(); ++i) {
              g[i] = 2.0 * (std::log1p(x[i]) - std::log1p(y[i])) / ((x[i] + 1.0) * m);
            }
          },
          [&](loss_kind::Poisson) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = (1.0 - std::log(y[i])) / m;
          },
      },
      kind);
  return g;
}

}  // namespace treg
