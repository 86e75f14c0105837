#pragma once

// Weight initialization schemes. Weights of layer l are q_l×q_{l-1}
// (fan_out × fan_in); biases start at zero.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "treg/errors.hpp"
#include "treg/matrix.hpp"
#include "treg/overloaded.hpp"
#include "treg/rng.hpp"

namespace treg {

namespace init {
struct RandomUniform {
  double beta = 0.05;
};
struct RandomNormal {
  double sigma = 0.05;
};
struct XavierUniform {};
struct KaimingUniform {};
struct KaimingNormal {};
struct LecunNormal {};
}  // namespace init

using Initializer = std::variant<init::RandomUniform, init::RandomNormal,
                                 init::XavierUniform, init::KaimingUniform,
                                 init::KaimingNormal, init::LecunNormal>;

inline std::string initializer_name(const Initializer& k) {
  static const char* const names[] = {"random_uniform",  "random_normal",
                                      "xavier",          "kaiming_uniform",
                                      "kaiming_normal",  "lecun"};
  return names[k.index()];
}

// `scale` sets β for random_uniform and σ for random_normal.
inline Initializer parse_initializer(const std::string& name,
                                     std::optional<double> scale = std::nullopt) {
  if (scale && !(*scale > 0.0)) {
    throw ConfigError("initializer scale must be > 0");
  }
  if (name == "random_uniform") return init::RandomUniform{scale.value_or(0.05)};
  if (name == "random_normal") return init::RandomNormal{scale.value_or(0.05)};
  if (name == "xavier") return init::XavierUniform{};
  if (name == "kaiming_uniform") return init::KaimingUniform{};
  if (name == "kaiming_normal") return init::KaimingNormal{};
  if (name == "lecun") return init::LecunNormal{};
  throw ConfigError("unknown initializer '" + name + "'");
}

// Half-width of the sampling interval for the uniform schemes.
inline double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0) / (std::sqrt(double(fan_in)) + std::sqrt(double(fan_out)));
}
inline double kaiming_bound(std::size_t fan_in) {
  return std::sqrt(6.0 / double(fan_in));
}

inline Matrix init_weights(const Initializer& kind, std::size_t fan_in,
                           std::size_t fan_out, SeededRng& rng) {
  if (fan_in < 1 || fan_out < 1) {
    throw ShapeError("init_weights: fan_in and fan_out must be >= 1");
  }
  Matrix w(fan_out, fan_in);
  auto fill = [&w](auto&& draw) {
    for (double& v : w.values()) v = draw();
  };
  std::visit(
      detail::overloaded{
          [&](init::RandomUniform k) { fill([&] { return rng.symmetric_uniform(k.beta); }); },
          [&](init::RandomNormal k) { fill([&] { return rng.normal(0.0, k.sigma); }); },
          [&](init::XavierUniform) {
            const double b = xavier_bound(fan_in, fan_out);
            fill([&] { return rng.symmetric_uniform(b); });
          },
          [&](init::KaimingUniform) {
            const double b = kaiming_bound(fan_in);
            fill([&] { return rng.symmetric_uniform(b); });
          },
          [&](init::KaimingNormal) {
            const double sd = std::sqrt(2.0 / double(fan_in));
            fill([&] { return rng.normal(0.0, sd); });
          },
          [&](init::LecunNormal) {
            const double sd = std::sqrt(1.0 / double(fan_in));
            fill([&] { return rng.normal(0.0, sd); });
          },
      },
      kind);
  return w;
}

inline Vector init_biases(std::size_t length) {
  if (length < 1) throw ShapeError("init_biases: length must be >= 1");
  return Vector(length, 1);
}

}  // namespace treg
