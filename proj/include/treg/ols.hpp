#pragma once

// Ordinary least squares for vector-valued linear regression
//
//   f(u) ≈ B · (u_1, ..., u_n, 1)ᵀ,      B is m×(n+1),
//
// solved either from the normal equation B·Z = Y·X with Z = XᵀX, or by
// full-batch gradient descent with a Barzilai-Borwein learning rate.
//
// Layout: the design matrix X is p×(n+1), one training sample per row with a
// trailing bias column of ones; the target matrix Y is m×p, one training
// sample per column.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treg/errors.hpp"
#include "treg/matrix.hpp"

namespace treg::ols {

struct Problem {
  Matrix x_design;   // p×(n+1)
  Matrix y_targets;  // m×p

  std::size_t samples() const noexcept { return x_design.rows(); }
  std::size_t feature_dim() const noexcept { return x_design.cols() - 1; }
  std::size_t target_dim() const noexcept { return y_targets.rows(); }
};

struct Model {
  Matrix b;  // m×(n+1)
};

struct GdConfig {
  double epsilon = 1e-10;
  std::size_t max_iterations = 10000;
  std::optional<double> gamma0;  // defaults to default_guesses()
  std::optional<Matrix> b0;      // defaults to default_guesses()
};

struct GdTrace {
  std::size_t iterations = 0;
  double final_step_norm = 0.0;
  bool converged = false;
  // Set when the Barzilai-Borwein quotient degenerated (‖L·Z‖ = 0).
  bool degenerate_step = false;
};

struct GdResult {
  Model model;
  GdTrace trace;
};

struct InitialGuess {
  Matrix b0;
  double gamma0;
};

// Assembles X (samples stacked vertically, bias column appended) and Y
// (targets stacked horizontally).
inline Problem build_problem(const std::vector<std::vector<double>>& features,
                             const std::vector<std::vector<double>>& targets) {
  if (features.empty() || targets.empty()) {
    throw DataError("build_problem: training set is empty");
  }
  if (features.size() != targets.size()) {
    throw ShapeError("build_problem: " + std::to_string(features.size()) +
                     " feature vectors but " + std::to_string(targets.size()) +
                     " target vectors");
  }
  const std::size_t p = features.size();
  const std::size_t n = features.front().size();
  const std::size_t m = targets.front().size();
  if (n == 0 || m == 0) {
    throw ShapeError("build_problem: feature and target vectors must be non-empty");
  }
  Problem problem{Matrix(p, n + 1), Matrix(m, p)};
  for (std::size_t k = 0; k < p; ++k) {
    if (features[k].size() != n) {
      throw ShapeError("build_problem: feature vector " + std::to_string(k) +
                       " has length " + std::to_string(features[k].size()) +
                       ", expected " + std::to_string(n));
    }
    if (targets[k].size() != m) {
      throw ShapeError("build_problem: target vector " + std::to_string(k) +
                       " has length " + std::to_string(targets[k].size()) +
                       ", expected " + std::to_string(m));
    }
    for (std::size_t j = 0; j < n; ++j) problem.x_design(k, j) = features[k][j];
    problem.x_design(k, n) = 1.0;
    for (std::size_t i = 0; i < m; ++i) problem.y_targets(i, k) = targets[k][i];
  }
  return problem;
}

inline void validate(const Problem& problem) {
  const Matrix& x = problem.x_design;
  const Matrix& y = problem.y_targets;
  if (x.rows() == 0 || x.cols() < 2 || y.rows() == 0) {
    throw ShapeError("ols: need p >= 1, n >= 1 and m >= 1, got X " +
                     x.shape_string() + " and Y " + y.shape_string());
  }
  if (y.cols() != x.rows()) {
    throw ShapeError("ols: Y " + y.shape_string() + " does not match X " +
                     x.shape_string());
  }
  for (std::size_t k = 0; k < x.rows(); ++k) {
    if (x(k, x.cols() - 1) != 1.0) {
      throw DataError("ols: bias column of X must be 1 in every row (row " +
                      std::to_string(k) + ")");
    }
  }
}

// Z = XᵀX, the coordinates of Σ_k ū^k ⊗ ū^k.
inline Matrix gram(const Problem& problem) {
  return matmul(transpose(problem.x_design), problem.x_design);
}

// K = Y·X, the coordinates of Σ_k f(u^k) ⊗ ū^k.
inline Matrix moment(const Problem& problem) {
  return matmul(problem.y_targets, problem.x_design);
}

// ψ(B) = Σ_k ‖f(u^k) − B·ū^k‖² = ‖Y − B·Xᵀ‖².
inline double sum_squared_residuals(const Problem& problem, const Matrix& b) {
  const Matrix residual =
      problem.y_targets - matmul(b, transpose(problem.x_design));
  return frobenius_inner(residual, residual);
}

// ∇ψ(B) = 2(B·Z − Y·X).
inline Matrix loss_gradient(const Matrix& b, const Matrix& z, const Matrix& k) {
  return 2.0 * (matmul(b, z) - k);
}

// B = Y·X·Z⁻¹. Throws SingularityError when Z is not invertible.
inline Model solve_analytic(const Problem& problem) {
  validate(problem);
  const Matrix z = gram(problem);
  Matrix z_inv;
  try {
    z_inv = inverse(z);
  } catch (const SingularityError&) {
    throw SingularityError(
        "solve_analytic: XᵀX is singular (det = 0); the training set does not "
        "determine B uniquely. Use the gradient-descent solver instead.");
  }
  return Model{matmul(moment(problem), z_inv)};
}

// γ = |L : L·Z| / (2‖L·Z‖²), or nullopt when ‖L·Z‖ = 0.
inline std::optional<double> bb_learning_rate(const Matrix& l_step,
                                              const Matrix& z) {
  const Matrix lz = matmul(l_step, z);
  const double denom = frobenius_inner(lz, lz);
  if (denom == 0.0) return std::nullopt;
  return std::abs(frobenius_inner(l_step, lz)) / (2.0 * denom);
}

// Dimensionally consistent starting point: every entry of B₀ is ‖Y‖/‖X‖ and
// γ₀ = 1/(2‖X‖²). Only meaningful when features and targets are normalized.
inline InitialGuess default_guesses(const Problem& problem) {
  const double x_norm = frobenius_norm(problem.x_design);
  const double y_norm = frobenius_norm(problem.y_targets);
  return InitialGuess{
      Matrix(problem.target_dim(), problem.feature_dim() + 1, y_norm / x_norm),
      1.0 / (2.0 * x_norm * x_norm)};
}

// Full-batch gradient descent on ψ. The first step uses γ₀; every later step
// uses the Barzilai-Borwein rate built from the previous step L. Iteration
// stops once ‖L‖ < ε, when the rate degenerates, or after max_iterations
// updates.
inline GdResult solve_gd(const Problem& problem, const GdConfig& config) {
  validate(problem);
  if (!(config.epsilon > 0.0)) throw ConfigError("solve_gd: epsilon must be > 0");
  if (config.max_iterations < 1) {
    throw ConfigError("solve_gd: max_iterations must be >= 1");
  }

  const Matrix z = gram(problem);
  const Matrix k = moment(problem);

  const InitialGuess guess = default_guesses(problem);
  Matrix b = config.b0.value_or(guess.b0);
  const double gamma0 = config.gamma0.value_or(guess.gamma0);
  if (!b.same_shape(guess.b0)) {
    throw ShapeError("solve_gd: B0 is " + b.shape_string() + ", expected " +
                     guess.b0.shape_string());
  }
  if (!(gamma0 > 0.0)) throw ConfigError("solve_gd: gamma0 must be > 0");

  Matrix next = b - 2.0 * gamma0 * (matmul(b, z) - k);
  Matrix l_step = next - b;
  b = std::move(next);
  if (!b.all_finite()) {
    throw DivergenceError("solve_gd: iterate became non-finite at iteration 1", 1);
  }

  GdTrace trace;
  trace.iterations = 1;
  double step_norm = frobenius_norm(l_step);
  while (!(step_norm < config.epsilon) &&
         trace.iterations < config.max_iterations) {
    const std::optional<double> gamma = bb_learning_rate(l_step, z);
    if (!gamma) {
      trace.degenerate_step = true;
      break;
    }
    next = b - 2.0 * *gamma * (matmul(b, z) - k);
    l_step = next - b;
    b = std::move(next);
    ++trace.iterations;
    if (!b.all_finite()) {
      throw DivergenceError("solve_gd: iterate became non-finite at iteration " +
                                std::to_string(trace.iterations),
                            trace.iterations);
    }
    step_norm = frobenius_norm(l_step);
  }
  trace.final_step_norm = step_norm;
  trace.converged = trace.degenerate_step || step_norm < config.epsilon;
  return GdResult{Model{std::move(b)}, trace};
}

// B · (x_1, ..., x_n, 1)ᵀ
inline std::vector<double> predict(const Model& model,
                                   const std::vector<double>& feature) {
  const Matrix& b = model.b;
  if (feature.size() + 1 != b.cols()) {
    throw ShapeError("ols::predict: feature has length " +
                     std::to_string(feature.size()) + ", model expects " +
                     std::to_string(b.cols() - 1));
  }
  std::vector<double> out(b.rows());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    double s = b(i, b.cols() - 1);
    for (std::size_t j = 0; j < feature.size(); ++j) s += b(i, j) * feature[j];
    out[i] = s;
  }
  return out;
}

}  // namespace treg::ols
