#pragma once

// Dense row-major matrices of doubles and the handful of operations the
// regression solvers are built from. Tensors are never materialized: every
// second-order tensor is carried by its coordinate matrix on the standard
// basis, and every contraction used downstream reduces to matmul() or
// frobenius_inner().

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "treg/errors.hpp"

namespace treg {

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw ShapeError("Matrix: " + std::to_string(data_.size()) +
                       " values cannot fill a " + std::to_string(rows_) + "x" +
                       std::to_string(cols_) + " matrix");
    }
  }

  // Nested braces, one inner list per row: Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw ShapeError("Matrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols);
  }

  static Matrix identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
  }

  // Column vector (cols == 1) holding `values`.
  static Matrix column(std::vector<double> values) {
    const std::size_t n = values.size();
    return Matrix(n, 1, std::move(values));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_vector() const noexcept { return cols_ == 1; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  const std::vector<double>& values() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  std::vector<double> row(std::size_t i) const {
    return {data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_};
  }

  std::vector<double> col(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  Matrix& operator+=(const Matrix& rhs) {
    require_same_shape(rhs, "+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& rhs) {
    require_same_shape(rhs, "-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
  }

  Matrix& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
  friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
  friend Matrix operator*(Matrix m, double s) { return m *= s; }
  friend Matrix operator*(double s, Matrix m) { return m *= s; }
  friend Matrix operator-(Matrix m) { return m *= -1.0; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void require_same_shape(const Matrix& rhs, const char* op) const {
    if (!same_shape(rhs)) {
      throw ShapeError(std::string("Matrix ") + op + ": shapes " +
                       shape_string() + " and " + rhs.shape_string() +
                       " differ");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A Matrix with a single column.
using Vector = Matrix;

inline std::ostream& operator<<(std::ostream& os, const Matrix& m) {
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
    os << ']';
  }
  return os << ']';
}

// (a·b)[i][j] = Σ_k a[i][k]·b[k][j]
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: cannot multiply " + a.shape_string() + " by " +
                     b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

// Entrywise product.
inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("hadamard: shapes " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
  Matrix out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out.values()[k] *= b.values()[k];
  return out;
}

// A : B = Σ_ij A_ij B_ij
inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("frobenius_inner: shapes " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    sum += a.values()[k] * b.values()[k];
  return sum;
}

inline double frobenius_norm(const Matrix& a) {
  return std::sqrt(frobenius_inner(a, a));
}

// Coordinates of u ⊗ v: result[i][j] = u[i]·v[j].
inline Matrix outer(const Vector& u, const Vector& v) {
  if (!u.is_vector() || !v.is_vector()) {
    throw ShapeError("outer: expected column vectors, got " + u.shape_string() +
                     " and " + v.shape_string());
  }
  Matrix out(u.rows(), v.rows());
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < v.rows(); ++j) out(i, j) = u(i, 0) * v(j, 0);
  return out;
}

// Columns [first, first + count) of `a`.
inline Matrix column_block(const Matrix& a, std::size_t first,
                           std::size_t count) {
  if (first + count > a.cols()) {
    throw ShapeError("column_block: columns [" + std::to_string(first) + ", " +
                     std::to_string(first + count) + ") exceed " +
                     a.shape_string());
  }
  Matrix out(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = a(i, first + j);
  return out;
}

// [a | b]
inline Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("hstack: row counts of " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
  }
  return out;
}

// Column vector of row sums.
inline Vector row_sums(const Matrix& a) {
  Vector out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j);
    out(i, 0) = s;
  }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("max_abs_diff: shapes " + a.shape_string() + " and " +
                     b.shape_string() + " differ");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
  return worst;
}

// Pivots smaller than this fraction of their row's largest original entry
// declare the matrix singular.
inline constexpr double kSingularPivotRatio = 1e-12;

// PA = LU with partial pivoting. `lu` stores L (unit diagonal, below) and U
// (on and above the diagonal); row i of `lu` came from row perm[i] of A.
struct LuFactorization {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

inline LuFactorization lu_factor(const Matrix& a) {
  if (!a.is_square()) {
    throw ShapeError("lu_factor: matrix " + a.shape_string() +
                     " is not square");
  }
  const std::size_t n = a.rows();
  LuFactorization f{a, std::vector<std::size_t>(n), 1, false};
  std::vector<double> scale(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    f.perm[i] = i;
    for (std::size_t j = 0; j < n; ++j)
      scale[i] = std::max(scale[i], std::abs(a(i, j)));
  }
  Matrix& lu = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > std::abs(lu(p, k))) p = i;
    const double pivot = std::abs(lu(p, k));
    if (scale[p] == 0.0 || pivot <= kSingularPivotRatio * scale[p]) {
      f.singular = true;
      return f;
    }
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(p, j), lu(k, j));
      std::swap(f.perm[p], f.perm[k]);
      std::swap(scale[p], scale[k]);
      f.sign = -f.sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / lu(k, k);
      lu(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= factor * lu(k, j);
    }
  }
  return f;
}

// Zero when the LU kernel flags the matrix as singular.
inline double determinant(const Matrix& a) {
  const LuFactorization f = lu_factor(a);
  if (f.singular) return 0.0;
  double det = f.sign;
  for (std::size_t i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
  return det;
}

inline Matrix inverse(const Matrix& a) {
  const LuFactorization f = lu_factor(a);
  if (f.singular) {
    throw SingularityError("inverse: matrix " + a.shape_string() +
                           " is singular to working precision");
  }
  const std::size_t n = a.rows();
  Matrix inv(n, n);
  std::vector<double> x(n);
  for (std::size_t c = 0; c < n; ++c) {
    // Forward substitution with the permuted unit vector e_c.
    for (std::size_t i = 0; i < n; ++i) {
      double s = f.perm[i] == c ? 1.0 : 0.0;
      for (std::size_t j = 0; j < i; ++j) s -= f.lu(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[j];
      x[i] = s / f.lu(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) inv(i, c) = x[i];
  }
  return inv;
}

}  // namespace treg
