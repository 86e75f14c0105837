#pragma once

// Z-score normalization and seeded train/validation splitting of
// row-per-sample data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treg/errors.hpp"
#include "treg/matrix.hpp"
#include "treg/rng.hpp"

namespace treg::io {

// Per-column mean and population standard deviation.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t columns() const { return mean.size(); }
};

struct Normalized {
  Matrix data;
  NormalizationStats stats;
};

// Columns whose spread is below this fraction of max(1, |mean|) count as
// constant and cannot be normalized.
inline constexpr double kConstantColumnRatio = 1e-12;

inline NormalizationStats compute_stats(const Matrix& data,
                                        const std::vector<std::string>& names = {}) {
  if (data.rows() == 0) throw DataError("normalize: no rows");
  const double count = static_cast<double>(data.rows());
  NormalizationStats stats{std::vector<double>(data.cols()),
                           std::vector<double>(data.cols())};
  for (std::size_t c = 0; c < data.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) sum += data(r, c);
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
      const double d = data(r, c) - mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / count);
    if (!(sd > kConstantColumnRatio * std::max(1.0, std::abs(mean)))) {
      const std::string label =
          c < names.size() ? "'" + names[c] + "'" : std::to_string(c);
      throw DataError("normalize: column " + label + " is constant");
    }
    stats.mean[c] = mean;
    stats.stddev[c] = sd;
  }
  return stats;
}

inline void check_columns(const Matrix& data, const NormalizationStats& stats) {
  if (data.cols() != stats.columns() || stats.stddev.size() != stats.columns()) {
    throw ShapeError("normalization stats cover " + std::to_string(stats.columns()) +
                     " columns, data has " + std::to_string(data.cols()));
  }
}

inline Matrix apply_normalization(const Matrix& data, const NormalizationStats& stats) {
  check_columns(data, stats);
  Matrix out = data;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out(r, c) = (out(r, c) - stats.mean[c]) / stats.stddev[c];
  return out;
}

// Supplied stats are applied as-is; otherwise they are computed from `data`.
inline Normalized normalize(const Matrix& data,
                            const std::optional<NormalizationStats>& stats = std::nullopt,
                            const std::vector<std::string>& names = {}) {
  NormalizationStats s = stats ? *stats : compute_stats(data, names);
  Matrix out = apply_normalization(data, s);
  return {std::move(out), std::move(s)};
}

inline Matrix denormalize(const Matrix& data, const NormalizationStats& stats) {
  check_columns(data, stats);
  Matrix out = data;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out(r, c) = out(r, c) * stats.stddev[c] + stats.mean[c];
  return out;
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded Fisher-Yates shuffle, then the first round(fraction·total) shuffled
// rows (clamped so both sides keep at least one row) form the validation set.
inline SplitIndices split(std::size_t total, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("split: validation fraction must lie in (0, 1)");
  }
  if (total < 2) {
    throw DataError("split: need at least 2 rows for a train/validation split, got " +
                    std::to_string(total));
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed);
  for (std::size_t i = total - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  auto s = static_cast<std::size_t>(std::llround(val_fraction * double(total)));
  s = std::clamp<std::size_t>(s, 1, total - 1);
  return {std::vector<std::size_t>(order.begin() + s, order.end()),
          std::vector<std::size_t>(order.begin(), order.begin() + s)};
}

inline Matrix select_rows(const Matrix& data, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), data.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= data.rows()) throw ShapeError("select_rows: index out of range");
    for (std::size_t c = 0; c < data.cols(); ++c) out(r, c) = data(rows[r], c);
  }
  return out;
}

}  // namespace treg::io
