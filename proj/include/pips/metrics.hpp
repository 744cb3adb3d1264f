#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pips/core.hpp"
#include "pips/error.hpp"

namespace pips {

namespace detail {

inline void check_shapes(const Matrix& truth, const Matrix& pred, Eigen::Index min_rows, const char* what) {
  if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(truth.rows()) + "x" +
                          std::to_string(truth.cols()) + " vs " + std::to_string(pred.rows()) + "x" +
                          std::to_string(pred.cols()) + ")");
  }
  if (truth.rows() < min_rows) {
    throw InvalidArgument(std::string(what) + ": needs at least " + std::to_string(min_rows) + " rows");
  }
}

}  // namespace detail

/// Euclidean positioning error of every row.
inline std::vector<double> position_errors(const Matrix& truth, const Matrix& pred) {
  detail::check_shapes(truth, pred, 1, "position_errors");
  std::vector<double> e(static_cast<std::size_t>(truth.rows()));
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    e[static_cast<std::size_t>(i)] = (truth.row(i) - pred.row(i)).norm();
  }
  return e;
}

/// sqrt(mean over rows of the squared Euclidean error).
inline double rmse(const Matrix& truth, const Matrix& pred) {
  detail::check_shapes(truth, pred, 1, "rmse");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
      const double d = truth(i, j) - pred(i, j);
      acc += d * d;
    }
  }
  return std::sqrt(acc / static_cast<double>(truth.rows()));
}

/// Coefficient of determination per output, averaged without weights.
inline double r2(const Matrix& truth, const Matrix& pred) {
  detail::check_shapes(truth, pred, 2, "r2");
  double total = 0.0;
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    const double mean = truth.col(j).mean();
    double ss_tot = 0.0, ss_res = 0.0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      ss_tot += (truth(i, j) - mean) * (truth(i, j) - mean);
      ss_res += (truth(i, j) - pred(i, j)) * (truth(i, j) - pred(i, j));
    }
    if (ss_tot <= 0.0) throw InvalidArgument("r2: output " + std::to_string(j) + " has zero variance");
    total += 1.0 - ss_res / ss_tot;
  }
  return total / static_cast<double>(truth.cols());
}

/// Quantile of `values` with linear interpolation between order statistics at p = q (n - 1).
inline double quantile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double p = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(p));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (p - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

/// Error below which 95% of the per-sample Euclidean errors fall.
inline double ce95(const Matrix& truth, const Matrix& pred) {
  detail::check_shapes(truth, pred, 1, "ce95");
  return quantile_linear(position_errors(truth, pred), 0.95);
}

/// One row of a results table.
struct EvalReport {
  std::string model_id;
  double rmse_m = 0.0;
  double r2 = 0.0;
  double ce95_m = 0.0;
  double fit_time_s = 0.0;
  /// Non-empty when the model failed; metrics are NaN then.
  std::string error;

  bool ok() const noexcept { return error.empty(); }
};

inline EvalReport evaluate(std::string model_id, const Matrix& truth, const Matrix& pred, double fit_time_s) {
  EvalReport r;
  r.model_id = std::move(model_id);
  r.rmse_m = rmse(truth, pred);
  r.r2 = pips::r2(truth, pred);
  r.ce95_m = ce95(truth, pred);
  r.fit_time_s = fit_time_s;
  return r;
}

}  // namespace pips
