#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "pips/core.hpp"
#include "pips/error.hpp"

namespace pips {

/// Uniform multi-output fit/predict contract shared by base and ensemble estimators.
///
/// fit() times the training call and records n_features / n_outputs;
/// predict() checks the query width and returns one row per query.
/// Fitted models are immutable and safe to predict from concurrently.
class Regressor {
 public:
  virtual ~Regressor() = default;

  void fit(const Matrix& x, const Matrix& y) {
    if (x.rows() == 0) throw InvalidArgument(kind() + ": empty training set");
    if (x.rows() != y.rows()) throw InvalidArgument(kind() + ": feature/label row mismatch");
    if (y.cols() < 1) throw InvalidArgument(kind() + ": labels need at least one column");
    const auto start = std::chrono::steady_clock::now();
    do_fit(x, y);
    fit_time_s_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    n_features_ = x.cols();
    n_outputs_ = y.cols();
    fitted_ = true;
  }

  void fit(const Dataset& train) { fit(train.features(), train.labels()); }

  Matrix predict(const Matrix& x) const {
    if (!fitted_) throw NotFitted();
    if (x.rows() == 0) throw InvalidArgument(kind() + ": empty query");
    if (x.cols() != n_features_) {
      throw InvalidArgument(kind() + ": query has " + std::to_string(x.cols()) + " features, model expects " +
                            std::to_string(n_features_));
    }
    return do_predict(x);
  }

  /// Unfitted copy carrying the same hyper-parameters and seed.
  virtual std::unique_ptr<Regressor> clone() const = 0;
  virtual std::string kind() const = 0;
  /// Reseed stochastic estimators; deterministic ones ignore it.
  virtual void set_seed(std::uint64_t) {}

  bool fitted() const noexcept { return fitted_; }
  double fit_time_s() const noexcept { return fit_time_s_; }
  Eigen::Index n_features() const noexcept { return n_features_; }
  Eigen::Index n_outputs() const noexcept { return n_outputs_; }

 protected:
  virtual void do_fit(const Matrix& x, const Matrix& y) = 0;
  virtual Matrix do_predict(const Matrix& x) const = 0;

  /// For estimators whose state is installed by hand (test hooks).
  void mark_fitted(Eigen::Index n_features, Eigen::Index n_outputs) {
    n_features_ = n_features;
    n_outputs_ = n_outputs;
    fitted_ = true;
  }

 private:
  bool fitted_ = false;
  double fit_time_s_ = 0.0;
  Eigen::Index n_features_ = 0;
  Eigen::Index n_outputs_ = 0;
};

using RegressorPtr = std::unique_ptr<Regressor>;

/// Column mean and standard deviation with zero deviations replaced by one.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean(j)).square().mean();
      s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  Matrix transform(const Matrix& x) const {
    Matrix out = x;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out.row(i) = (out.row(i) - mean).cwiseQuotient(scale);
    }
    return out;
  }
};

/// (x, y) with rows sorted lexicographically by features, then labels. Fitting
/// on this order keeps rounding independent of the caller's row order.
inline std::pair<Matrix, Matrix> canonical_rows(const Matrix& x, const Matrix& y) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      if (y(a, j) != y(b, j)) return y(a, j) < y(b, j);
    }
    return false;
  });
  std::pair<Matrix, Matrix> out{Matrix(x.rows(), x.cols()), Matrix(y.rows(), y.cols())};
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.first.row(static_cast<Eigen::Index>(i)) = x.row(order[i]);
    out.second.row(static_cast<Eigen::Index>(i)) = y.row(order[i]);
  }
  return out;
}

}  // namespace pips
