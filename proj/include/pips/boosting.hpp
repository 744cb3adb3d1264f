#pragma once

// Least-squares gradient boosting of regression trees, one independent
// additive model per output. The histogram variant bins every feature into
// at most max_bins quantile bins first and grows trees on the bin codes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "pips/cart.hpp"
#include "pips/model.hpp"

namespace pips {

/// Per-feature quantile binning. A value maps to the number of edges strictly below it.
class QuantileBinner {
 public:
  QuantileBinner() = default;

  void fit(const Matrix& x, int max_bins) {
    if (max_bins < 2 || max_bins > 256) throw InvalidArgument("max_bins must lie in [2, 256]");
    edges_.assign(static_cast<std::size_t>(x.cols()), {});
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      std::vector<double> sorted(x.col(f).begin(), x.col(f).end());
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> distinct = sorted;
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      auto& edges = edges_[static_cast<std::size_t>(f)];
      if (static_cast<int>(distinct.size()) <= max_bins) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
          double mid = 0.5 * (distinct[i] + distinct[i + 1]);
          if (mid >= distinct[i + 1]) mid = distinct[i];
          edges.push_back(mid);
        }
      } else {
        const auto n = static_cast<double>(sorted.size());
        for (int q = 1; q < max_bins; ++q) {
          const double pos = (n - 1.0) * q / max_bins;
          const auto lo = static_cast<std::size_t>(std::floor(pos));
          const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
          edges.push_back(sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
        }
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
      }
    }
  }

  double code(Eigen::Index feature, double value) const {
    const auto& e = edges_[static_cast<std::size_t>(feature)];
    return static_cast<double>(std::lower_bound(e.begin(), e.end(), value) - e.begin());
  }

  Matrix transform(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index f = 0; f < x.cols(); ++f) out(i, f) = code(f, x(i, f));
    }
    return out;
  }

  const std::vector<double>& edges(std::size_t feature) const { return edges_.at(feature); }
  std::size_t bin_count(std::size_t feature) const { return edges_.at(feature).size() + 1; }

 private:
  std::vector<std::vector<double>> edges_;
};

struct BoostingOptions {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  /// 0 for exact thresholds (GBR), otherwise histogram boosting (HGBR).
  int max_bins = 0;
  std::uint64_t seed = 0;
};

class GradientBoosting final : public Regressor {
 public:
  explicit GradientBoosting(BoostingOptions options = {}) : options_(options) {
    if (options.n_estimators < 0) throw InvalidArgument("gbr: n_estimators must be >= 0");
    if (!(options.learning_rate > 0.0 && options.learning_rate <= 1.0)) {
      throw InvalidArgument("gbr: learning rate must lie in (0, 1]");
    }
    if (options.max_bins != 0 && (options.max_bins < 2 || options.max_bins > 256)) {
      throw InvalidArgument("hgbr: max_bins must lie in [2, 256]");
    }
  }

  std::unique_ptr<Regressor> clone() const override { return std::make_unique<GradientBoosting>(options_); }
  std::string kind() const override { return options_.max_bins > 0 ? "hgbr" : "gbr"; }
  void set_seed(std::uint64_t seed) override { options_.seed = seed; }

  const QuantileBinner& binner() const noexcept { return binner_; }
  /// Training RMSE (Euclidean over outputs) after 0, 1, ..., T stages.
  const std::vector<double>& training_rmse_history() const noexcept { return history_; }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    const Matrix* features = &x;
    Matrix binned;
    if (options_.max_bins > 0) {
      binner_.fit(x, options_.max_bins);
      binned = binner_.transform(x);
      features = &binned;
    }
    const Eigen::Index n = x.rows();
    initial_ = y.colwise().mean();
    Matrix current(n, y.cols());
    current.rowwise() = initial_;
    trees_.assign(static_cast<std::size_t>(y.cols()), {});
    history_.clear();
    history_.push_back(rmse_of(current, y));

    const PresortedColumns presorted = PresortedColumns::build(*features);
    TreeOptions tree_opts;
    tree_opts.max_depth = options_.max_depth;
    Matrix residual(n, 1);
    for (int stage = 0; stage < options_.n_estimators; ++stage) {
      for (Eigen::Index o = 0; o < y.cols(); ++o) {
        residual.col(0) = y.col(o) - current.col(o);
        tree_opts.seed = derive_seed(options_.seed, static_cast<std::uint64_t>(stage), static_cast<std::uint64_t>(o));
        RegressionTree tree(tree_opts);
        tree.fit(*features, residual, &presorted);
        for (Eigen::Index i = 0; i < n; ++i) {
          current(i, o) += options_.learning_rate * tree.leaf_value(features->row(i).data())[0];
        }
        trees_[static_cast<std::size_t>(o)].push_back(std::move(tree));
      }
      history_.push_back(rmse_of(current, y));
    }
  }

  Matrix do_predict(const Matrix& x) const override {
    const Matrix q = options_.max_bins > 0 ? binner_.transform(x) : x;
    Matrix out(x.rows(), initial_.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index o = 0; o < out.cols(); ++o) {
        double v = initial_(o);
        for (const auto& tree : trees_[static_cast<std::size_t>(o)]) {
          v += options_.learning_rate * tree.leaf_value(q.row(i).data())[0];
        }
        out(i, o) = v;
      }
    }
    return out;
  }

 private:
  static double rmse_of(const Matrix& pred, const Matrix& y) {
    return std::sqrt((pred - y).squaredNorm() / static_cast<double>(y.rows()));
  }

  BoostingOptions options_;
  QuantileBinner binner_;
  Eigen::RowVectorXd initial_;
  std::vector<std::vector<RegressionTree>> trees_;
  std::vector<double> history_;
};

}  // namespace pips
