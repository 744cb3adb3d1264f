#pragma once

// AdaBoost.R2 (Drucker, 1997) with the linear loss. Sample weights are
// shared across the three coordinates: the per-sample error is the Euclidean
// distance of the 3D prediction, while the combination is a weighted median
// taken per output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "pips/model.hpp"
#include "pips/random.hpp"

namespace pips {

/// beta = L / (1 - L) for average loss L.
inline double adaboost_beta(double average_loss) { return average_loss / (1.0 - average_loss); }

/// Combination weight ln(1 / beta) of a boosting round.
inline double adaboost_round_weight(double beta) { return std::log(1.0 / beta); }

/// Smallest value whose cumulative weight reaches half of the total.
inline double weighted_median(std::span<const double> values, std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size()) throw InvalidArgument("weighted_median: bad input");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cumulative = 0.0;
  for (std::size_t i : order) {
    cumulative += weights[i];
    if (cumulative >= 0.5 * total) return values[i];
  }
  return values[order.back()];
}

class AdaBoostR2 final : public Regressor {
 public:
  AdaBoostR2(std::unique_ptr<Regressor> base, int n_estimators = 50, std::uint64_t seed = 0)
      : base_(std::move(base)), n_estimators_(n_estimators), seed_(seed) {
    if (!base_) throw InvalidArgument("abr: base estimator missing");
    if (n_estimators < 1) throw InvalidArgument("abr: n_estimators must be >= 1");
  }

  std::unique_ptr<Regressor> clone() const override {
    return std::make_unique<AdaBoostR2>(base_->clone(), n_estimators_, seed_);
  }
  std::string kind() const override { return "abr-" + base_->kind(); }
  void set_seed(std::uint64_t seed) override { seed_ = seed; }

  std::size_t rounds() const noexcept { return members_.size(); }
  const std::vector<double>& round_weights() const noexcept { return round_weights_; }
  /// Sample-weight distribution at the start of each round, plus the final one.
  const std::vector<std::vector<double>>& weight_history() const noexcept { return weight_history_; }
  const std::vector<double>& average_losses() const noexcept { return average_losses_; }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    const auto n = static_cast<std::size_t>(x.rows());
    members_.clear();
    round_weights_.clear();
    weight_history_.clear();
    average_losses_.clear();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    weight_history_.push_back(w);

    for (int round = 0; round < n_estimators_; ++round) {
      const auto sample = weighted_resample(w, derive_seed(seed_, static_cast<std::uint64_t>(round)));
      Matrix xs(static_cast<Eigen::Index>(n), x.cols()), ys(static_cast<Eigen::Index>(n), y.cols());
      for (std::size_t i = 0; i < n; ++i) {
        xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(sample[i]));
        ys.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(sample[i]));
      }
      auto member = base_->clone();
      member->set_seed(derive_seed(seed_, static_cast<std::uint64_t>(round), 1));
      try {
        member->fit(xs, ys);
      } catch (const Error& e) {
        throw Error("abr round " + std::to_string(round) + ": " + e.what());
      }
      const Matrix pred = member->predict(x);
      std::vector<double> err(n);
      double max_err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        err[i] = (pred.row(static_cast<Eigen::Index>(i)) - y.row(static_cast<Eigen::Index>(i))).norm();
        max_err = std::max(max_err, err[i]);
      }
      double avg_loss = 0.0;
      if (max_err > 0.0) {
        for (std::size_t i = 0; i < n; ++i) avg_loss += w[i] * err[i] / max_err;
      }
      average_losses_.push_back(avg_loss);

      if (avg_loss <= 0.0) {  // perfect fit: keep it and stop
        members_.push_back(std::move(member));
        round_weights_.push_back(1.0);
        break;
      }
      if (avg_loss >= 0.5) {
        if (members_.empty()) {
          members_.push_back(std::move(member));
          round_weights_.push_back(1.0);
        }
        break;
      }
      const double beta = adaboost_beta(avg_loss);
      members_.push_back(std::move(member));
      round_weights_.push_back(adaboost_round_weight(beta));

      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= std::pow(beta, 1.0 - err[i] / max_err);
        total += w[i];
      }
      for (auto& wi : w) wi /= total;
      weight_history_.push_back(w);
    }
  }

  Matrix do_predict(const Matrix& x) const override {
    const std::size_t k = members_.size();
    std::vector<Matrix> preds;
    preds.reserve(k);
    for (const auto& m : members_) preds.push_back(m->predict(x));
    Matrix out(x.rows(), preds.front().cols());
    std::vector<double> column(k);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index o = 0; o < out.cols(); ++o) {
        for (std::size_t r = 0; r < k; ++r) column[r] = preds[r](i, o);
        out(i, o) = weighted_median(column, round_weights_);
      }
    }
    return out;
  }

 private:
  /// n draws with replacement, row i chosen with probability w[i].
  static std::vector<std::size_t> weighted_resample(const std::vector<double>& w, std::uint64_t seed) {
    std::vector<double> cdf(w.size());
    std::partial_sum(w.begin(), w.end(), cdf.begin());
    Rng rng(seed);
    std::vector<std::size_t> out(w.size());
    for (auto& idx : out) {
      const double u = rng.uniform() * cdf.back();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      idx = std::min(static_cast<std::size_t>(it - cdf.begin()), w.size() - 1);
    }
    return out;
  }

  std::unique_ptr<Regressor> base_;
  int n_estimators_;
  std::uint64_t seed_;
  std::vector<std::unique_ptr<Regressor>> members_;
  std::vector<double> round_weights_;
  std::vector<std::vector<double>> weight_history_;
  std::vector<double> average_losses_;
};

}  // namespace pips
