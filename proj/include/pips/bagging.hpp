#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pips/cart.hpp"
#include "pips/model.hpp"
#include "pips/random.hpp"

namespace pips {

/// Averaging ensemble over copies of one base estimator.
///
/// Member i trains on a bootstrap resample drawn from derive_seed(seed, i)
/// (or on the full set when bootstrap is off) and is reseeded with
/// derive_seed(seed, i, 1). Random forests and extremely randomized trees
/// are this class over randomised trees.
class BaggingRegressor final : public Regressor {
 public:
  BaggingRegressor(std::unique_ptr<Regressor> base, int n_estimators = 100, bool bootstrap = true,
                   std::uint64_t seed = 0, std::string kind = "")
      : base_(std::move(base)), n_estimators_(n_estimators), bootstrap_(bootstrap), seed_(seed), kind_(std::move(kind)) {
    if (!base_) throw InvalidArgument("bagging: base estimator missing");
    if (n_estimators < 1) throw InvalidArgument("bagging: n_estimators must be >= 1");
    if (kind_.empty()) kind_ = "bagging-" + base_->kind();
  }

  std::unique_ptr<Regressor> clone() const override {
    return std::make_unique<BaggingRegressor>(base_->clone(), n_estimators_, bootstrap_, seed_, kind_);
  }
  std::string kind() const override { return kind_; }
  void set_seed(std::uint64_t seed) override { seed_ = seed; }

  const std::vector<std::unique_ptr<Regressor>>& members() const noexcept { return members_; }
  /// Training rows seen by each member (empty when bootstrap is off).
  const std::vector<std::vector<std::size_t>>& member_samples() const noexcept { return samples_; }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    members_.clear();
    samples_.clear();
    const auto n = static_cast<std::size_t>(x.rows());
    for (int i = 0; i < n_estimators_; ++i) {
      auto member = base_->clone();
      member->set_seed(derive_seed(seed_, static_cast<std::uint64_t>(i), 1));
      try {
        if (bootstrap_) {
          Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(i)));
          auto rows = rng.bootstrap(n);
          Matrix xs(static_cast<Eigen::Index>(n), x.cols()), ys(static_cast<Eigen::Index>(n), y.cols());
          for (std::size_t r = 0; r < n; ++r) {
            xs.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
            ys.row(static_cast<Eigen::Index>(r)) = y.row(static_cast<Eigen::Index>(rows[r]));
          }
          member->fit(xs, ys);
          samples_.push_back(std::move(rows));
        } else {
          member->fit(x, y);
          samples_.emplace_back();
        }
      } catch (const Error& e) {
        throw Error(kind_ + " member " + std::to_string(i) + ": " + e.what());
      }
      members_.push_back(std::move(member));
    }
  }

  Matrix do_predict(const Matrix& x) const override {
    Matrix out = members_.front()->predict(x);
    for (std::size_t i = 1; i < members_.size(); ++i) out += members_[i]->predict(x);
    return out / static_cast<double>(members_.size());
  }

 private:
  std::unique_ptr<Regressor> base_;
  int n_estimators_;
  bool bootstrap_;
  std::uint64_t seed_;
  std::string kind_;
  std::vector<std::unique_ptr<Regressor>> members_;
  std::vector<std::vector<std::size_t>> samples_;
};

/// Random forest: bootstrap-bagged CARTs drawing max_features candidates per split (0 = all).
inline std::unique_ptr<BaggingRegressor> make_random_forest(int n_estimators = 100, int max_features = 0,
                                                            std::uint64_t seed = 0, bool bootstrap = true,
                                                            bool record_splits = false) {
  TreeOptions opts;
  opts.max_features = max_features;
  opts.record_splits = record_splits;
  return std::make_unique<BaggingRegressor>(std::make_unique<CartRegressor>(opts), n_estimators, bootstrap, seed,
                                            "rfr");
}

/// Extremely randomized trees: full sample per tree, one random threshold per candidate feature.
inline std::unique_ptr<BaggingRegressor> make_extra_trees(int n_estimators = 100, int max_features = 0,
                                                          std::uint64_t seed = 0, bool record_splits = false) {
  TreeOptions opts;
  opts.max_features = max_features;
  opts.splitter = Splitter::Random;
  opts.record_splits = record_splits;
  return std::make_unique<BaggingRegressor>(std::make_unique<CartRegressor>(opts), n_estimators, false, seed, "ert");
}

}  // namespace pips
