#pragma once

// Stacked generalisation. Base estimators are cross-fitted over a seeded
// k-fold partition; their out-of-fold predictions form the meta-features
// (3 columns per base) on which the final estimator is trained. For
// inference every base is refitted on the full training set.

#include <chrono>
#include <cstdint>
#include <memory>
#include <vector>

#include "pips/model.hpp"
#include "pips/random.hpp"

namespace pips {

/// Cross-fitted base layer, shareable between stacks that differ only in the final estimator.
struct StackedBases {
  Matrix meta;                                ///< out-of-fold predictions, n x (outputs * bases)
  std::vector<int> row_fold;                  ///< fold of every training row
  std::vector<std::vector<std::size_t>> fold_train_rows;  ///< rows used to train the fold-f models
  std::vector<std::unique_ptr<Regressor>> refit;          ///< bases trained on all rows
  double fit_time_s = 0.0;

  /// Seeded partition of n rows into n_folds near-equal folds.
  static std::vector<int> assign_folds(std::size_t n, int n_folds, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x5f01d5ULL));
    const auto order = rng.permutation(n);
    std::vector<int> fold(n);
    for (std::size_t i = 0; i < n; ++i) {
      fold[order[i]] = static_cast<int>(i * static_cast<std::size_t>(n_folds) / n);
    }
    return fold;
  }

  static std::shared_ptr<StackedBases> fit(const std::vector<std::unique_ptr<Regressor>>& prototypes, const Matrix& x,
                                           const Matrix& y, int n_folds, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    if (prototypes.empty()) throw InvalidArgument("stacking: no base estimators");
    if (n_folds < 2) throw InvalidArgument("stacking: n_folds must be >= 2");
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < static_cast<std::size_t>(n_folds)) throw InvalidArgument("stacking: fewer rows than folds");

    auto out = std::make_shared<StackedBases>();
    out->row_fold = assign_folds(n, n_folds, seed);
    out->fold_train_rows.assign(static_cast<std::size_t>(n_folds), {});
    std::vector<std::vector<std::size_t>> fold_rows(static_cast<std::size_t>(n_folds));
    for (std::size_t i = 0; i < n; ++i) {
      fold_rows[static_cast<std::size_t>(out->row_fold[i])].push_back(i);
      for (int f = 0; f < n_folds; ++f) {
        if (f != out->row_fold[i]) out->fold_train_rows[static_cast<std::size_t>(f)].push_back(i);
      }
    }

    const Eigen::Index k = y.cols();
    out->meta = Matrix::Zero(x.rows(), k * static_cast<Eigen::Index>(prototypes.size()));
    for (std::size_t b = 0; b < prototypes.size(); ++b) {
      for (int f = 0; f < n_folds; ++f) {
        const auto& train_rows = out->fold_train_rows[static_cast<std::size_t>(f)];
        const auto& held_out = fold_rows[static_cast<std::size_t>(f)];
        auto model = prototypes[b]->clone();
        model->set_seed(derive_seed(seed, b + 1, static_cast<std::uint64_t>(f)));
        try {
          model->fit(gather(x, train_rows), gather(y, train_rows));
        } catch (const Error& e) {
          throw Error("stacking base " + prototypes[b]->kind() + " fold " + std::to_string(f) + ": " + e.what());
        }
        const Matrix pred = model->predict(gather(x, held_out));
        for (std::size_t r = 0; r < held_out.size(); ++r) {
          out->meta.block(static_cast<Eigen::Index>(held_out[r]), static_cast<Eigen::Index>(b) * k, 1, k) =
              pred.row(static_cast<Eigen::Index>(r));
        }
      }
      auto full = prototypes[b]->clone();
      full->set_seed(derive_seed(seed, b + 1, static_cast<std::uint64_t>(n_folds)));
      full->fit(x, y);
      out->refit.push_back(std::move(full));
    }
    out->fit_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  Matrix meta_features(const Matrix& x) const {
    const Eigen::Index k = refit.front()->n_outputs();
    Matrix out(x.rows(), k * static_cast<Eigen::Index>(refit.size()));
    for (std::size_t b = 0; b < refit.size(); ++b) {
      out.middleCols(static_cast<Eigen::Index>(b) * k, k) = refit[b]->predict(x);
    }
    return out;
  }

  static Matrix gather(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r]));
    }
    return out;
  }
};

class StackingRegressor final : public Regressor {
 public:
  StackingRegressor(std::vector<std::unique_ptr<Regressor>> bases, std::unique_ptr<Regressor> final_estimator,
                    int n_folds = 5, std::uint64_t seed = 0)
      : bases_(std::move(bases)), final_(std::move(final_estimator)), n_folds_(n_folds), seed_(seed) {
    if (bases_.empty()) throw InvalidArgument("stacking: at least one base estimator required");
    if (!final_) throw InvalidArgument("stacking: final estimator missing");
    if (n_folds < 2) throw InvalidArgument("stacking: n_folds must be >= 2");
  }

  std::unique_ptr<Regressor> clone() const override {
    std::vector<std::unique_ptr<Regressor>> bases;
    for (const auto& b : bases_) bases.push_back(b->clone());
    auto copy = std::make_unique<StackingRegressor>(std::move(bases), final_->clone(), n_folds_, seed_);
    return copy;
  }
  std::string kind() const override { return "stacking-" + final_->kind(); }
  void set_seed(std::uint64_t seed) override {
    seed_ = seed;
    shared_.reset();
  }

  /// Reuse an already cross-fitted base layer (must come from the same bases, data, folds and seed).
  void use_shared_bases(std::shared_ptr<const StackedBases> shared) { shared_ = std::move(shared); }

  const StackedBases& bases() const {
    if (!layer_) throw NotFitted();
    return *layer_;
  }
  const Regressor& final_estimator() const {
    if (!fitted_final_) throw NotFitted();
    return *fitted_final_;
  }
  std::size_t base_count() const noexcept { return bases_.size(); }
  int n_folds() const noexcept { return n_folds_; }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    if (shared_ && shared_->meta.rows() == x.rows()) {
      layer_ = shared_;
    } else {
      layer_ = StackedBases::fit(bases_, x, y, n_folds_, seed_);
    }
    fitted_final_ = final_->clone();
    fitted_final_->set_seed(derive_seed(seed_, 0xf1a1ULL));
    try {
      fitted_final_->fit(layer_->meta, y);
    } catch (const Error& e) {
      throw Error("stacking final " + final_->kind() + ": " + e.what());
    }
  }

  Matrix do_predict(const Matrix& x) const override { return fitted_final_->predict(layer_->meta_features(x)); }

 private:
  std::vector<std::unique_ptr<Regressor>> bases_;
  std::unique_ptr<Regressor> final_;
  int n_folds_;
  std::uint64_t seed_;
  std::shared_ptr<const StackedBases> shared_;
  std::shared_ptr<const StackedBases> layer_;
  std::unique_ptr<Regressor> fitted_final_;
};

}  // namespace pips
