#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace pips;

namespace {

/// Ignores its input and predicts the training mean.
class MeanModel final : public Regressor {
 public:
  std::unique_ptr<Regressor> clone() const override { return std::make_unique<MeanModel>(); }
  std::string kind() const override { return "mean"; }

 protected:
  void do_fit(const Matrix&, const Matrix& y) override { mean_ = y.colwise().mean(); }
  Matrix do_predict(const Matrix& x) const override {
    Matrix out(x.rows(), mean_.size());
    out.rowwise() = mean_;
    return out;
  }

 private:
  Eigen::RowVectorXd mean_;
};

ImportanceReport report_of(std::vector<double> freqs, std::vector<double> scores) {
  ImportanceReport r;
  r.frequencies_mhz = std::move(freqs);
  r.scores = std::move(scores);
  return r;
}

}  // namespace

TEST(PermutationImportance, IgnoredColumnsScoreZero) {
  Rng rng(1);
  const Dataset d = test::random_dataset(rng, 50, 4);
  MeanModel model;
  model.fit(d);
  const auto r = permutation_importance(model, d.frequencies(), d, 3, 7);
  for (double s : r.scores) EXPECT_EQ(s, 0.0);
}

TEST(PermutationImportance, BaselineMatchesRmse) {
  Rng rng(2);
  const Dataset d = test::random_dataset(rng, 60, 3);
  auto model = make_model("dtr", 0);
  model->fit(d);
  const auto r = permutation_importance(*model, d.frequencies(), d, 2, 1);
  EXPECT_NEAR(r.baseline_rmse, rmse(d.labels(), model->predict(d.features())), 1e-12);
  EXPECT_EQ(r.frequencies_mhz, d.frequencies());
  EXPECT_EQ(r.scores.size(), 3u);
}

TEST(PermutationImportance, OnlyUsedColumnMatters) {
  Rng rng(3);
  Matrix x = test::random_matrix(rng, 200, 3);
  x.col(0).setConstant(-50.0);
  x.col(1).setConstant(-60.0);
  Matrix y(200, 3);
  for (Eigen::Index i = 0; i < 200; ++i) y.row(i).setConstant(4.0 * x(i, 2));
  const Dataset d = validate_dataset(x, y, test::ascending_band(3));
  auto model = make_model("dtr", 0);
  model->fit(d);
  const auto r = permutation_importance(*model, d.frequencies(), d, 5, 2);
  EXPECT_GT(r.scores[2], 1.0);
  EXPECT_EQ(r.scores[0], 0.0);
  EXPECT_EQ(r.scores[1], 0.0);
}

TEST(PermutationImportance, SameSeedSameScores) {
  Rng rng(4);
  const Dataset d = test::random_dataset(rng, 60, 4);
  auto model = make_model("knr", 0);
  model->fit(d);
  const auto a = permutation_importance(*model, d.frequencies(), d, 3, 9);
  const auto b = permutation_importance(*model, d.frequencies(), d, 3, 9);
  EXPECT_EQ(a.scores, b.scores);
}

TEST(PermutationImportance, Errors) {
  Rng rng(5);
  const Dataset d = test::random_dataset(rng, 30, 3);
  auto model = make_model("knr", 0);
  model->fit(d);
  const std::vector<double> other{1.0, 2.0, 3.0};
  EXPECT_THROW(permutation_importance(*model, other, d, 3, 1), InvalidArgument);
  EXPECT_THROW(permutation_importance(*model, d.frequencies(), d, 0, 1), InvalidArgument);
}

TEST(SelectRatedBand, TopKSortedAscending) {
  SensorConfig cfg;
  cfg.band_mhz = {90.0, 91.2, 93.6, 96.0, 99.0};
  cfg.step_mhz = 1.7;
  const auto r = report_of(cfg.band_mhz, {0.1, 0.9, 0.3, 0.8, 0.2});
  const auto next = select_rated_band(r, 3, cfg);
  EXPECT_EQ(next.band_mhz, (std::vector<double>{91.2, 93.6, 96.0}));
  EXPECT_EQ(next.reconfig_index, 1);
  EXPECT_EQ(next.step_mhz, 1.7);
  EXPECT_EQ(next.sample_rate_hz, cfg.sample_rate_hz);
}

TEST(SelectRatedBand, TiesGoToLowerFrequency) {
  SensorConfig cfg;
  cfg.band_mhz = {91.2, 93.6};
  const auto next = select_rated_band(report_of({93.6, 91.2}, {0.5, 0.5}), 1, cfg);
  EXPECT_EQ(next.band_mhz, std::vector<double>{91.2});
}

TEST(SelectRatedBand, FullSizeIsIdentity) {
  SensorConfig cfg;
  cfg.band_mhz = rated_band_mhz();
  const auto next = select_rated_band(report_of(cfg.band_mhz, {3, 1, 4, 1, 5}), 5, cfg);
  EXPECT_EQ(next.band_mhz, cfg.band_mhz);
  EXPECT_EQ(sampling_reduction(cfg, next), 0.0);
}

TEST(SelectRatedBand, FourHundredToFive) {
  SensorConfig cfg;
  cfg.band_mhz = test::ascending_band(400);
  Rng rng(6);
  std::vector<double> scores(400);
  for (auto& s : scores) s = rng.uniform();
  const auto next = select_rated_band(report_of(cfg.band_mhz, scores), 5, cfg);
  EXPECT_EQ(next.band_mhz.size(), 5u);
  EXPECT_NEAR(sampling_reduction(cfg, next), 0.9875, 1e-15);
}

TEST(SelectRatedBand, SubsetPropertyAndRangeErrors) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng.index(30);
    SensorConfig cfg;
    cfg.band_mhz = test::ascending_band(m);
    std::vector<double> scores(m);
    for (auto& s : scores) s = static_cast<double>(rng.index(4));
    const auto r = report_of(cfg.band_mhz, scores);
    const std::size_t k = 1 + rng.index(m);
    const auto next = select_rated_band(r, k, cfg);
    ASSERT_EQ(next.band_mhz.size(), k);
    EXPECT_TRUE(std::is_sorted(next.band_mhz.begin(), next.band_mhz.end()));
    for (double f : next.band_mhz) {
      EXPECT_NE(std::find(cfg.band_mhz.begin(), cfg.band_mhz.end(), f), cfg.band_mhz.end());
    }
    // Every dropped frequency scores no higher than every kept one.
    for (std::size_t j = 0; j < m; ++j) {
      const bool kept = std::find(next.band_mhz.begin(), next.band_mhz.end(), cfg.band_mhz[j]) != next.band_mhz.end();
      if (kept) continue;
      for (std::size_t i = 0; i < m; ++i) {
        if (std::find(next.band_mhz.begin(), next.band_mhz.end(), cfg.band_mhz[i]) != next.band_mhz.end()) {
          EXPECT_LE(scores[j], scores[i]);
        }
      }
    }
    EXPECT_THROW(select_rated_band(r, 0, cfg), InvalidArgument);
    EXPECT_THROW(select_rated_band(r, m + 1, cfg), InvalidArgument);
  }
}

TEST(Dddas, FullbandCycleShrinksBandAndFindsSources) {
  const auto setup = make_fullband_scenario(3, 400);
  const auto r = dddas_cycle(setup.scenario, setup.sensor, setup.positions, "dtr", 5, 3, DddasOptions{0.7, 2});
  EXPECT_EQ(r.config.band_mhz.size(), 5u);
  EXPECT_EQ(r.config.reconfig_index, 1);
  const auto top = top_frequencies(r.importance, 10);
  for (std::size_t i : setup.informative) EXPECT_NE(std::find(top.begin(), top.end(), i), top.end()) << i;
  EXPECT_LE(r.after.rmse_m, 1.25 * r.before.rmse_m);
}

TEST(Dddas, FullSizeCycleKeepsBand) {
  const auto setup = make_paper_scenario(4);
  const auto r = dddas_cycle(setup.scenario, setup.sensor, setup.positions, "dtr", 5, 4, DddasOptions{0.7, 1});
  EXPECT_EQ(r.config.band_mhz, setup.sensor.band_mhz);
  EXPECT_EQ(r.after.rmse_m, r.before.rmse_m);
  EXPECT_THROW(dddas_cycle(setup.scenario, setup.sensor, setup.positions, "dtr", 6, 4), InvalidArgument);
}
