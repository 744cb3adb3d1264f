#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "support.hpp"

using namespace pips;

namespace {

Eigen::MatrixXd sample_covariance(const Matrix& x) {
  Matrix c = x.rowwise() - x.colwise().mean();
  return c.transpose() * c / static_cast<double>(x.rows() - 1);
}

}  // namespace

TEST(Jacobi, MatchesDenseSolverOnRandomSymmetricMatrices) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + rng.index(7));
    const Matrix b = test::random_matrix(rng, n, n);
    const Eigen::MatrixXd a = b + b.transpose();
    const auto ours = jacobi_eigen(a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
    for (Eigen::Index i = 0; i < n; ++i) {
      EXPECT_NEAR(ours.values(i), ref.eigenvalues()(n - 1 - i), 1e-10);
      EXPECT_LT((a * ours.vectors.col(i) - ours.values(i) * ours.vectors.col(i)).norm(), 1e-9);
    }
    EXPECT_LT((ours.vectors.transpose() * ours.vectors - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(Pca, ShapeAndOrthonormality) {
  Rng rng(2);
  const Matrix x = test::random_matrix(rng, 100, 5);
  const auto model = pca_fit(x, 3);
  EXPECT_EQ(model.components.rows(), 3);
  EXPECT_EQ(model.components.cols(), 5);
  EXPECT_LT((model.components * model.components.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-8);
  for (Eigen::Index i = 0; i + 1 < 3; ++i) EXPECT_GE(model.explained_variance(i), model.explained_variance(i + 1));
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_GE(model.explained_ratio(i), 0.0);
    EXPECT_LE(model.explained_ratio(i), 1.0);
  }
  EXPECT_LE(model.explained_ratio.sum(), 1.0 + 1e-9);
}

TEST(Pca, RankOneDataHasUnitFirstRatio) {
  Matrix x(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) {
    x(i, 0) = 0.3 * static_cast<double>(i) - 1.0;
    x(i, 1) = -2.0 * x(i, 0) + 4.0;
  }
  const auto model = pca_fit(x, 1);
  EXPECT_NEAR(model.explained_ratio(0), 1.0, 1e-9);
}

TEST(Pca, EigenpairsMatchDenseOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = test::random_matrix(rng, 6, 4, -5.0, 5.0);
    const auto model = pca_fit(x, 4);
    const Eigen::MatrixXd cov = sample_covariance(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(cov);
    for (Eigen::Index i = 0; i < 4; ++i) {
      const double lambda = ref.eigenvalues()(3 - i);
      EXPECT_NEAR(model.explained_variance(i), std::max(lambda, 0.0), 1e-8);
      Vector v = ref.eigenvectors().col(3 - i);
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0.0) v = -v;
      // A near-zero eigenvalue leaves the axis ill-determined.
      if (lambda > 1e-6) {
        EXPECT_LT((model.components.row(i).transpose() - v).norm(), 1e-8);
      }
    }
  }
}

TEST(Pca, TransformIdentities) {
  Rng rng(4);
  const Matrix x = test::random_matrix(rng, 80, 4, -70.0, -40.0);
  const auto model = pca_fit(x, 4);
  const Matrix scores = pca_transform(model, x);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const double mean = scores.col(j).mean();
    const double var = (scores.col(j).array() - mean).square().sum() / 79.0;
    EXPECT_NEAR(var, model.explained_variance(j), 1e-8);
  }
  EXPECT_LT(pca_transform(model, model.mean).norm(), 1e-10);
  Matrix back = scores * model.components;
  back.rowwise() += model.mean;
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Pca, Errors) {
  Rng rng(5);
  const Matrix x = test::random_matrix(rng, 4, 5);
  EXPECT_THROW(pca_fit(x, 0), InvalidArgument);
  EXPECT_THROW(pca_fit(x, 4), InvalidArgument);
  EXPECT_NO_THROW(pca_fit(x, 3));
  EXPECT_THROW(pca_fit(x.topRows(1), 1), InvalidArgument);
  const auto model = pca_fit(x, 2);
  EXPECT_THROW(pca_transform(model, Matrix::Zero(2, 4)), InvalidArgument);
}

TEST(Pca, PositionsSeparateOnFirstComponent) {
  const auto setup = make_paper_scenario(5);
  const Dataset d = generate_dataset(setup.scenario, setup.sensor, setup.positions);
  const auto model = pca_fit(d.features(), 3);
  const Matrix scores = pca_transform(model, d.features());
  const auto per = static_cast<Eigen::Index>(setup.sensor.samples_per_position);
  const double grand = scores.col(0).mean();
  double between = 0.0, within = 0.0;
  for (std::size_t p = 0; p < setup.positions.size(); ++p) {
    const auto block = scores.col(0).segment(static_cast<Eigen::Index>(p) * per, per);
    const double mean = block.mean();
    between += static_cast<double>(per) * (mean - grand) * (mean - grand);
    within += (block.array() - mean).square().sum();
  }
  EXPECT_GT(between, within);
}
