#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pips/core.hpp"
#include "pips/error.hpp"

namespace pips {

struct SymmetricEigen {
  Vector values;          ///< descending
  Eigen::MatrixXd vectors;  ///< column i pairs with values(i)
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps rotate away every off-diagonal entry until their total squared
/// magnitude is below 1e-30 of the matrix's squared Frobenius norm.
inline SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, int max_sweeps = 100) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw InvalidArgument("jacobi_eigen: matrix must be square");
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = std::max(a.squaredNorm(), 1e-300);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-30 * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{Vector(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

struct PcaModel {
  Eigen::RowVectorXd mean;
  Matrix components;  ///< r x m, orthonormal rows
  Vector explained_variance;
  Vector explained_ratio;
};

/// Top-r principal axes of the sample covariance (divisor n - 1).
/// Each component's largest-magnitude entry is made positive.
inline PcaModel pca_fit(const Matrix& features, int n_components) {
  const Eigen::Index n = features.rows(), m = features.cols();
  if (n < 2) throw InvalidArgument("pca needs at least 2 rows");
  if (n_components < 1 || n_components > std::min<Eigen::Index>(n - 1, m)) {
    throw InvalidArgument("pca: n_components = " + std::to_string(n_components) + " out of range [1, " +
                          std::to_string(std::min<Eigen::Index>(n - 1, m)) + "]");
  }
  PcaModel model;
  model.mean = features.colwise().mean();
  Matrix centred = features;
  centred.rowwise() -= model.mean;
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  const SymmetricEigen eig = jacobi_eigen(cov);

  const double total = std::max(eig.values.sum(), 0.0);
  model.components.resize(n_components, m);
  model.explained_variance.resize(n_components);
  model.explained_ratio.resize(n_components);
  for (int i = 0; i < n_components; ++i) {
    Vector axis = eig.vectors.col(i);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    model.components.row(i) = axis.transpose();
    const double var = std::max(eig.values(i), 0.0);
    model.explained_variance(i) = var;
    model.explained_ratio(i) = total > 0.0 ? var / total : 0.0;
  }
  return model;
}

inline Matrix pca_transform(const PcaModel& model, const Matrix& features) {
  if (features.cols() != model.mean.size()) {
    throw InvalidArgument("pca: width mismatch, expected " + std::to_string(model.mean.size()) + " columns, got " +
                          std::to_string(features.cols()));
  }
  Matrix centred = features;
  centred.rowwise() -= model.mean;
  return centred * model.components.transpose();
}

}  // namespace pips
