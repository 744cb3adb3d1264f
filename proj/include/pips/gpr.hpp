#pragma once

#include <cmath>
#include <memory>

#include <Eigen/Cholesky>

#include "pips/model.hpp"

namespace pips {

/// Gaussian process regression with a squared-exponential kernel.
///
/// Labels are centred by their training mean; each output shares one
/// Cholesky factor of K + jitter I. If the factorisation fails the jitter is
/// multiplied by 10, at most three times.
class GprRegressor final : public Regressor {
 public:
  GprRegressor(double length_scale = 1.0, double signal_variance = 1.0, double noise_jitter = 1e-8)
      : length_scale_(length_scale), signal_variance_(signal_variance), jitter_(noise_jitter) {
    if (!(length_scale > 0.0)) throw InvalidArgument("gpr: length scale must be > 0");
    if (!(signal_variance > 0.0)) throw InvalidArgument("gpr: signal variance must be > 0");
    if (!(noise_jitter > 0.0)) throw InvalidArgument("gpr: jitter must be > 0");
  }

  std::unique_ptr<Regressor> clone() const override {
    return std::make_unique<GprRegressor>(length_scale_, signal_variance_, jitter_);
  }
  std::string kind() const override { return "gpr"; }

  double kernel(const double* a, const double* b, Eigen::Index m) const {
    double d2 = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) d2 += (a[j] - b[j]) * (a[j] - b[j]);
    return signal_variance_ * std::exp(-d2 / (2.0 * length_scale_ * length_scale_));
  }

  /// Jitter that made the factorisation succeed.
  double effective_jitter() const noexcept { return used_jitter_; }

 protected:
  void do_fit(const Matrix& raw_x, const Matrix& raw_y) override {
    const auto [x, y] = canonical_rows(raw_x, raw_y);
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      k(i, i) = signal_variance_;
      for (Eigen::Index j = 0; j < i; ++j) {
        const double v = kernel(x.row(i).data(), x.row(j).data(), x.cols());
        k(i, j) = v;
        k(j, i) = v;
      }
    }
    y_mean_ = y.colwise().mean();
    Eigen::MatrixXd centred = y;
    centred.rowwise() -= y_mean_;

    double jitter = jitter_;
    for (int attempt = 0; attempt <= 3; ++attempt, jitter *= 10.0) {
      Eigen::MatrixXd kj = k;
      kj.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(kj);
      if (llt.info() == Eigen::Success) {
        alpha_ = llt.solve(centred);
        x_ = x;
        used_jitter_ = jitter;
        return;
      }
    }
    throw SingularKernel("gpr: kernel matrix is not positive definite after jitter escalation to " +
                         std::to_string(jitter / 10.0));
  }

  Matrix do_predict(const Matrix& q) const override {
    Eigen::MatrixXd ks(q.rows(), x_.rows());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      for (Eigen::Index j = 0; j < x_.rows(); ++j) ks(i, j) = kernel(q.row(i).data(), x_.row(j).data(), q.cols());
    }
    Matrix out = ks * alpha_;
    out.rowwise() += y_mean_;
    return out;
  }

 private:
  double length_scale_, signal_variance_, jitter_;
  double used_jitter_ = 0.0;
  Matrix x_;
  Eigen::MatrixXd alpha_;
  Eigen::RowVectorXd y_mean_;
};

}  // namespace pips
