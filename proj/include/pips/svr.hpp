#pragma once

#include <cmath>
#include <memory>

#include "pips/model.hpp"

namespace pips {

/// Linear support vector regression, one model per output.
///
/// Minimises lambda/2 |w|^2 + mean(max(0, |y - w.x - b| - epsilon)) with
/// lambda = 1 / (C n) by stochastic subgradient descent, visiting samples in
/// training order every epoch with step learning_rate / sqrt(1 + epoch).
/// Features are standardised with training statistics and the bias starts
/// at the target mean.
class SvrRegressor final : public Regressor {
 public:
  SvrRegressor(double epsilon = 0.1, double reg_c = 1.0, int epochs = 50, double learning_rate = 0.01)
      : epsilon_(epsilon), reg_c_(reg_c), epochs_(epochs), learning_rate_(learning_rate) {
    if (!(epsilon >= 0.0)) throw InvalidArgument("svr: epsilon must be >= 0");
    if (!(reg_c > 0.0)) throw InvalidArgument("svr: C must be > 0");
    if (epochs < 0) throw InvalidArgument("svr: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw InvalidArgument("svr: learning rate must be > 0");
  }

  std::unique_ptr<Regressor> clone() const override {
    return std::make_unique<SvrRegressor>(epsilon_, reg_c_, epochs_, learning_rate_);
  }
  std::string kind() const override { return "svr"; }

  /// Weights in standardised feature space, one column per output.
  const Eigen::MatrixXd& weights() const noexcept { return w_; }
  const Eigen::RowVectorXd& bias() const noexcept { return b_; }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    scaler_ = Standardizer::fit(x);
    const Matrix xs = scaler_.transform(x);
    const Eigen::Index n = xs.rows(), m = xs.cols();
    const double lambda = 1.0 / (reg_c_ * static_cast<double>(n));
    w_ = Eigen::MatrixXd::Zero(m, y.cols());
    b_ = y.colwise().mean();
    for (Eigen::Index o = 0; o < y.cols(); ++o) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
      double b = b_(o);
      for (int epoch = 0; epoch < epochs_; ++epoch) {
        const double eta = learning_rate_ / std::sqrt(1.0 + epoch);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double r = y(i, o) - (xs.row(i).dot(w) + b);
          w *= (1.0 - eta * lambda);
          if (std::abs(r) > epsilon_) {
            const double s = r > 0.0 ? 1.0 : -1.0;
            w += (eta * s) * xs.row(i).transpose();
            b += eta * s;
          }
        }
      }
      w_.col(o) = w;
      b_(o) = b;
    }
  }

  Matrix do_predict(const Matrix& x) const override {
    Matrix out = scaler_.transform(x) * w_;
    out.rowwise() += b_;
    return out;
  }

 private:
  double epsilon_, reg_c_;
  int epochs_;
  double learning_rate_;
  Standardizer scaler_;
  Eigen::MatrixXd w_;
  Eigen::RowVectorXd b_;
};

}  // namespace pips
