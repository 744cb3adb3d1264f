#pragma once

#include <cmath>
#include <cstdint>
#include <memory>

#include "pips/model.hpp"
#include "pips/random.hpp"

namespace pips {

/// Weights of a one-hidden-layer network: hidden = relu(W1 x + b1), out = W2 hidden + b2.
struct MlpParams {
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // outputs x hidden
  Eigen::VectorXd b2;

  Eigen::Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd v(size());
    v << w1.reshaped(), b1, w2.reshaped(), b2;
    return v;
  }

  void assign(const Eigen::VectorXd& v) {
    Eigen::Index at = 0;
    auto take = [&](auto& block) {
      block.reshaped() = v.segment(at, block.size());
      at += block.size();
    };
    take(w1);
    take(b1);
    take(w2);
    take(b2);
  }
};

/// Mean squared error over every (sample, output) entry, with its gradient.
inline double mlp_loss(const MlpParams& p, const Matrix& x, const Matrix& y, MlpParams* grad) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd pre = (x * p.w1.transpose()).rowwise() + p.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Eigen::MatrixXd out = (hidden * p.w2.transpose()).rowwise() + p.b2.transpose();
  const Eigen::MatrixXd diff = out - y;
  const double denom = static_cast<double>(n * y.cols());
  const double loss = diff.squaredNorm() / denom;
  if (grad != nullptr) {
    const Eigen::MatrixXd d_out = (2.0 / denom) * diff;
    grad->w2 = d_out.transpose() * hidden;
    grad->b2 = d_out.colwise().sum().transpose();
    const Eigen::MatrixXd d_hidden = (d_out * p.w2).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    grad->w1 = d_hidden.transpose() * x;
    grad->b1 = d_hidden.colwise().sum().transpose();
  }
  return loss;
}

/// Multi-layer perceptron: one ReLU hidden layer, linear outputs, full-batch gradient descent
/// on mean-centred labels.
class MlpRegressor final : public Regressor {
 public:
  MlpRegressor(int hidden_units = 100, int epochs = 500, double learning_rate = 0.05, std::uint64_t seed = 0)
      : hidden_(hidden_units), epochs_(epochs), learning_rate_(learning_rate), seed_(seed) {
    if (hidden_units < 1) throw InvalidArgument("mlp: hidden_units must be >= 1");
    if (epochs < 0) throw InvalidArgument("mlp: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw InvalidArgument("mlp: learning rate must be > 0");
  }

  std::unique_ptr<Regressor> clone() const override {
    return std::make_unique<MlpRegressor>(hidden_, epochs_, learning_rate_, seed_);
  }
  std::string kind() const override { return "mlp"; }
  void set_seed(std::uint64_t seed) override { seed_ = seed; }

  /// Uniform draw in +-1/sqrt(fan_in) for every weight and bias.
  static MlpParams initial_params(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index outputs, std::uint64_t seed) {
    Rng rng(seed);
    MlpParams p{Eigen::MatrixXd(hidden, inputs), Eigen::VectorXd(hidden), Eigen::MatrixXd(outputs, hidden),
                Eigen::VectorXd(outputs)};
    const double r1 = 1.0 / std::sqrt(static_cast<double>(inputs));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (auto& v : p.w1.reshaped()) v = rng.uniform(-r1, r1);
    for (auto& v : p.b1) v = rng.uniform(-r1, r1);
    for (auto& v : p.w2.reshaped()) v = rng.uniform(-r2, r2);
    for (auto& v : p.b2) v = rng.uniform(-r2, r2);
    return p;
  }

  /// Install weights directly (inputs are still standardised with `scaler`).
  void set_parameters(MlpParams params, Standardizer scaler) {
    params_ = std::move(params);
    scaler_ = std::move(scaler);
    y_mean_ = Eigen::RowVectorXd::Zero(params_.w2.rows());
    mark_fitted(params_.w1.cols(), params_.w2.rows());
  }

  const MlpParams& parameters() const noexcept { return params_; }
  double final_loss() const noexcept { return final_loss_; }

 protected:
  void do_fit(const Matrix& x, const Matrix& y) override {
    scaler_ = Standardizer::fit(x);
    const Matrix xs = scaler_.transform(x);
    y_mean_ = y.colwise().mean();
    Matrix centred = y;
    centred.rowwise() -= y_mean_;
    // The output layer starts at zero, so the untrained net predicts the label mean.
    params_ = initial_params(x.cols(), hidden_, y.cols(), seed_);
    params_.w2.setZero();
    params_.b2.setZero();
    MlpParams grad;
    for (int epoch = 0; epoch < epochs_; ++epoch) {
      const double loss = mlp_loss(params_, xs, centred, &grad);
      if (!std::isfinite(loss)) {
        throw Divergence("mlp: loss became non-finite at epoch " + std::to_string(epoch), epoch);
      }
      params_.w1 -= learning_rate_ * grad.w1;
      params_.b1 -= learning_rate_ * grad.b1;
      params_.w2 -= learning_rate_ * grad.w2;
      params_.b2 -= learning_rate_ * grad.b2;
    }
    final_loss_ = mlp_loss(params_, xs, centred, nullptr);
    if (!std::isfinite(final_loss_)) throw Divergence("mlp: loss became non-finite at epoch " + std::to_string(epochs_), epochs_);
  }

  Matrix do_predict(const Matrix& x) const override {
    const Matrix xs = scaler_.transform(x);
    const Eigen::MatrixXd hidden = ((xs * params_.w1.transpose()).rowwise() + params_.b1.transpose()).cwiseMax(0.0);
    Matrix out = (hidden * params_.w2.transpose()).rowwise() + (params_.b2.transpose() + y_mean_);
    return out;
  }

 private:
  int hidden_, epochs_;
  double learning_rate_;
  std::uint64_t seed_;
  MlpParams params_;
  Standardizer scaler_;
  Eigen::RowVectorXd y_mean_;
  double final_loss_ = 0.0;
};

}  // namespace pips
