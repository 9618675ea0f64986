#pragma once

#include <memory>
#include <span>

#include "ijcomb/data.hpp"

namespace ijcomb {

/// An M-estimation problem: theta-hat maximizes the sample mean of
/// m(theta, z). score and hess are the exact first and second derivatives
/// of `value` in theta; predict_grad is the gradient of `predict`.
class MObjective {
 public:
  virtual ~MObjective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vector& theta, std::span<const double> x, double y) const = 0;
  virtual Vector score(const Vector& theta, std::span<const double> x, double y) const = 0;
  virtual Matrix hess(const Vector& theta, std::span<const double> x, double y) const = 0;
  virtual double predict(const Vector& theta, std::span<const double> x) const = 0;
  virtual Vector predict_grad(const Vector& theta, std::span<const double> x) const = 0;
  virtual bool smooth() const { return true; }
};

/// m(theta, z) = -(y - [1, x]^T theta)^2; theta[0] is the intercept.
class LinearObjective final : public MObjective {
 public:
  explicit LinearObjective(Eigen::Index covariates) : d_(covariates) {}

  Eigen::Index dim() const override { return d_ + 1; }
  double value(const Vector& theta, std::span<const double> x, double y) const override;
  Vector score(const Vector& theta, std::span<const double> x, double y) const override;
  Matrix hess(const Vector& theta, std::span<const double> x, double y) const override;
  double predict(const Vector& theta, std::span<const double> x) const override;
  Vector predict_grad(const Vector& theta, std::span<const double> x) const override;

 private:
  Eigen::Index d_;
};

enum class Activation { sigmoid, relu };

/// One hidden layer, scalar output, biases in both layers:
///   NN(x) = sum_j a_j act(w_j . x + c_j) + b.
/// theta is laid out unit by unit as [w_j (d), c_j, a_j], with b last.
class NetworkObjective final : public MObjective {
 public:
  NetworkObjective(Eigen::Index covariates, int hidden_units, Activation activation);

  Eigen::Index dim() const override { return hidden_ * (d_ + 2) + 1; }
  double value(const Vector& theta, std::span<const double> x, double y) const override;
  Vector score(const Vector& theta, std::span<const double> x, double y) const override;
  Matrix hess(const Vector& theta, std::span<const double> x, double y) const override;
  double predict(const Vector& theta, std::span<const double> x) const override;
  Vector predict_grad(const Vector& theta, std::span<const double> x) const override;
  bool smooth() const override { return activation_ == Activation::sigmoid; }

  int hidden_units() const noexcept { return static_cast<int>(hidden_); }
  Eigen::Index covariates() const noexcept { return d_; }
  Activation activation() const noexcept { return activation_; }

  /// Mean squared error over the data and its gradient in theta.
  double loss_and_gradient(const Vector& theta, const Dataset& data, Vector& grad) const;

 private:
  Eigen::Index d_;
  Eigen::Index hidden_;
  Activation activation_;
};

struct FittedMEstimator {
  std::shared_ptr<const MObjective> objective;
  Vector theta;
  Matrix scores;        // n x p, score of each training row at theta
  Matrix hessian_mean;  // p x p, mean Hessian before any ridge
  Eigen::FullPivLU<Matrix> factor;  // of hessian_mean, ridged when `regularized`
  bool regularized = false;
  double condition_number = 1.0;
  bool non_smooth = false;

  Eigen::Index rows() const noexcept { return scores.rows(); }
  Vector mean_score() const { return scores.colwise().mean().transpose(); }
  Vector predict(const RowMatrix& Q) const;
};

inline constexpr double kRidgeConditionLimit = 1e5;
inline constexpr double kRidge = 1e-3;

/// Fills scores, mean Hessian and its factorization at theta. With
/// `ridge_if_ill_conditioned`, a Hessian whose condition number exceeds
/// kRidgeConditionLimit is shifted by kRidge toward definiteness.
FittedMEstimator assemble_mestimator(std::shared_ptr<const MObjective> objective,
                                     const Dataset& data, Vector theta,
                                     bool ridge_if_ill_conditioned);

/// Least squares with an intercept; throws singular_design on rank loss.
FittedMEstimator fit_linear(const Dataset& data);

struct NetConfig {
  enum class Init { fixed, random };

  int hidden_units = 5;
  Activation activation = Activation::sigmoid;
  int epochs = 1000;
  double learning_rate = 0.01;
  Init init = Init::fixed;
  SeedSpec fixed_init_seed{0x1d2c3b4aULL, 0};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Glorot-uniform weights and zero biases.
Vector initial_network_weights(const NetworkObjective& net, SeedSpec seed);

/// Full-batch Adam on the mean squared error; random init draws from `seed`.
FittedMEstimator fit_network(const Dataset& data, const NetConfig& cfg, SeedSpec seed);

/// U(i, j) = -grad eta(x_j)^T H^{-1} score_i, an n x m field.
Matrix mest_derivatives(const FittedMEstimator& model, const QuerySet& queries);

/// (1/n^2) U^T U.
Matrix mest_cov(const FittedMEstimator& model, const QuerySet& queries);

}  // namespace ijcomb
