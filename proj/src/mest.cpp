#include "ijcomb/mest.hpp"

#include <cmath>

#include "ijcomb/error.hpp"

namespace ijcomb {

namespace {

Eigen::Map<const Vector> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

}  // namespace

// ---- linear ---------------------------------------------------------------

double LinearObjective::predict(const Vector& theta, std::span<const double> x) const {
  return theta[0] + theta.tail(d_).dot(as_vector(x));
}

Vector LinearObjective::predict_grad(const Vector&, std::span<const double> x) const {
  Vector g(d_ + 1);
  g[0] = 1.0;
  g.tail(d_) = as_vector(x);
  return g;
}

double LinearObjective::value(const Vector& theta, std::span<const double> x, double y) const {
  const double r = y - predict(theta, x);
  return -r * r;
}

Vector LinearObjective::score(const Vector& theta, std::span<const double> x, double y) const {
  return 2.0 * (y - predict(theta, x)) * predict_grad(theta, x);
}

Matrix LinearObjective::hess(const Vector& theta, std::span<const double> x, double) const {
  const Vector g = predict_grad(theta, x);
  return -2.0 * g * g.transpose();
}

// ---- network --------------------------------------------------------------

namespace {

struct Act {
  double value, d1, d2;
};

Act activate(Activation a, double z) {
  if (a == Activation::relu) return {z > 0.0 ? z : 0.0, z > 0.0 ? 1.0 : 0.0, 0.0};
  const double s = 1.0 / (1.0 + std::exp(-z));
  const double d1 = s * (1.0 - s);
  return {s, d1, d1 * (1.0 - 2.0 * s)};
}

}  // namespace

NetworkObjective::NetworkObjective(Eigen::Index covariates, int hidden_units,
                                   Activation activation)
    : d_(covariates), hidden_(hidden_units), activation_(activation) {
  if (covariates < 1 || hidden_units < 1)
    throw Error(ErrorKind::config, "network needs at least one input and one hidden unit");
}

double NetworkObjective::predict(const Vector& theta, std::span<const double> x) const {
  const auto xv = as_vector(x);
  const Eigen::Index block = d_ + 2;
  double out = theta[dim() - 1];
  for (Eigen::Index j = 0; j < hidden_; ++j) {
    const Eigen::Index off = j * block;
    const double z = theta.segment(off, d_).dot(xv) + theta[off + d_];
    out += theta[off + d_ + 1] * activate(activation_, z).value;
  }
  return out;
}

Vector NetworkObjective::predict_grad(const Vector& theta, std::span<const double> x) const {
  const auto xv = as_vector(x);
  const Eigen::Index block = d_ + 2;
  Vector g(dim());
  for (Eigen::Index j = 0; j < hidden_; ++j) {
    const Eigen::Index off = j * block;
    const double z = theta.segment(off, d_).dot(xv) + theta[off + d_];
    const Act act = activate(activation_, z);
    const double a = theta[off + d_ + 1];
    g.segment(off, d_) = (a * act.d1) * xv;
    g[off + d_] = a * act.d1;
    g[off + d_ + 1] = act.value;
  }
  g[dim() - 1] = 1.0;
  return g;
}

double NetworkObjective::value(const Vector& theta, std::span<const double> x, double y) const {
  const double r = y - predict(theta, x);
  return -r * r;
}

Vector NetworkObjective::score(const Vector& theta, std::span<const double> x, double y) const {
  return 2.0 * (y - predict(theta, x)) * predict_grad(theta, x);
}

Matrix NetworkObjective::hess(const Vector& theta, std::span<const double> x, double y) const {
  // hess m = 2 r hess(NN) - 2 grad(NN) grad(NN)^T; hess(NN) is block
  // diagonal over hidden units.
  const auto xv = as_vector(x);
  const Vector g = predict_grad(theta, x);
  const double r = y - predict(theta, x);
  Matrix H = -2.0 * g * g.transpose();
  const Eigen::Index block = d_ + 2;
  for (Eigen::Index j = 0; j < hidden_; ++j) {
    const Eigen::Index off = j * block;
    const double z = theta.segment(off, d_).dot(xv) + theta[off + d_];
    const Act act = activate(activation_, z);
    const double a = theta[off + d_ + 1];
    const double c2 = 2.0 * r * a * act.d2;
    const double c1 = 2.0 * r * act.d1;
    const Eigen::Index bias = off + d_, out = off + d_ + 1;
    H.block(off, off, d_, d_) += c2 * xv * xv.transpose();
    H.block(off, bias, d_, 1) += c2 * xv;
    H.block(bias, off, 1, d_) += c2 * xv.transpose();
    H(bias, bias) += c2;
    H.block(off, out, d_, 1) += c1 * xv;
    H.block(out, off, 1, d_) += c1 * xv.transpose();
    H(bias, out) += c1;
    H(out, bias) += c1;
  }
  return H;
}

double NetworkObjective::loss_and_gradient(const Vector& theta, const Dataset& data,
                                           Vector& grad) const {
  const Eigen::Index n = data.size();
  const Eigen::Index block = d_ + 2;
  Matrix W(hidden_, d_);
  Vector c(hidden_), a(hidden_);
  for (Eigen::Index j = 0; j < hidden_; ++j) {
    W.row(j) = theta.segment(j * block, d_).transpose();
    c[j] = theta[j * block + d_];
    a[j] = theta[j * block + d_ + 1];
  }
  const Matrix Z = (data.X * W.transpose()).rowwise() + c.transpose();
  Matrix S(n, hidden_), D1(n, hidden_);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < hidden_; ++j) {
      const Act act = activate(activation_, Z(i, j));
      S(i, j) = act.value;
      D1(i, j) = act.d1;
    }
  const Vector r = data.y - ((S * a).array() + theta[dim() - 1]).matrix();
  const double scale = -2.0 / static_cast<double>(n);
  const Matrix delta = (D1.array().rowwise() * a.transpose().array()).colwise() * r.array();
  const Matrix gW = scale * delta.transpose() * data.X;
  const Vector gc = scale * delta.colwise().sum().transpose();
  const Vector ga = scale * S.transpose() * r;
  grad.resize(dim());
  for (Eigen::Index j = 0; j < hidden_; ++j) {
    grad.segment(j * block, d_) = gW.row(j).transpose();
    grad[j * block + d_] = gc[j];
    grad[j * block + d_ + 1] = ga[j];
  }
  grad[dim() - 1] = scale * r.sum();
  return r.squaredNorm() / static_cast<double>(n);
}

// ---- fitting --------------------------------------------------------------

Vector FittedMEstimator::predict(const RowMatrix& Q) const {
  Vector out(Q.rows());
  for (Eigen::Index j = 0; j < Q.rows(); ++j) out[j] = objective->predict(theta, row_span(Q, j));
  return out;
}

FittedMEstimator assemble_mestimator(std::shared_ptr<const MObjective> objective,
                                     const Dataset& data, Vector theta,
                                     bool ridge_if_ill_conditioned) {
  validate(data);
  const Eigen::Index n = data.size();
  const Eigen::Index p = objective->dim();
  if (theta.size() != p) throw Error(ErrorKind::dimension, "parameter length mismatch");

  FittedMEstimator fit;
  fit.scores.resize(n, p);
  fit.hessian_mean = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = row_span(data.X, i);
    fit.scores.row(i) = objective->score(theta, x, data.y[i]).transpose();
    fit.hessian_mean += objective->hess(theta, x, data.y[i]);
  }
  fit.hessian_mean /= static_cast<double>(n);
  fit.hessian_mean = 0.5 * (fit.hessian_mean + fit.hessian_mean.transpose());

  const Vector sv = Eigen::JacobiSVD<Matrix>(fit.hessian_mean).singularValues();
  fit.condition_number = sv[p - 1] > 0.0 ? sv[0] / sv[p - 1]
                                         : std::numeric_limits<double>::infinity();
  Matrix factored = fit.hessian_mean;
  if (ridge_if_ill_conditioned && fit.condition_number > kRidgeConditionLimit) {
    // m is a negated loss, so its Hessian is negative definite at a maximum;
    // the ridge is applied on the loss scale.
    factored -= kRidge * Matrix::Identity(p, p);
    fit.regularized = true;
  }
  fit.factor.compute(factored);
  fit.non_smooth = !objective->smooth();
  fit.theta = std::move(theta);
  fit.objective = std::move(objective);
  return fit;
}

FittedMEstimator fit_linear(const Dataset& data) {
  validate(data);
  const Eigen::Index n = data.size(), d = data.dim();
  Matrix design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = data.X;
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < d + 1)
    throw Error(ErrorKind::singular_design,
                "design matrix with intercept has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(d + 1));
  Vector theta = qr.solve(data.y);
  return assemble_mestimator(std::make_shared<LinearObjective>(d), data, std::move(theta), false);
}

Vector initial_network_weights(const NetworkObjective& net, SeedSpec seed) {
  Engine engine = make_engine(seed);
  const Eigen::Index d = net.covariates();
  const int h = net.hidden_units();
  std::uniform_real_distribution<double> hidden_dist(-1.0, 1.0);
  const double hidden_limit = std::sqrt(6.0 / static_cast<double>(d + h));
  const double out_limit = std::sqrt(6.0 / static_cast<double>(h + 1));
  Vector theta = Vector::Zero(net.dim());
  for (int j = 0; j < h; ++j)
    for (Eigen::Index k = 0; k < d; ++k) theta[j * (d + 2) + k] = hidden_limit * hidden_dist(engine);
  for (int j = 0; j < h; ++j) theta[j * (d + 2) + d + 1] = out_limit * hidden_dist(engine);
  return theta;
}

FittedMEstimator fit_network(const Dataset& data, const NetConfig& cfg, SeedSpec seed) {
  validate(data);
  if (cfg.epochs < 1 || !(cfg.learning_rate > 0.0))
    throw Error(ErrorKind::config, "network needs epochs >= 1 and a positive learning rate");
  if (data.size() < cfg.hidden_units)
    throw Error(ErrorKind::empty_data, "fewer rows than hidden units");
  auto net = std::make_shared<NetworkObjective>(data.dim(), cfg.hidden_units, cfg.activation);
  Vector theta =
      initial_network_weights(*net, cfg.init == NetConfig::Init::fixed ? cfg.fixed_init_seed : seed);

  const Eigen::Index p = net->dim();
  Vector m1 = Vector::Zero(p), m2 = Vector::Zero(p), grad(p);
  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = net->loss_and_gradient(theta, data, grad);
    if (!std::isfinite(loss) || !grad.allFinite())
      throw Error(ErrorKind::divergence,
                  "network loss became non-finite at epoch " + std::to_string(epoch));
    m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
    m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseAbs2();
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    const double step = cfg.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    theta.array() -= step * m1.array() / (m2.array().sqrt() + cfg.epsilon);
  }
  return assemble_mestimator(std::move(net), data, std::move(theta), true);
}

Matrix mest_derivatives(const FittedMEstimator& model, const QuerySet& queries) {
  if (!model.objective) throw Error(ErrorKind::estimation, "model has no objective");
  if (!model.factor.isInvertible())
    throw Error(ErrorKind::estimation, "mean Hessian is singular after regularization");
  const Eigen::Index m = queries.size();
  Matrix U(model.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Vector g = model.objective->predict_grad(model.theta, row_span(queries.Q, j));
    const Vector w = model.factor.solve(g);
    U.col(j) = -(model.scores * w);
  }
  return U;
}

Matrix mest_cov(const FittedMEstimator& model, const QuerySet& queries) {
  const Matrix U = mest_derivatives(model, queries);
  const auto n = static_cast<double>(U.rows());
  return (U.transpose() * U) / (n * n);
}

}  // namespace ijcomb
