#include "ijcomb/kernel.hpp"

#include <cmath>

#include "ijcomb/error.hpp"

namespace ijcomb {

Vector kernel_weights(const Dataset& data, const KernelSpec& spec, std::span<const double> x) {
  if (!(spec.bandwidth > 0.0)) throw Error(ErrorKind::config, "bandwidth must be positive");
  if (static_cast<Eigen::Index>(x.size()) != data.dim())
    throw Error(ErrorKind::dimension, "query dimension does not match dataset");
  const Eigen::Map<const Eigen::RowVectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const double h2 = spec.bandwidth * spec.bandwidth;
  Vector C(data.size());
  for (Eigen::Index k = 0; k < data.size(); ++k) {
    const double dist2 = (data.X.row(k) - xv).squaredNorm();
    C[k] = spec.kernel == KernelKind::gaussian ? std::exp(-0.5 * dist2 / h2)
                                               : (dist2 <= h2 ? 1.0 : 0.0);
  }
  return C;
}

namespace {

double checked_total(const Vector& C, const char* what) {
  const double q = C.sum();
  if (!(q > 0.0)) throw Error(ErrorKind::estimation, what);
  return q;
}

}  // namespace

double nw_predict(const Dataset& data, const KernelSpec& spec, std::span<const double> x) {
  const Vector C = kernel_weights(data, spec, x);
  const double q = checked_total(C, "no training row has positive kernel weight at the query");
  return C.dot(data.y) / q;
}

Vector weighted_mean_derivatives(const Vector& C, const Vector& v) {
  const double q = checked_total(C, "weighted mean undefined: all weights are zero");
  const double p = C.dot(v);
  const auto n = static_cast<double>(C.size());
  // (r q - p s) / q^2 with r = n C_i v_i and s = n C_i.
  return (n * C.array() * (v.array() * q - p) / (q * q)).matrix();
}

Matrix nw_derivatives(const Dataset& data, const KernelSpec& spec, const QuerySet& queries) {
  validate(data);
  validate(queries, data);
  Matrix U(data.size(), queries.size());
  for (Eigen::Index j = 0; j < queries.size(); ++j)
    U.col(j) = weighted_mean_derivatives(kernel_weights(data, spec, row_span(queries.Q, j)), data.y);
  return U;
}

LocalModifier::LocalModifier(const Forest& forest, const Dataset& data, ResidualMode mode)
    : forest_(&forest) {
  validate(data);
  const Eigen::Index n = data.size(), B = forest.size();
  if (forest.inbag.rows() != n)
    throw Error(ErrorKind::dimension, "forest was not trained on this dataset");
  train_leaf_.resize(n, B);
  Matrix train_pred(n, B);
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto x = row_span(data.X, k);
      const int leaf = forest.members[b].leaf_id(x);
      train_leaf_(k, b) = leaf;
      train_pred(k, b) = forest.members[b].nodes()[leaf].value;
    }
  residuals_.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double fitted = train_pred.row(k).mean();
    if (mode == ResidualMode::out_of_bag) {
      double sum = 0.0;
      int oob = 0;
      for (Eigen::Index b = 0; b < B; ++b)
        if (forest.inbag.counts(k, b) == 0) {
          sum += train_pred(k, b);
          ++oob;
        }
      if (oob > 0) fitted = sum / oob;
    }
    residuals_[k] = data.y[k] - fitted;
  }
}

LocalWeights LocalModifier::weights(std::span<const double> x) const {
  const Forest& forest = *forest_;
  const Eigen::Index n = train_leaf_.rows(), B = train_leaf_.cols();
  LocalWeights w;
  w.C = Vector::Zero(n);
  for (Eigen::Index b = 0; b < B; ++b) {
    const int leaf = forest.members[b].leaf_id(x);
    for (Eigen::Index k = 0; k < n; ++k)
      if (forest.inbag.counts(k, b) == 0 && train_leaf_(k, b) == leaf) w.C[k] += 1.0;
  }
  const double total = w.C.sum();
  if (!(total > 0.0))
    throw Error(ErrorKind::estimation, "no out-of-bag training row shares a leaf with the query");
  w.v = w.C / total;
  return w;
}

double LocalModifier::bias(std::span<const double> x) const { return weights(x).v.dot(residuals_); }

Vector LocalModifier::bias_derivatives(std::span<const double> x) const {
  return weighted_mean_derivatives(weights(x).C, residuals_);
}

LocalWeights oob_inleaf_weights(const Forest& forest, const Dataset& data,
                                std::span<const double> x) {
  return LocalModifier(forest, data).weights(x);
}

double local_bias(const Forest& forest, const Dataset& data, std::span<const double> x,
                  ResidualMode mode) {
  return LocalModifier(forest, data, mode).bias(x);
}

Vector local_bias_derivatives(const Forest& forest, const Dataset& data,
                              std::span<const double> x, ResidualMode mode) {
  return LocalModifier(forest, data, mode).bias_derivatives(x);
}

double modified_variance(const Forest& forest, const Dataset& data, std::span<const double> x,
                         ResidualMode mode) {
  const RowMatrix q = Eigen::Map<const RowMatrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  const Vector forest_u = raw_ij_derivatives(forest.inbag, forest.member_predictions(q)).col(0);
  const Vector total = forest_u + local_bias_derivatives(forest, data, x, mode);
  const auto n = static_cast<double>(total.size());
  return total.squaredNorm() / (n * n);
}

}  // namespace ijcomb
