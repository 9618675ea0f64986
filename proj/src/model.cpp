#include "ijcomb/model.hpp"

#include "ijcomb/error.hpp"

namespace ijcomb {

DerivativeField MEstimatorModel::derivatives(const QuerySet& queries, Correction) const {
  return {mest_derivatives(fit_, queries), name_, std::nullopt};
}

Vector KernelModel::predict(const RowMatrix& X) const {
  Vector out(X.rows());
  for (Eigen::Index j = 0; j < X.rows(); ++j) out[j] = nw_predict(data_, spec_, row_span(X, j));
  return out;
}

DerivativeField KernelModel::derivatives(const QuerySet& queries, Correction) const {
  return {nw_derivatives(data_, spec_, queries), name_, std::nullopt};
}

LocallyModifiedForest::LocallyModifiedForest(std::string name, Forest forest, const Dataset& data,
                                             ResidualMode mode)
    : name_(std::move(name)), forest_(std::make_shared<const Forest>(std::move(forest))) {
  modifier_ = std::make_shared<const LocalModifier>(*forest_, data, mode);
}

Vector LocallyModifiedForest::predict(const RowMatrix& X) const {
  Vector out = forest_->predict(X);
  for (Eigen::Index j = 0; j < X.rows(); ++j) out[j] += modifier_->bias(row_span(X, j));
  return out;
}

DerivativeField LocallyModifiedForest::derivatives(const QuerySet& queries,
                                                   Correction correction) const {
  const Matrix T = forest_->member_predictions(queries.Q);
  DerivativeField forest_field{raw_ij_derivatives(forest_->inbag, T), name_,
                               corrected_cov(forest_->inbag, T, correction)};
  DerivativeField bias_field{Matrix(forest_field.U.rows(), queries.size()), name_, std::nullopt};
  for (Eigen::Index j = 0; j < queries.size(); ++j)
    bias_field.U.col(j) = modifier_->bias_derivatives(row_span(queries.Q, j));
  const CovBlocks blocks = cov_blocks(forest_field, bias_field);
  return {forest_field.U + bias_field.U, name_, blocks.sum()};
}

DerivativeField TwoStageModel::derivatives(const QuerySet& queries, Correction correction) const {
  const DerivativeField f1 = base_->derivatives(queries, correction);
  const DerivativeField f2 = boost_->derivatives(queries, correction);
  DerivativeField out{f1.U + f2.U, name(), std::nullopt};
  if (f1.corrected() || f2.corrected()) out.self_cov = cov_blocks(f1, f2).sum();
  return out;
}

TwoStageModel fit_boost(const Dataset& data, const Fitter& base, const Fitter& boost,
                        SeedSpec seed) {
  validate(data);
  ModelPtr f1 = base(data, seed.derive(1));
  Dataset residual{data.X, data.y - f1->predict(data.X)};
  ModelPtr f2 = boost(residual, seed.derive(2));
  return TwoStageModel(std::move(f1), std::move(f2));
}

std::vector<Interval> combined_interval(const TwoStageModel& model, const QuerySet& queries,
                                        double level, Correction correction) {
  const DerivativeField field = model.derivatives(queries, correction);
  return confidence_intervals(model.predict(queries.Q), self_covariance(field), level);
}

ComparisonResult compare_boost_stage(const TwoStageModel& model, const QuerySet& queries,
                                     Correction correction) {
  const Vector G = model.boost().predict(queries.Q);
  const Matrix sigma = self_covariance(model.boost().derivatives(queries, correction));
  if (G.norm() == 0.0) {
    try {
      return chi_square_test(G, sigma);
    } catch (const SingularCovarianceError& e) {
      return {0.0, static_cast<int>(G.size()), 1.0, e.condition_number()};
    }
  }
  return chi_square_test(G, sigma);
}

}  // namespace ijcomb
