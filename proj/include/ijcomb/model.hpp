#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ijcomb/compare.hpp"
#include "ijcomb/forest.hpp"
#include "ijcomb/kernel.hpp"
#include "ijcomb/mest.hpp"

namespace ijcomb {

/// A fitted predictor that can also report IJ directional derivatives
/// with respect to its own training rows.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual Vector predict(const RowMatrix& X) const = 0;
  /// `correction` only affects subsampled ensembles.
  virtual DerivativeField derivatives(const QuerySet& queries, Correction correction) const = 0;
};

using ModelPtr = std::shared_ptr<const Model>;
using Fitter = std::function<ModelPtr(const Dataset&, SeedSpec)>;

class MEstimatorModel final : public Model {
 public:
  MEstimatorModel(std::string name, FittedMEstimator fit)
      : name_(std::move(name)), fit_(std::move(fit)) {}

  std::string name() const override { return name_; }
  Vector predict(const RowMatrix& X) const override { return fit_.predict(X); }
  DerivativeField derivatives(const QuerySet& queries, Correction) const override;

  const FittedMEstimator& fit() const noexcept { return fit_; }

 private:
  std::string name_;
  FittedMEstimator fit_;
};

template <class Member>
class EnsembleModel final : public Model {
 public:
  EnsembleModel(std::string name, Ensemble<Member> ensemble)
      : name_(std::move(name)), ensemble_(std::move(ensemble)) {}

  std::string name() const override { return name_; }
  Vector predict(const RowMatrix& X) const override { return ensemble_.predict(X); }
  DerivativeField derivatives(const QuerySet& queries, Correction correction) const override {
    const Matrix T = ensemble_.member_predictions(queries.Q);
    return {raw_ij_derivatives(ensemble_.inbag, T), name_,
            corrected_cov(ensemble_.inbag, T, correction)};
  }

  const Ensemble<Member>& ensemble() const noexcept { return ensemble_; }

 private:
  std::string name_;
  Ensemble<Member> ensemble_;
};

using ForestModel = EnsembleModel<RegressionTree>;
using GbtEnsembleModel = EnsembleModel<GbtModel>;

class KernelModel final : public Model {
 public:
  KernelModel(std::string name, Dataset data, KernelSpec spec)
      : name_(std::move(name)), data_(std::move(data)), spec_(spec) {}

  std::string name() const override { return name_; }
  Vector predict(const RowMatrix& X) const override;
  DerivativeField derivatives(const QuerySet& queries, Correction) const override;

 private:
  std::string name_;
  Dataset data_;
  KernelSpec spec_;
};

/// Forest plus its out-of-bag in-leaf bias correction. The forest's own
/// covariance is corrected; the bias term enters through Gram blocks.
class LocallyModifiedForest final : public Model {
 public:
  LocallyModifiedForest(std::string name, Forest forest, const Dataset& data,
                        ResidualMode mode = ResidualMode::in_sample);

  std::string name() const override { return name_; }
  Vector predict(const RowMatrix& X) const override;
  DerivativeField derivatives(const QuerySet& queries, Correction correction) const override;

  const Forest& forest() const noexcept { return *forest_; }
  const LocalModifier& modifier() const noexcept { return *modifier_; }

 private:
  std::string name_;
  std::shared_ptr<const Forest> forest_;
  std::shared_ptr<const LocalModifier> modifier_;
};

/// f1 fit on (X, y), f2 fit on (X, y - f1(X)); predicts f1 + f2.
class TwoStageModel final : public Model {
 public:
  TwoStageModel(ModelPtr base, ModelPtr boost) : base_(std::move(base)), boost_(std::move(boost)) {}

  std::string name() const override { return base_->name() + "+" + boost_->name(); }
  Vector predict(const RowMatrix& X) const override {
    return base_->predict(X) + boost_->predict(X);
  }
  /// U = U1 + U2, covariance s11 + s22 + s12 + s21.
  DerivativeField derivatives(const QuerySet& queries, Correction correction) const override;

  const Model& base() const noexcept { return *base_; }
  const Model& boost() const noexcept { return *boost_; }

 private:
  ModelPtr base_;
  ModelPtr boost_;
};

TwoStageModel fit_boost(const Dataset& data, const Fitter& base, const Fitter& boost,
                        SeedSpec seed);

std::vector<Interval> combined_interval(const TwoStageModel& model, const QuerySet& queries,
                                        double level, Correction correction = Correction::vstat);

/// Tests whether the boosting stage changed the predictions: G = f2(Q)
/// against the stage-two covariance alone.
ComparisonResult compare_boost_stage(const TwoStageModel& model, const QuerySet& queries,
                                     Correction correction = Correction::vstat);

}  // namespace ijcomb
