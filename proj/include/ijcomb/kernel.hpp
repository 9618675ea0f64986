#pragma once

#include <span>

#include "ijcomb/forest.hpp"

namespace ijcomb {

enum class KernelKind { gaussian, uniform };

struct KernelSpec {
  KernelKind kernel = KernelKind::gaussian;
  double bandwidth = 1.0;
};

/// C_k = K(||x - X_k|| / h) over the Euclidean norm; normalizing constants
/// are dropped since they cancel in every ratio below.
Vector kernel_weights(const Dataset& data, const KernelSpec& spec, std::span<const double> x);

double nw_predict(const Dataset& data, const KernelSpec& spec, std::span<const double> x);

/// n x m field of Nadaraya-Watson directional derivatives.
Matrix nw_derivatives(const Dataset& data, const KernelSpec& spec, const QuerySet& queries);

/// Derivatives of sum_k C_k v_k / sum_k C_k under reweighting of row i:
/// U_i = (r q - p s) / q^2 with p = sum C v, q = sum C, r = n C_i v_i, s = n C_i.
Vector weighted_mean_derivatives(const Vector& C, const Vector& v);

struct LocalWeights {
  Vector v;  // normalized
  Vector C;  // raw out-of-bag co-leaf counts
};

enum class ResidualMode { in_sample, out_of_bag };

/// Local bias correction of a forest from out-of-bag rows sharing a leaf
/// with the query. Training-row leaf assignments are cached once.
class LocalModifier {
 public:
  LocalModifier(const Forest& forest, const Dataset& data,
                ResidualMode mode = ResidualMode::in_sample);

  LocalWeights weights(std::span<const double> x) const;
  double bias(std::span<const double> x) const;
  Vector bias_derivatives(std::span<const double> x) const;

  /// D_k = Y_k - f(X_k).
  const Vector& residuals() const noexcept { return residuals_; }

 private:
  const Forest* forest_;
  Eigen::MatrixXi train_leaf_;  // n x B
  Vector residuals_;
};

LocalWeights oob_inleaf_weights(const Forest& forest, const Dataset& data,
                                std::span<const double> x);
double local_bias(const Forest& forest, const Dataset& data, std::span<const double> x,
                  ResidualMode mode = ResidualMode::in_sample);
Vector local_bias_derivatives(const Forest& forest, const Dataset& data,
                              std::span<const double> x,
                              ResidualMode mode = ResidualMode::in_sample);

/// (1/n^2) sum_i (U'_i + U_i)^2 with U' the forest's raw IJ derivatives.
double modified_variance(const Forest& forest, const Dataset& data, std::span<const double> x,
                         ResidualMode mode = ResidualMode::in_sample);

}  // namespace ijcomb
