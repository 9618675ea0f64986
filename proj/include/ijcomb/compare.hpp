#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ijcomb/types.hpp"

namespace ijcomb {

/// Directional derivatives of one model's predictions, U(i, j) for training
/// row i and query j. Subsampled ensembles also carry a bias-corrected
/// covariance that replaces the plain Gram form on diagonal blocks.
struct DerivativeField {
  Matrix U;
  std::string model;
  std::optional<Matrix> self_cov;

  bool corrected() const noexcept { return self_cov.has_value(); }
};

/// (1/n^2) U1^T U2.
Matrix gram_cov(const Matrix& U1, const Matrix& U2);

/// The field's corrected covariance when it has one, else its Gram form.
Matrix self_covariance(const DerivativeField& field);

struct CovBlocks {
  Matrix s11, s22, s12, s21;

  /// Covariance of F1 - F2: s11 + s22 - s12 - s21.
  Matrix difference() const { return s11 + s22 - s12 - s21; }
  /// Covariance of F1 + F2: s11 + s22 + s12 + s21.
  Matrix sum() const { return s11 + s22 + s12 + s21; }
};

/// Diagonal blocks from self_covariance, cross blocks always from the raw
/// derivatives; s21 is s12 transposed.
CovBlocks cov_blocks(const DerivativeField& f1, const DerivativeField& f2);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const noexcept { return upper - lower; }
  bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

/// pred +- z * sqrt(var); refuses negative variances.
Interval confidence_interval(double pred, double var, double level);
std::vector<Interval> confidence_intervals(const Vector& pred, const Matrix& cov, double level);

/// pred +- z * sqrt(2 var), covering an independent re-run of the same fit.
Interval reproduction_interval(double pred, double var, double level);

struct ComparisonResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double condition_number = 1.0;
  // cov had negative eigenvalues; df counts only the positive ones
  bool indefinite = false;
};

inline constexpr double kMaxConditionNumber = 1e12;

/// diff^T cov^{-1} diff against chi^2 with diff.size() degrees of freedom.
/// The condition number is max|lambda| / min|lambda|; above kMaxConditionNumber
/// (or with an exactly zero eigenvalue) SingularCovarianceError is thrown.
/// Negative eigen-directions of an indefinite cov are dropped and df shrinks
/// to the number of positive eigenvalues.
ComparisonResult chi_square_test(const Vector& diff, const Matrix& cov);

ComparisonResult compare_models(const Vector& F1, const Vector& F2, const CovBlocks& blocks);

/// Smallest over largest eigenvalue magnitude of a symmetric matrix, inverted.
double condition_number(const Matrix& symmetric);

}  // namespace ijcomb
