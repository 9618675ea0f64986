#include "ijcomb/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ijcomb/error.hpp"
#include "ijcomb/stats.hpp"

namespace ijcomb {

Matrix gram_cov(const Matrix& U1, const Matrix& U2) {
  if (U1.rows() != U2.rows() || U1.cols() != U2.cols())
    throw Error(ErrorKind::dimension, "derivative fields differ in shape");
  const auto n = static_cast<double>(U1.rows());
  return (U1.transpose() * U2) / (n * n);
}

Matrix self_covariance(const DerivativeField& field) {
  return field.self_cov ? *field.self_cov : gram_cov(field.U, field.U);
}

CovBlocks cov_blocks(const DerivativeField& f1, const DerivativeField& f2) {
  CovBlocks blocks;
  blocks.s12 = gram_cov(f1.U, f2.U);
  blocks.s21 = blocks.s12.transpose();
  blocks.s11 = self_covariance(f1);
  blocks.s22 = self_covariance(f2);
  return blocks;
}

Interval confidence_interval(double pred, double var, double level) {
  if (!(var >= 0.0)) {
    std::ostringstream msg;
    msg << "cannot build an interval from variance estimate " << var;
    throw Error(ErrorKind::negative_variance, msg.str());
  }
  const double half = two_sided_z(level) * std::sqrt(var);
  return {pred - half, pred + half};
}

std::vector<Interval> confidence_intervals(const Vector& pred, const Matrix& cov, double level) {
  if (cov.rows() != pred.size() || cov.cols() != pred.size())
    throw Error(ErrorKind::dimension, "covariance does not match predictions");
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(pred.size()));
  for (Eigen::Index j = 0; j < pred.size(); ++j)
    out.push_back(confidence_interval(pred[j], cov(j, j), level));
  return out;
}

Interval reproduction_interval(double pred, double var, double level) {
  if (!(var >= 0.0)) throw Error(ErrorKind::negative_variance, "negative variance estimate");
  return confidence_interval(pred, 2.0 * var, level);
}

double condition_number(const Matrix& symmetric) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
  const Vector lambda = eig.eigenvalues();
  const double lo = lambda.cwiseAbs().minCoeff(), hi = lambda.cwiseAbs().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

ComparisonResult chi_square_test(const Vector& diff, const Matrix& cov) {
  const Eigen::Index m = diff.size();
  if (m < 1) throw Error(ErrorKind::empty_data, "no query points to compare");
  if (cov.rows() != m || cov.cols() != m)
    throw Error(ErrorKind::dimension, "covariance does not match prediction difference");
  const Matrix sym = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector lambda = eig.eigenvalues();  // ascending
  const double lo = lambda.cwiseAbs().minCoeff(), hi = lambda.cwiseAbs().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (cond > kMaxConditionNumber) {
    std::ostringstream msg;
    msg << "difference covariance is not safely invertible (smallest eigenvalue " << lambda[0]
        << ", condition number " << cond << ")";
    throw SingularCovarianceError(msg.str(), cond);
  }
  // An indefinite cov is replaced by its nearest positive semi-definite
  // matrix: negative directions are dropped and df is the remaining rank.
  const Vector proj = eig.eigenvectors().transpose() * diff;
  ComparisonResult result;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (lambda[i] <= 0.0) continue;
    result.statistic += proj[i] * proj[i] / lambda[i];
    ++result.df;
  }
  if (result.df == 0)
    throw SingularCovarianceError("difference covariance has no positive eigenvalue", cond);
  result.indefinite = result.df < m;
  result.p_value = chisq_sf(result.statistic, result.df);
  result.condition_number = cond;
  return result;
}

ComparisonResult compare_models(const Vector& F1, const Vector& F2, const CovBlocks& blocks) {
  if (F1.size() != F2.size())
    throw Error(ErrorKind::dimension, "prediction vectors differ in length");
  return chi_square_test(F1 - F2, blocks.difference());
}

}  // namespace ijcomb
