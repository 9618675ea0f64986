#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ijcomb/data.hpp"
#include "ijcomb/parallel.hpp"

namespace ijcomb {

struct EnsembleConfig {
  int n_members = 1000;
  int subsample_size = 200;  // drawn with replacement
  unsigned threads = 1;
};

/// n x B matrix; entry (i, b) counts how often row i was drawn for member b.
struct InbagMatrix {
  Eigen::MatrixXi counts;

  Eigen::Index rows() const noexcept { return counts.rows(); }
  Eigen::Index members() const noexcept { return counts.cols(); }
  std::span<const int> column(Eigen::Index b) const {
    return {counts.data() + b * counts.rows(), static_cast<std::size_t>(counts.rows())};
  }
};

/// Multinomial draw of k rows out of n for member b of an ensemble.
std::vector<int> draw_subsample(int n, int k, SeedSpec member_seed);

template <class Member>
struct Ensemble {
  std::vector<Member> members;
  InbagMatrix inbag;

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(members.size()); }

  /// B x m matrix of member predictions at each query row.
  Matrix member_predictions(const RowMatrix& Q) const {
    Matrix T(size(), Q.rows());
    for (Eigen::Index b = 0; b < size(); ++b)
      for (Eigen::Index j = 0; j < Q.rows(); ++j) T(b, j) = members[b].predict(row_span(Q, j));
    return T;
  }

  Vector predict(const RowMatrix& Q) const { return member_predictions(Q).colwise().mean(); }
};

void validate(const EnsembleConfig& cfg, Eigen::Index n);

/// Fits B members on independent with-replacement subsamples. `fit` is
/// called as fit(std::span<const int> counts, SeedSpec) and returns a
/// member. Results are identical for any thread count.
template <class Member, class Fitter>
Ensemble<Member> fit_ensemble(const Dataset& data, const EnsembleConfig& cfg, Fitter&& fit,
                              SeedSpec seed) {
  validate(data);
  validate(cfg, data.size());
  const auto n = static_cast<int>(data.size());
  Ensemble<Member> model;
  model.members.resize(static_cast<std::size_t>(cfg.n_members));
  model.inbag.counts.resize(n, cfg.n_members);
  parallel_for(static_cast<std::size_t>(cfg.n_members), cfg.threads, [&](std::size_t b) {
    const SeedSpec member_seed = seed.derive(b);
    const std::vector<int> counts = draw_subsample(n, cfg.subsample_size, member_seed);
    const auto col = static_cast<Eigen::Index>(b);
    for (int i = 0; i < n; ++i) model.inbag.counts(i, col) = counts[i];
    model.members[b] = fit(std::span<const int>(counts), member_seed.derive(1));
  });
  return model;
}

// All IJ quantities below take the inbag matrix N (n x B) and the member
// prediction matrix T (B x m) only, so every subsampled ensemble shares them.
// Covariances over members use the 1/B convention.

/// U(i, j) = n * cov_b(N_{i,b}, T_b(x_j)); an n x m derivative field.
Matrix raw_ij_derivatives(const InbagMatrix& inbag, const Matrix& T);

/// (1/n^2) U^T U, i.e. sum_i cov_b(N_i, T(x_j)) cov_b(N_i, T(x_j')).
Matrix raw_ij_cov(const InbagMatrix& inbag, const Matrix& T);

/// Raw IJ minus (1/B)(sum_i var_b(N_{i,b}) - 1) cov_b(T(x_j), T(x_j')).
Matrix ranger_corrected_cov(const InbagMatrix& inbag, const Matrix& T);

/// ANOVA variance-component estimate
///   (SS_tau - (n - 1) SS_eps / (C - n)) / (C - sum_i N_i^2 / C)
/// taken verbatim. It estimates the variance of the per-row group means
/// m_i(x) and so lives on a per-observation scale, not the IJ scale.
/// Rows never drawn (N_i = 0) are left out of m-bar, SS_tau and SS_eps.
Matrix vstat_anova_cov(const InbagMatrix& inbag, const Matrix& T);

/// Bias-corrected covariance of the ensemble prediction:
///   (k^2 / n) * vstat_anova_cov + cov_b(T) / B
/// with k = C / B. The first term estimates the infinite-ensemble IJ
/// covariance; the second is the Monte Carlo variance of a B-member average.
Matrix vstat_corrected_cov(const InbagMatrix& inbag, const Matrix& T);

/// First term of vstat_corrected_cov alone.
Matrix vstat_ij_cov(const InbagMatrix& inbag, const Matrix& T);

/// cov_b(T_b(x_j), T_b(x_j')), m x m.
Matrix between_member_cov(const Matrix& T);
double between_member_variance(const Matrix& T, Eigen::Index query);

enum class Correction { raw, ranger, vstat };
std::string_view to_string(Correction c) noexcept;
Correction parse_correction(std::string_view name);

Matrix corrected_cov(const InbagMatrix& inbag, const Matrix& T, Correction c);

}  // namespace ijcomb
