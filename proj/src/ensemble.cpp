#include "ijcomb/ensemble.hpp"

#include <random>
#include <string>

#include "ijcomb/error.hpp"

namespace ijcomb {

void validate(const EnsembleConfig& cfg, Eigen::Index n) {
  if (cfg.n_members < 2) throw Error(ErrorKind::config, "ensemble needs at least two members");
  if (cfg.subsample_size < 1 || cfg.subsample_size > n)
    throw Error(ErrorKind::config, "subsample size must lie in [1, n]");
}

std::vector<int> draw_subsample(int n, int k, SeedSpec member_seed) {
  Engine engine = make_engine(member_seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int draw = 0; draw < k; ++draw) ++counts[pick(engine)];
  return counts;
}

namespace {

void check_shapes(const InbagMatrix& inbag, const Matrix& T) {
  if (inbag.members() < 2) throw Error(ErrorKind::estimation, "IJ needs at least two members");
  if (T.rows() != inbag.members())
    throw Error(ErrorKind::dimension, "member predictions do not match inbag columns");
}

Matrix center_columns(const Matrix& T) { return T.rowwise() - T.colwise().mean(); }

}  // namespace

Matrix raw_ij_derivatives(const InbagMatrix& inbag, const Matrix& T) {
  check_shapes(inbag, T);
  const auto B = static_cast<double>(inbag.members());
  const auto n = static_cast<double>(inbag.rows());
  const Matrix N = inbag.counts.cast<double>();
  const Matrix Nc = N.colwise() - N.rowwise().mean();
  return (n / B) * (Nc * center_columns(T));
}

Matrix raw_ij_cov(const InbagMatrix& inbag, const Matrix& T) {
  const Matrix U = raw_ij_derivatives(inbag, T);
  const auto n = static_cast<double>(inbag.rows());
  return (U.transpose() * U) / (n * n);
}

Matrix between_member_cov(const Matrix& T) {
  if (T.rows() < 2) throw Error(ErrorKind::estimation, "need at least two members");
  const Matrix Tc = center_columns(T);
  return (Tc.transpose() * Tc) / static_cast<double>(T.rows());
}

double between_member_variance(const Matrix& T, Eigen::Index query) {
  if (T.rows() < 2) throw Error(ErrorKind::estimation, "need at least two members");
  const auto col = T.col(query);
  return (col.array() - col.mean()).square().mean();
}

Matrix ranger_corrected_cov(const InbagMatrix& inbag, const Matrix& T) {
  check_shapes(inbag, T);
  const auto B = static_cast<double>(inbag.members());
  const Matrix N = inbag.counts.cast<double>();
  const Matrix Nc = N.colwise() - N.rowwise().mean();
  const Matrix cov_nt = (Nc * center_columns(T)) / B;
  const double sum_var_n = Nc.squaredNorm() / B;
  return cov_nt.transpose() * cov_nt - ((sum_var_n - 1.0) / B) * between_member_cov(T);
}

namespace {

struct AnovaParts {
  Matrix component;  // the verbatim variance-component estimate
  double C = 0.0;
};

AnovaParts anova(const InbagMatrix& inbag, const Matrix& T) {
  check_shapes(inbag, T);
  const Eigen::Index n = inbag.rows();
  const Eigen::Index m = T.cols();
  const Matrix N = inbag.counts.cast<double>();
  const Matrix Tc = center_columns(T);  // both sums of squares are shift invariant
  const Vector Ni = N.rowwise().sum();
  const Vector col_sums = N.colwise().sum().transpose();
  const double C = Ni.sum();

  // Row i of G holds m_i(x) for every query; zero for rows never drawn.
  Matrix G = N * Tc;
  Eigen::Index active = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (Ni[i] > 0) {
      G.row(i) /= Ni[i];
      ++active;
    }
  }
  if (active == 0) throw Error(ErrorKind::estimation, "no row was ever drawn");
  Vector mbar = Vector::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i)
    if (Ni[i] > 0) mbar += G.row(i).transpose();
  mbar /= static_cast<double>(active);

  Matrix ss_tau = Matrix::Zero(m, m);
  Matrix weighted_means = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (Ni[i] <= 0) continue;
    const Vector dev = G.row(i).transpose() - mbar;
    ss_tau.noalias() += Ni[i] * dev * dev.transpose();
    weighted_means.noalias() += Ni[i] * G.row(i).transpose() * G.row(i);
  }
  // sum_i sum_b N_ib (T_b - m_i)(T_b - m_i)^T expanded through
  // sum_i N_ib = col_sums[b] and sum_b N_ib T_b = N_i m_i.
  const Matrix ss_eps =
      Tc.transpose() * col_sums.asDiagonal() * Tc - weighted_means;

  const double df_eps = C - static_cast<double>(n);
  const double denom = C - Ni.squaredNorm() / C;
  if (!(df_eps > 0.0))
    throw Error(ErrorKind::estimation, "V-statistic correction needs C > n (C = " +
                                           std::to_string(C) + ", n = " + std::to_string(n) + ")");
  if (denom == 0.0)
    throw Error(ErrorKind::estimation, "V-statistic correction denominator is zero");
  const double scale = static_cast<double>(n - 1) / df_eps;
  return {(ss_tau - scale * ss_eps) / denom, C};
}

}  // namespace

Matrix vstat_anova_cov(const InbagMatrix& inbag, const Matrix& T) { return anova(inbag, T).component; }

Matrix vstat_ij_cov(const InbagMatrix& inbag, const Matrix& T) {
  const AnovaParts parts = anova(inbag, T);
  const auto n = static_cast<double>(inbag.rows());
  const double k = parts.C / static_cast<double>(inbag.members());
  return (k * k / n) * parts.component;
}

Matrix vstat_corrected_cov(const InbagMatrix& inbag, const Matrix& T) {
  return vstat_ij_cov(inbag, T) + between_member_cov(T) / static_cast<double>(inbag.members());
}

std::string_view to_string(Correction c) noexcept {
  switch (c) {
    case Correction::raw: return "raw";
    case Correction::ranger: return "ranger";
    case Correction::vstat: return "vstat";
  }
  return "unknown";
}

Correction parse_correction(std::string_view name) {
  if (name == "raw") return Correction::raw;
  if (name == "ranger") return Correction::ranger;
  if (name == "vstat") return Correction::vstat;
  throw Error(ErrorKind::config, "unknown correction '" + std::string(name) + "'");
}

Matrix corrected_cov(const InbagMatrix& inbag, const Matrix& T, Correction c) {
  switch (c) {
    case Correction::raw: return raw_ij_cov(inbag, T);
    case Correction::ranger: return ranger_corrected_cov(inbag, T);
    case Correction::vstat: return vstat_corrected_cov(inbag, T);
  }
  return raw_ij_cov(inbag, T);
}

}  // namespace ijcomb
