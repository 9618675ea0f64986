#pragma once

// Independent reference computations used only by tests. Each one is a
// direct transcription of a defining formula and deliberately shares no
// code path with the library routine it checks.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "ijcomb/types.hpp"

namespace oracle {

using ijcomb::Matrix;
using ijcomb::RowMatrix;
using ijcomb::Vector;

inline double cov_b(const std::vector<double>& a, const std::vector<double>& b) {
  const double B = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= B;
  mb /= B;
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / B;
}

inline std::vector<double> inbag_row(const Eigen::MatrixXi& N, Eigen::Index i) {
  std::vector<double> r;
  for (Eigen::Index b = 0; b < N.cols(); ++b) r.push_back(N(i, b));
  return r;
}

inline std::vector<double> member_col(const Matrix& T, Eigen::Index j) {
  std::vector<double> c;
  for (Eigen::Index b = 0; b < T.rows(); ++b) c.push_back(T(b, j));
  return c;
}

/// U_i(x) = n cov_b(N_ib, T_b(x)).
inline Matrix raw_ij(const Eigen::MatrixXi& N, const Matrix& T) {
  const auto n = N.rows();
  Matrix U(n, T.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < T.cols(); ++j)
      U(i, j) = static_cast<double>(n) * cov_b(inbag_row(N, i), member_col(T, j));
  return U;
}

/// sum_i cov(N_i,T(x1)) cov(N_i,T(x2)) - (1/B)(sum_i var(N_i) - 1) cov(T(x1),T(x2)).
inline Matrix ranger(const Eigen::MatrixXi& N, const Matrix& T) {
  const auto n = N.rows(), m = T.cols();
  const double B = static_cast<double>(N.cols());
  double sum_var = 0;
  for (Eigen::Index i = 0; i < n; ++i) sum_var += cov_b(inbag_row(N, i), inbag_row(N, i));
  Matrix out(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index l = 0; l < m; ++l) {
      double s = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        s += cov_b(inbag_row(N, i), member_col(T, j)) * cov_b(inbag_row(N, i), member_col(T, l));
      out(j, l) = s - (sum_var - 1.0) / B * cov_b(member_col(T, j), member_col(T, l));
    }
  return out;
}

/// (SS_tau - (n-1) SS_eps/(C-n)) / (C - sum N_i^2 / C) from the double sums,
/// skipping rows with N_i = 0 everywhere (including m-bar).
inline Matrix vstat_anova(const Eigen::MatrixXi& N, const Matrix& T) {
  const auto n = N.rows(), B = N.cols(), m = T.cols();
  std::vector<double> Ni(n, 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index b = 0; b < B; ++b) Ni[i] += N(i, b);
  Matrix mi = Matrix::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    if (Ni[i] > 0)
      for (Eigen::Index j = 0; j < m; ++j) {
        double s = 0;
        for (Eigen::Index b = 0; b < B; ++b) s += N(i, b) / Ni[i] * T(b, j);
        mi(i, j) = s;
      }
  std::vector<double> mbar(m, 0.0);
  int active = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (Ni[i] > 0) {
      ++active;
      for (Eigen::Index j = 0; j < m; ++j) mbar[j] += mi(i, j);
    }
  for (auto& v : mbar) v /= active;
  double C = 0, sumsq = 0;
  for (double v : Ni) {
    C += v;
    sumsq += v * v;
  }
  Matrix out(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index l = 0; l < m; ++l) {
      double ss_tau = 0, ss_eps = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (Ni[i] == 0) continue;
        ss_tau += Ni[i] * (mi(i, j) - mbar[j]) * (mi(i, l) - mbar[l]);
        for (Eigen::Index b = 0; b < B; ++b)
          ss_eps += N(i, b) * (T(b, j) - mi(i, j)) * (T(b, l) - mi(i, l));
      }
      const double sigma2 = ss_eps / (C - static_cast<double>(n));
      out(j, l) = (ss_tau - static_cast<double>(n - 1) * sigma2) / (C - sumsq / C);
    }
  return out;
}

/// Weighted least squares with intercept via the normal equations.
inline Vector weighted_ls(const RowMatrix& X, const Vector& y, const Vector& w) {
  const auto n = X.rows(), d = X.cols();
  Matrix A = Matrix::Zero(d + 1, d + 1);
  Vector rhs = Vector::Zero(d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector xt(d + 1);
    xt[0] = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) xt[k + 1] = X(i, k);
    A += w[i] * xt * xt.transpose();
    rhs += w[i] * y[i] * xt;
  }
  return A.ldlt().solve(rhs);
}

/// Reweighting vector P0 + eps (delta_i - P0).
inline Vector tilt(Eigen::Index n, Eigen::Index i, double eps) {
  Vector P = Vector::Constant(n, (1.0 - eps) / static_cast<double>(n));
  P[i] += eps;
  return P;
}

/// One-sided finite-difference directional derivatives of a statistic of
/// the reweighting vector.
inline Vector reweight_derivatives(Eigen::Index n, double eps,
                                   const std::function<double(const Vector&)>& stat) {
  const double base = stat(Vector::Constant(n, 1.0 / static_cast<double>(n)));
  Vector U(n);
  for (Eigen::Index i = 0; i < n; ++i) U[i] = (stat(tilt(n, i, eps)) - base) / eps;
  return U;
}

/// Central-difference version; O(eps^2) truncation error.
inline Vector reweight_derivatives_central(Eigen::Index n, double eps,
                                           const std::function<double(const Vector&)>& stat) {
  Vector U(n);
  for (Eigen::Index i = 0; i < n; ++i)
    U[i] = (stat(tilt(n, i, eps)) - stat(tilt(n, i, -eps))) / (2.0 * eps);
  return U;
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 60) {
  const std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps,
          int level) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (level <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, level - 1) +
           rec(mid, hi, fmid, frm, fhi, right, eps / 2.0, level - 1);
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, tol, depth);
}

/// chi^2_df cdf by integrating the density after substituting x = t^2,
/// which removes the integrable singularity at zero for df = 1.
inline double chisq_cdf_quadrature(double x, int df) {
  const double k = 0.5 * df;
  const double log_norm = k * std::log(2.0) + std::lgamma(k);
  auto integrand = [&](double t) {
    if (t <= 0.0) return df == 1 ? 2.0 * std::exp(-log_norm) : 0.0;
    return 2.0 * std::exp((2.0 * k - 1.0) * std::log(t) - 0.5 * t * t - log_norm);
  };
  return adaptive_simpson(integrand, 0.0, std::sqrt(x), 1e-14);
}

inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double chisq_quantile_quadrature(double p, int df) {
  return bisect([df](double x) { return chisq_cdf_quadrature(x, df); }, p, 0.0, 200.0);
}

inline double normal_cdf_quadrature(double z) {
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  return 0.5 + adaptive_simpson(phi, 0.0, z, 1e-15);
}

}  // namespace oracle
