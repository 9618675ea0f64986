#include "ijcomb/stats.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "ijcomb/error.hpp"

namespace ijcomb {

namespace {

void check_df(int df) {
  if (df < 1) throw Error(ErrorKind::domain, "chi-squared needs df >= 1, got " + std::to_string(df));
}

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::domain, "probability must lie in (0, 1), got " + std::to_string(p));
}

}  // namespace

double chisq_cdf(double x, int df) {
  check_df(df);
  if (!(x >= 0.0)) throw Error(ErrorKind::domain, "chi-squared cdf needs x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * df, 0.5 * x);
}

double chisq_sf(double x, int df) {
  check_df(df);
  if (!(x >= 0.0)) throw Error(ErrorKind::domain, "chi-squared tail needs x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chisq_pdf(double x, int df) {
  check_df(df);
  if (x < 0.0) return 0.0;
  const double k = 0.5 * df;
  if (x == 0.0) return df == 2 ? 0.5 : (df == 1 ? std::numeric_limits<double>::infinity() : 0.0);
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

double chisq_quantile(double p, int df) {
  check_df(df);
  check_probability(p);
  double lo = 0.0, hi = std::max(1.0, static_cast<double>(df));
  while (chisq_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
    const double f = chisq_cdf(x, df) - p;
    if (f == 0.0) return x;
    (f < 0.0 ? lo : hi) = x;
    const double dens = chisq_pdf(x, df);
    double next = dens > 0.0 && std::isfinite(dens) ? x - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  check_probability(p);
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::domain, "confidence level must lie in (0, 1)");
  return normal_quantile(0.5 + 0.5 * level);
}

}  // namespace ijcomb
