#pragma once

namespace ijcomb {

/// P(df/2, x/2), the regularized lower incomplete gamma function.
double chisq_cdf(double x, int df);
/// Upper tail 1 - chisq_cdf, computed without cancellation.
double chisq_sf(double x, int df);
double chisq_pdf(double x, int df);
/// Inverse of chisq_cdf by safeguarded Newton iteration on a bracket.
double chisq_quantile(double p, int df);

double normal_cdf(double x);
double normal_quantile(double p);

/// Two-sided critical value z with P(|Z| <= z) = level.
double two_sided_z(double level);

}  // namespace ijcomb
