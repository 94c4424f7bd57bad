#pragma once

namespace equivcheck::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLnSqrt2Pi = 0.91893853320467274178;

/// log Gamma(x) for x > 0 (Lanczos, g = 7). Thread-safe, unlike std::lgamma.
double log_gamma(double x);
double digamma(double x);

/// Regularized lower / upper incomplete gamma P(a, x), Q(a, x); a > 0, x >= 0.
/// Series for x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Inverse of P(a, .) in x; p in [0, 1].
double gamma_p_inv(double a, double p);

double normal_cdf(double z);
/// 1 - Phi(z), accurate in the upper tail.
double normal_sf(double z);
/// log(1 - Phi(z)) without underflow for large z.
double log_normal_sf(double z);
double log_normal_cdf(double z);
/// Phi^{-1}(p), p in (0, 1); Acklam's rational approximation plus one Halley step.
double normal_quantile(double p);
/// Inverse of normal_sf: z with 1 - Phi(z) = q, accurate for tiny q.
double normal_sf_inv(double q);

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

}  // namespace equivcheck::special
