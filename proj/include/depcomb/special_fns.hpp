#pragma once

#include <stdexcept>
#include <vector>

namespace depcomb::stats {

// Standard normal CDF. Absolute error below 1e-15 (erfc based).
double std_normal_cdf(double x);

// Inverse of std_normal_cdf on (0,1). Rational approximation polished by
// one Newton step; |cdf(quantile(p)) - p| <= 1e-14 away from the extremes.
double std_normal_quantile(double p);

// Standard Cauchy CDF / quantile: F(t) = 1/2 + arctan(t)/pi.
double cauchy_cdf(double t);
double cauchy_quantile(double u);

// Standard Laplace (double exponential) CDF / quantile:
// F(t) = 0.5 e^t for t <= 0, 1 - 0.5 e^{-t} for t > 0.
double laplace_cdf(double t);
double laplace_quantile(double u);

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double gamma_q(double a, double x);

// Survival function of the chi-square distribution. The real-valued df
// overload backs the moment-matched mixture tail.
double chi_square_sf(double x, int df);
double chi_square_sf_real(double x, double df);

// Mixture sum_j w_j chi^2_1 with nonnegative weights, at least one positive.
struct ChiSqMixture {
    std::vector<double> weights;
};

// Survival probability P(sum_j w_j chi^2_1(j) >= x). A single-weight mixture
// reduces exactly to chi_square_sf(x/w, 1). Otherwise Ruben's mixed-chi-square
// expansion is used when the weight spread lets it converge within budget,
// falling back to a three-cumulant moment match for ill-conditioned spectra.
double weighted_chisq_mixture_sf(double x, const ChiSqMixture& mix);

// P(sum_j w_j chi^2_1(j) >= 0) for weights of either sign, via Imhof's
// integral evaluated at zero, where the integrand does not oscillate.
// Backs exact studentized quadratic-form tests.
double signed_chisq_mixture_positive_prob(const std::vector<double>& weights);

}  // namespace depcomb::stats
