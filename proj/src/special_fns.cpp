#include "depcomb/special_fns.hpp"
#include "depcomb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace depcomb::stats {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kPi = 3.141592653589793;
}  // namespace

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) throw std::domain_error("std_normal_cdf: non-finite input");
    return 0.5 * std::erfc(-x / kSqrt2);
}

namespace {

// Acklam's rational approximation to the normal quantile, |rel err| < 1.15e-9
// before refinement.
double norm_quantile_approx(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("std_normal_quantile: p must lie strictly in (0,1)");
    double x = norm_quantile_approx(p);
    // One Halley step against the exact CDF.
    double e = std_normal_cdf(x) - p;
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    if (pdf > 0.0) {
        double u = e / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double cauchy_cdf(double t) {
    if (!std::isfinite(t)) throw std::domain_error("cauchy_cdf: non-finite input");
    return 0.5 + std::atan(t) / kPi;
}

double cauchy_quantile(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("cauchy_quantile: u must lie strictly in (0,1)");
    return std::tan((u - 0.5) * kPi);
}

double laplace_cdf(double t) {
    if (!std::isfinite(t)) throw std::domain_error("laplace_cdf: non-finite input");
    return t <= 0.0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
}

double laplace_quantile(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("laplace_quantile: u must lie strictly in (0,1)");
    return u <= 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
}

namespace {

// Regularized lower incomplete gamma by series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
    const double fpmin = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q: require a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_sf(double x, int df) {
    if (df <= 0) throw std::domain_error("chi_square_sf: df must be positive");
    return chi_square_sf_real(x, static_cast<double>(df));
}

double chi_square_sf_real(double x, double df) {
    if (x < 0.0) throw std::domain_error("chi_square_sf: x must be nonnegative");
    if (!(df > 0.0)) throw std::domain_error("chi_square_sf: df must be positive");
    return gamma_q(0.5 * df, 0.5 * x);
}

double weighted_chisq_mixture_sf(double x, const ChiSqMixture& mix) {
    if (x < 0.0) throw std::domain_error("weighted_chisq_mixture_sf: x must be nonnegative");
    double wmax = 0.0;
    for (double w : mix.weights) {
        if (w < 0.0) throw std::domain_error("weighted_chisq_mixture_sf: negative weight");
        wmax = std::max(wmax, w);
    }
    if (wmax == 0.0)
        throw std::domain_error("weighted_chisq_mixture_sf: all weights zero (degenerate)");

    // Small weights are numerical noise from rank-deficient kernels.
    std::vector<double> w;
    w.reserve(mix.weights.size());
    for (double wi : mix.weights)
        if (wi > 1e-12 * wmax) w.push_back(wi);

    if (w.size() == 1) return chi_square_sf_real(x / w[0], 1.0);
    if (x == 0.0) return 1.0;

    const auto m = static_cast<int>(w.size());
    double wmin = w[0];
    for (double wi : w) wmin = std::min(wmin, wi);
    if (wmax <= wmin * (1.0 + 1e-12))
        return chi_square_sf_real(x / wmin, static_cast<double>(m));

    // Ruben's expansion: SF(x) = sum_k c_k * P(chisq_{m+2k} > x/beta) with
    // nonnegative c_k summing to one when beta <= min weight. The remaining
    // mass bounds the truncation error. Geometric convergence at rate
    // 1 - beta/wmax, so only attempt it when the spectrum is well
    // conditioned enough to finish within the term budget.
    const double beta = 0.95 * wmin;
    const double ratio = 1.0 - beta / wmax;
    const double tol = 1e-10;
    const int max_terms = 5000;
    const double est = std::log(tol) / std::log(ratio);
    if (est < static_cast<double>(max_terms)) {
        std::vector<double> u(w.size()), upow(w.size());
        double log_c0 = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            u[i] = 1.0 - beta / w[i];
            upow[i] = 1.0;
            log_c0 += 0.5 * std::log(beta / w[i]);
        }
        const double y = x / beta;
        // Forward recurrence for Q(y; m + 2k): each step adds one gamma
        // density term.
        double sf_term = chi_square_sf_real(y, static_cast<double>(m));
        double dens = std::exp(0.5 * m * std::log(0.5 * y) - 0.5 * y -
                               std::lgamma(0.5 * m + 1.0));
        std::vector<double> c(1, std::exp(log_c0));
        std::vector<double> g;
        double total = c[0] * sf_term;
        double mass = c[0];
        for (int k = 1; k < max_terms && 1.0 - mass > tol; ++k) {
            double gk = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                upow[i] *= u[i];
                gk += upow[i];
            }
            g.push_back(gk);
            double ck = 0.0;
            for (int j = 0; j < k; ++j) ck += g[static_cast<std::size_t>(k - 1 - j)] * c[static_cast<std::size_t>(j)];
            ck /= 2.0 * k;
            c.push_back(ck);
            sf_term += dens;
            dens *= 0.5 * y / (0.5 * m + k);
            total += ck * sf_term;
            mass += ck;
        }
        if (1.0 - mass <= tol) return std::min(1.0, total + (1.0 - mass));
    }

    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
    for (double wi : w) {
        k1 += wi;
        k2 += 2.0 * wi * wi;
        k3 += 8.0 * wi * wi * wi;
    }
    // Fallback: match the first three cumulants to a*chisq(nu) + b.
    double a = k3 / (4.0 * k2);
    double nu = 8.0 * k2 * k2 * k2 / (k3 * k3);
    double b = k1 - a * nu;
    double t = (x - b) / a;
    if (t <= 0.0) return 1.0;
    return chi_square_sf_real(t, nu);
}

double signed_chisq_mixture_positive_prob(const std::vector<double>& weights) {
    double amax = 0.0;
    for (double w : weights) amax = std::max(amax, std::fabs(w));
    if (amax == 0.0) return 1.0;  // degenerate: the form is identically zero

    std::vector<double> w;
    w.reserve(weights.size());
    bool any_pos = false, any_neg = false;
    for (double wi : weights)
        if (std::fabs(wi) > 1e-14 * amax) {
            w.push_back(wi);
            (wi > 0.0 ? any_pos : any_neg) = true;
        }
    if (w.empty() || !any_neg) return 1.0;
    if (!any_pos) return 0.0;

    const auto m = static_cast<double>(w.size());
    double log_scale = 0.0;  // sum of 0.5 log |w_i|, for the tail bound
    for (double wi : w) log_scale += 0.5 * std::log(std::fabs(wi));

    // Imhof at x = 0: P = 1/2 + (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du
    // with theta(u) = 0.5 sum atan(w_i u), rho(u) = prod (1 + w_i^2 u^2)^{1/4}.
    // theta is bounded, so the integrand decays monotonically like u^{-1-m/2}
    // and geometric panels reach any truncation point cheaply.
    auto integrand = [&](double u) {
        if (u <= 0.0) {
            double s = 0.0;
            for (double wi : w) s += wi;
            return 0.5 * s;
        }
        double theta = 0.0, log_rho = 0.0;
        for (double wi : w) {
            theta += std::atan(wi * u);
            log_rho += 0.25 * std::log1p(wi * wi * u * u);
        }
        return std::sin(0.5 * theta) * std::exp(-log_rho) / u;
    };
    auto simpson = [&](double a, double b, int panels) {
        double h = (b - a) / (2 * panels);
        double s = integrand(a) + integrand(b);
        for (int i = 1; i < 2 * panels; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(a + h * i);
        return s * h / 3.0;
    };

    double lo = 0.0, hi = 1.0 / amax;
    double total = simpson(lo, hi, 32);
    for (int seg = 0; seg < 400; ++seg) {
        lo = hi;
        hi = 2.0 * lo;
        total += simpson(lo, hi, 16);
        // |tail| <= (2 / (pi m)) U^{-m/2} / prod |w_i|^{1/2}
        double log_tail = std::log(2.0 / m) - 0.5 * m * std::log(hi) - log_scale;
        if (log_tail < std::log(1e-11) + 1.1447) break;  // compare against pi * 1e-11
    }
    return std::clamp(0.5 + total / 3.14159265358979323846, 0.0, 1.0);
}

}  // namespace depcomb::stats

namespace depcomb {

double Rng::normal() { return stats::std_normal_quantile(uniform()); }

double Rng::exponential() { return -std::log(uniform()); }

double Rng::cauchy() { return stats::cauchy_quantile(uniform()); }

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("Rng::gamma: shape must be positive");
    if (shape < 1.0) {
        // Boost via Gamma(a+1) and a uniform power.
        double u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze.
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

int Rng::binomial(int n, double p) {
    if (n < 0 || p < 0.0 || p > 1.0) throw std::domain_error("Rng::binomial: bad arguments");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    // Inversion by CDF recurrence; expected cost O(np).
    double q = 1.0 - p;
    double s = p / q;
    double f = std::pow(q, n);
    if (f > 0.0) {
        double u = uniform();
        double cdf = f;
        int k = 0;
        while (u > cdf && k < n) {
            ++k;
            f *= s * static_cast<double>(n - k + 1) / static_cast<double>(k);
            cdf += f;
        }
        return k;
    }
    // Underflow regime (huge n): fall back to counting Bernoulli successes.
    int k = 0;
    for (int i = 0; i < n; ++i) k += bernoulli(p);
    return k;
}

}  // namespace depcomb
