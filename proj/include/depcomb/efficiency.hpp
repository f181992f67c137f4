#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace depcomb::eff {

// Bivariate study: Z_i ~ N(mu, 1/n), corr(Z_1, Z_2) = rho; one-sided test
// of H0: mu = mu0 against mu > mu0 at level alpha.
struct BivariateScenario {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double rho = 0.0;
    int n = 100;
    double alpha = 0.05;

    void validate() const;
    double z_alpha() const;  // std_normal_quantile(1 - alpha)
};

// Closed-form power of the most powerful test:
// 1 - Phi(z_alpha - sqrt(2n/(1+rho)) (mu1 - mu0)).
double mp_power(const BivariateScenario& s);

// MP rejection region: zbar - mu0 >= z_alpha sqrt((1+rho)/(2n)).
bool mp_reject(double z1, double z2, const BivariateScenario& s);

// Dependence-adjusted Stouffer combination of the one-sided p-values
// u_i = Phi(sqrt(n)(Z_i - mu0)): p = Phi(sqrt(2n)(zbar - mu0)/sqrt(1+rho)).
// Optional weights (w1, w2) generalize to g = w1 q1 + w2 q2 with the matching
// Gaussian null variance w1^2 + w2^2 + 2 rho w1 w2.
double stouffer_dependent_pvalue(double z1, double z2, const BivariateScenario& s,
                                 std::optional<std::pair<double, double>> weights = std::nullopt);

// Evidence for mu > mu0 drives the combined p upward, so rejection is
// p >= 1 - alpha; identical to mp_reject in the unweighted case.
bool stouffer_dependent_reject(double z1, double z2, const BivariateScenario& s);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
};

McEstimate stouffer_power_mc(const BivariateScenario& s, int reps, std::uint64_t seed);

// Cauchy combination T = 0.5 F_CC^{-1}(u1) + 0.5 F_CC^{-1}(u2), rejecting
// when T exceeds the upper-alpha standard Cauchy quantile.
McEstimate cauchy_power_mc(const BivariateScenario& s, int reps, std::uint64_t seed);

// Dependence-adjusted Fisher: g = log u1 + log u2 referenced against an
// empirical critical value from B Gaussian-copula(rho) null draws; rejects
// for g above the upper-alpha null quantile.
McEstimate fisher_dep_power_mc(const BivariateScenario& s, int reps, int B, std::uint64_t seed);

struct EfficiencyRow {
    double rho = 0.0;
    double effect = 0.0;  // (mu1 - mu0) * sqrt(n)
    std::string method;   // MP | dStouffer | Cauchy | dFisher
    double power = 0.0;
    double mc_se = 0.0;
};

struct EfficiencyGridOptions {
    std::vector<double> rhos = {0.0, 0.3, 0.6, 0.9};
    std::vector<double> effects = {0.5, 1.0, 2.0};  // in units of 1/sqrt(n)
    int n = 100;
    double alpha = 0.05;
    int reps = 100'000;
    int B = 100'000;
    int threads = 1;
};

// Power of the four methods over the (rho, effect) grid with common random
// numbers across methods within each replicate. MP rows carry the closed
// form with mc_se = 0.
std::vector<EfficiencyRow> run_efficiency_grid(const EfficiencyGridOptions& opt,
                                               std::uint64_t seed);

}  // namespace depcomb::eff
