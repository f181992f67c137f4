#include "depcomb/efficiency.hpp"

#include "depcomb/parallel.hpp"
#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace depcomb::eff {

namespace {
constexpr std::uint64_t kTagDraw = 0xeff1ULL;
constexpr std::uint64_t kTagNull = 0xeff0ULL;

// Correlated pair via the explicit 2x2 Cholesky factor.
inline void sample_pair(Rng& rng, double mu, double rho, int n, double& z1, double& z2) {
    double e1 = rng.normal();
    double e2 = rng.normal();
    double sd = 1.0 / std::sqrt(static_cast<double>(n));
    z1 = mu + sd * e1;
    z2 = mu + sd * (rho * e1 + std::sqrt(1.0 - rho * rho) * e2);
}

inline McEstimate rate_estimate(long hits, int reps) {
    double r = static_cast<double>(hits) / static_cast<double>(reps);
    return {r, std::sqrt(r * (1.0 - r) / static_cast<double>(reps))};
}
}  // namespace

void BivariateScenario::validate() const {
    if (!(rho > -1.0 && rho < 1.0))
        throw std::invalid_argument("BivariateScenario: rho must lie in (-1,1)");
    if (n < 1) throw std::invalid_argument("BivariateScenario: n must be positive");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("BivariateScenario: alpha must lie in (0,1)");
    if (mu1 < mu0) throw std::invalid_argument("BivariateScenario: mu1 must be >= mu0");
}

double BivariateScenario::z_alpha() const { return stats::std_normal_quantile(1.0 - alpha); }

double mp_power(const BivariateScenario& s) {
    s.validate();
    double shift = std::sqrt(2.0 * static_cast<double>(s.n) / (1.0 + s.rho)) * (s.mu1 - s.mu0);
    return 1.0 - stats::std_normal_cdf(s.z_alpha() - shift);
}

bool mp_reject(double z1, double z2, const BivariateScenario& s) {
    double zbar = 0.5 * (z1 + z2);
    return zbar - s.mu0 >= s.z_alpha() * std::sqrt((1.0 + s.rho) / (2.0 * static_cast<double>(s.n)));
}

double stouffer_dependent_pvalue(double z1, double z2, const BivariateScenario& s,
                                 std::optional<std::pair<double, double>> weights) {
    double rt_n = std::sqrt(static_cast<double>(s.n));
    double q1 = rt_n * (z1 - s.mu0);  // = Phi^{-1}(u1) exactly
    double q2 = rt_n * (z2 - s.mu0);
    if (!weights) return stats::std_normal_cdf((q1 + q2) / std::sqrt(2.0 * (1.0 + s.rho)));
    auto [w1, w2] = *weights;
    double var = w1 * w1 + w2 * w2 + 2.0 * s.rho * w1 * w2;
    if (var <= 0.0) throw std::invalid_argument("stouffer_dependent_pvalue: degenerate weights");
    return stats::std_normal_cdf((w1 * q1 + w2 * q2) / std::sqrt(var));
}

bool stouffer_dependent_reject(double z1, double z2, const BivariateScenario& s) {
    return stouffer_dependent_pvalue(z1, z2, s) >= 1.0 - s.alpha;
}

McEstimate stouffer_power_mc(const BivariateScenario& s, int reps, std::uint64_t seed) {
    s.validate();
    if (reps < 10'000) throw std::invalid_argument("stouffer_power_mc: need reps >= 10^4");
    long hits = 0;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(seed, kTagDraw, static_cast<std::uint64_t>(r) + 1);
        double z1, z2;
        sample_pair(rng, s.mu1, s.rho, s.n, z1, z2);
        if (stouffer_dependent_reject(z1, z2, s)) ++hits;
    }
    return rate_estimate(hits, reps);
}

McEstimate cauchy_power_mc(const BivariateScenario& s, int reps, std::uint64_t seed) {
    s.validate();
    if (reps < 10'000) throw std::invalid_argument("cauchy_power_mc: need reps >= 10^4");
    double rt_n = std::sqrt(static_cast<double>(s.n));
    double crit = stats::cauchy_quantile(1.0 - s.alpha);
    long hits = 0;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(seed, kTagDraw, static_cast<std::uint64_t>(r) + 1);
        double z1, z2;
        sample_pair(rng, s.mu1, s.rho, s.n, z1, z2);
        double u1 = stats::std_normal_cdf(rt_n * (z1 - s.mu0));
        double u2 = stats::std_normal_cdf(rt_n * (z2 - s.mu0));
        double t = 0.5 * stats::cauchy_quantile(u1) + 0.5 * stats::cauchy_quantile(u2);
        if (t > crit) ++hits;
    }
    return rate_estimate(hits, reps);
}

namespace {
// Upper-alpha empirical critical value of g = log u1 + log u2 under the
// Gaussian copula null.
double fisher_null_critical(double rho, double alpha, int B, std::uint64_t seed) {
    std::vector<double> g(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        Rng rng = Rng::stream(seed, kTagNull, static_cast<std::uint64_t>(b) + 1);
        double e1 = rng.normal();
        double e2 = rng.normal();
        double x2 = rho * e1 + std::sqrt(1.0 - rho * rho) * e2;
        g[static_cast<std::size_t>(b)] =
            std::log(stats::std_normal_cdf(e1)) + std::log(stats::std_normal_cdf(x2));
    }
    std::sort(g.begin(), g.end());
    // reject when g exceeds the (1-alpha) empirical quantile
    auto idx = static_cast<std::size_t>(
        std::min<long>(B - 1, static_cast<long>(std::ceil((1.0 - alpha) * B)) - 1));
    return g[idx];
}
}  // namespace

McEstimate fisher_dep_power_mc(const BivariateScenario& s, int reps, int B, std::uint64_t seed) {
    s.validate();
    if (reps < 10'000 || B < 10'000)
        throw std::invalid_argument("fisher_dep_power_mc: need reps, B >= 10^4");
    double crit = fisher_null_critical(s.rho, s.alpha, B, seed);
    double rt_n = std::sqrt(static_cast<double>(s.n));
    long hits = 0;
    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(seed, kTagDraw, static_cast<std::uint64_t>(r) + 1);
        double z1, z2;
        sample_pair(rng, s.mu1, s.rho, s.n, z1, z2);
        double u1 = stats::std_normal_cdf(rt_n * (z1 - s.mu0));
        double u2 = stats::std_normal_cdf(rt_n * (z2 - s.mu0));
        double g = std::log(std::max(u1, 1e-300)) + std::log(std::max(u2, 1e-300));
        if (g > crit) ++hits;
    }
    return rate_estimate(hits, reps);
}

std::vector<EfficiencyRow> run_efficiency_grid(const EfficiencyGridOptions& opt,
                                               std::uint64_t seed) {
    std::vector<EfficiencyRow> rows;
    for (double rho : opt.rhos) {
        std::uint64_t rho_seed = derive_seed(seed, std::hash<double>{}(rho));
        double crit = fisher_null_critical(rho, opt.alpha, opt.B, derive_seed(rho_seed, 7));
        double crit_cc = stats::cauchy_quantile(1.0 - opt.alpha);
        double rt_n = std::sqrt(static_cast<double>(opt.n));
        for (double effect : opt.effects) {
            BivariateScenario s;
            s.mu0 = 0.0;
            s.mu1 = effect / rt_n;
            s.rho = rho;
            s.n = opt.n;
            s.alpha = opt.alpha;
            s.validate();

            long hit_st = 0, hit_cc = 0, hit_fc = 0;
            // common random numbers: one (z1, z2) draw serves all methods
            for (int r = 0; r < opt.reps; ++r) {
                Rng rng = Rng::stream(rho_seed, kTagDraw, static_cast<std::uint64_t>(r) + 1);
                double z1, z2;
                sample_pair(rng, s.mu1, rho, opt.n, z1, z2);
                if (stouffer_dependent_reject(z1, z2, s)) ++hit_st;
                double u1 = stats::std_normal_cdf(rt_n * (z1 - s.mu0));
                double u2 = stats::std_normal_cdf(rt_n * (z2 - s.mu0));
                double t = 0.5 * stats::cauchy_quantile(u1) + 0.5 * stats::cauchy_quantile(u2);
                if (t > crit_cc) ++hit_cc;
                double g = std::log(std::max(u1, 1e-300)) + std::log(std::max(u2, 1e-300));
                if (g > crit) ++hit_fc;
            }
            rows.push_back({rho, effect, "MP", mp_power(s), 0.0});
            McEstimate st = rate_estimate(hit_st, opt.reps);
            McEstimate cc = rate_estimate(hit_cc, opt.reps);
            McEstimate fc = rate_estimate(hit_fc, opt.reps);
            rows.push_back({rho, effect, "dStouffer", st.value, st.se});
            rows.push_back({rho, effect, "Cauchy", cc.value, cc.se});
            rows.push_back({rho, effect, "dFisher", fc.value, fc.se});
        }
    }
    return rows;
}

}  // namespace depcomb::eff
