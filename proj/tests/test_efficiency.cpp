#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "depcomb/efficiency.hpp"
#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace depcomb;
using namespace depcomb::eff;

namespace {

BivariateScenario scenario(double rho, double mu1, int n = 100, double alpha = 0.05) {
    BivariateScenario s;
    s.mu0 = 0.0;
    s.mu1 = mu1;
    s.rho = rho;
    s.n = n;
    s.alpha = alpha;
    return s;
}

// Correlated pair of sample means under the alternative.
std::pair<double, double> draw_pair(Rng& rng, const BivariateScenario& s) {
    double e1 = rng.normal();
    double e2 = s.rho * e1 + std::sqrt(1.0 - s.rho * s.rho) * rng.normal();
    double sd = 1.0 / std::sqrt(static_cast<double>(s.n));
    return {s.mu1 + sd * e1, s.mu1 + sd * e2};
}

}  // namespace

TEST_CASE("most powerful test: closed-form power") {
    // reference values from an independent scipy evaluation
    CHECK(mp_power(scenario(0.0, 0.1)) == doctest::Approx(0.4087972198).epsilon(1e-8));
    CHECK(mp_power(scenario(0.6, 0.1)) == doctest::Approx(0.2991594220).epsilon(1e-8));
    BivariateScenario s3;
    s3.mu0 = 0.2;
    s3.mu1 = 0.4;
    s3.rho = 0.9;
    s3.n = 50;
    s3.alpha = 0.01;
    CHECK(mp_power(s3) == doctest::Approx(0.1906794080).epsilon(1e-8));

    // at the null the power equals the level
    CHECK(mp_power(scenario(0.3, 0.0)) == doctest::Approx(0.05).epsilon(1e-10));

    // power decreases with rho and increases with the effect
    CHECK(mp_power(scenario(0.0, 0.1)) > mp_power(scenario(0.5, 0.1)));
    CHECK(mp_power(scenario(0.5, 0.1)) > mp_power(scenario(0.9, 0.1)));
    CHECK(mp_power(scenario(0.3, 0.2)) > mp_power(scenario(0.3, 0.1)));

    CHECK_THROWS_AS((void)mp_power(scenario(1.0, 0.1)), std::invalid_argument);
    CHECK_THROWS_AS((void)mp_power(scenario(0.0, -0.1)), std::invalid_argument);
    BivariateScenario bad = scenario(0.0, 0.1);
    bad.alpha = 0.0;
    CHECK_THROWS_AS((void)mp_power(bad), std::invalid_argument);
    bad = scenario(0.0, 0.1);
    bad.n = 0;
    CHECK_THROWS_AS((void)mp_power(bad), std::invalid_argument);
}

TEST_CASE("dependent Stouffer p-value") {
    auto s = scenario(0.4, 0.1);
    // both means at the null value: no evidence either way
    CHECK(stouffer_dependent_pvalue(0.0, 0.0, s) == doctest::Approx(0.5).epsilon(1e-12));
    // monotone in the sample means
    double prev = 0.0;
    for (double z = -0.3; z < 0.3; z += 0.01) {
        double p = stouffer_dependent_pvalue(z, z, s);
        CHECK(p >= prev);
        prev = p;
    }
    // equal weights reproduce the unweighted form
    CHECK(stouffer_dependent_pvalue(0.07, -0.02, s, std::make_pair(1.0, 1.0)) ==
          doctest::Approx(stouffer_dependent_pvalue(0.07, -0.02, s)).epsilon(1e-12));
    CHECK_THROWS_AS(
        (void)stouffer_dependent_pvalue(0.1, 0.1, s, std::make_pair(0.0, 0.0)),
        std::invalid_argument);
}

TEST_CASE("dependent Stouffer rejects exactly when the MP test does") {
    for (double rho : {0.0, 0.5, 0.9}) {
        auto s = scenario(rho, 0.1);
        Rng rng(derive_seed(11, static_cast<std::uint64_t>(rho * 10)));
        int rejections = 0;
        for (int r = 0; r < 100'000; ++r) {
            auto [z1, z2] = draw_pair(rng, s);
            bool mp = mp_reject(z1, z2, s);
            bool st = stouffer_dependent_reject(z1, z2, s);
            if (mp != st) {
                CAPTURE(z1);
                CAPTURE(z2);
                CAPTURE(rho);
                REQUIRE(mp == st);
            }
            rejections += mp;
        }
        CHECK(rejections > 0);
        CHECK(rejections < 100'000);
    }
    // boundary: equality belongs to the rejection region
    auto s = scenario(0.0, 0.1);
    double zbar = s.z_alpha() * std::sqrt((1.0 + s.rho) / (2.0 * s.n));
    CHECK(mp_reject(zbar, zbar, s));
    CHECK(stouffer_dependent_reject(zbar, zbar, s));
}

TEST_CASE("Stouffer Monte Carlo power matches the closed form") {
    for (double rho : {0.0, 0.3, 0.8}) {
        auto s = scenario(rho, 0.1);
        auto est = stouffer_power_mc(s, 100'000, 21);
        double exact = mp_power(s);
        INFO("rho=" << rho << " mc=" << est.value << " exact=" << exact);
        CHECK(est.se > 0.0);
        CHECK(std::fabs(est.value - exact) <= 3.0 * est.se);
    }
    CHECK_THROWS_AS((void)stouffer_power_mc(scenario(0.0, 0.1), 100, 1),
                    std::invalid_argument);
}

TEST_CASE("Cauchy combination: level and efficiency loss") {
    // holds its size under independence
    auto s0 = scenario(0.0, 0.0);
    auto size = cauchy_power_mc(s0, 100'000, 31);
    CHECK(std::fabs(size.value - 0.05) <= 3.0 * size.se);

    // never beats the most powerful test
    for (double rho : {0.0, 0.5, 0.9}) {
        auto s = scenario(rho, 0.15);
        auto est = cauchy_power_mc(s, 100'000, 32);
        CHECK(est.value <= mp_power(s) + 3.0 * est.se);
    }

    // power grows with the effect (1-SE slack between neighboring points)
    double prev = -1.0;
    for (double mu1 : {0.02, 0.06, 0.1, 0.15, 0.2}) {
        auto est = cauchy_power_mc(scenario(0.4, mu1), 100'000, 33);
        CHECK(est.value >= prev - est.se);
        prev = est.value;
    }
    CHECK_THROWS_AS((void)cauchy_power_mc(s0, 100, 1), std::invalid_argument);
}

TEST_CASE("dependent Fisher: level, efficiency loss, independent-case oracle") {
    auto s0 = scenario(0.6, 0.0);
    auto size = fisher_dep_power_mc(s0, 100'000, 100'000, 41);
    // the empirical critical value adds its own noise on top of the MC error
    CHECK(std::fabs(size.value - 0.05) <= 4.0 * size.se + 0.005);

    for (double rho : {0.0, 0.5, 0.9}) {
        auto s = scenario(rho, 0.15);
        auto est = fisher_dep_power_mc(s, 100'000, 100'000, 42);
        CHECK(est.value <= mp_power(s) + 3.0 * est.se + 0.005);
    }

    // at rho = 0 the empirical critical value must agree with the chi-square
    // closed form: reject when -2(log u1 + log u2) is in the lower alpha tail
    auto s = scenario(0.0, 0.12);
    auto est = fisher_dep_power_mc(s, 100'000, 100'000, 43);
    Rng rng(44);
    int rej = 0;
    const int reps = 100'000;
    for (int r = 0; r < reps; ++r) {
        auto [z1, z2] = draw_pair(rng, s);
        double u1 = stats::std_normal_cdf(std::sqrt(static_cast<double>(s.n)) * z1);
        double u2 = stats::std_normal_cdf(std::sqrt(static_cast<double>(s.n)) * z2);
        double g = std::log(u1) + std::log(u2);
        if (stats::chi_square_sf(-2.0 * g, 4) >= 1.0 - s.alpha) ++rej;
    }
    double oracle = static_cast<double>(rej) / reps;
    double se = std::sqrt(oracle * (1.0 - oracle) / reps);
    INFO("dFisher=" << est.value << " chi-square oracle=" << oracle);
    CHECK(std::fabs(est.value - oracle) <= 3.0 * std::sqrt(se * se + est.se * est.se) + 0.005);

    CHECK_THROWS_AS((void)fisher_dep_power_mc(s0, 100, 100'000, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)fisher_dep_power_mc(s0, 100'000, 100, 1), std::invalid_argument);
}

TEST_CASE("efficiency grid") {
    EfficiencyGridOptions opt;
    opt.rhos = {0.0, 0.6};
    opt.effects = {1.0};
    opt.n = 100;
    opt.reps = 20'000;
    opt.B = 20'000;
    auto rows = run_efficiency_grid(opt, 51);
    REQUIRE(rows.size() == 8);

    for (double rho : opt.rhos) {
        double mp = 0.0, stou = 0.0, stou_se = 0.0;
        int found = 0;
        for (const auto& r : rows) {
            if (r.rho != rho) continue;
            ++found;
            CHECK(r.effect == doctest::Approx(1.0));
            if (r.method == "MP") {
                mp = r.power;
                CHECK(r.mc_se == 0.0);
            } else {
                CHECK(r.mc_se > 0.0);
                if (r.method == "dStouffer") {
                    stou = r.power;
                    stou_se = r.mc_se;
                }
            }
        }
        CHECK(found == 4);
        auto s = scenario(rho, 0.1);
        CHECK(mp == doctest::Approx(mp_power(s)).epsilon(1e-12));
        CHECK(std::fabs(stou - mp) <= 3.0 * stou_se);
        for (const auto& r : rows)
            if (r.rho == rho && r.mc_se > 0.0) CHECK(r.power <= mp + 3.0 * r.mc_se + 0.005);
    }

    // deterministic in the seed
    auto again = run_efficiency_grid(opt, 51);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].power == again[i].power);
}
