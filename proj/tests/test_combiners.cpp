#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "depcomb/combiners.hpp"
#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace depcomb;

namespace {

double ks_against_uniform(std::vector<double>& sample) {
    std::sort(sample.begin(), sample.end());
    const auto n = sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        double lo = static_cast<double>(i) / static_cast<double>(n);
        d = std::max(d, std::max(std::fabs(hi - sample[i]), std::fabs(sample[i] - lo)));
    }
    return d;
}

}  // namespace

TEST_CASE("combination statistics at hand-computed points") {
    CHECK(gc_eval(GcSpec::fisher(), std::vector<double>{1.0, 1.0}) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(gc_eval(GcSpec::fisher(), std::vector<double>{0.1, 0.2}) ==
          doctest::Approx(std::log(0.1) + std::log(0.2)).epsilon(1e-12));
    CHECK(gc_eval(GcSpec::stouffer(), std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(gc_eval(GcSpec::cauchy(), std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(gc_eval(GcSpec::min(), std::vector<double>{0.3, 0.2, 0.9}) ==
          doctest::Approx(0.2).epsilon(1e-14));
    CHECK(gc_eval(GcSpec::harmonic_mean(), std::vector<double>{0.1, 0.5}) ==
          doctest::Approx(12.0).epsilon(1e-12));
    CHECK(gc_eval(GcSpec::pareto(1.0), std::vector<double>{0.2, 0.5}) ==
          doctest::Approx(7.0).epsilon(1e-12));
    CHECK(gc_eval(GcSpec::pareto(2.0), std::vector<double>{0.5}) ==
          doctest::Approx(4.0).epsilon(1e-12));
    // Laplace quantile at 0.9 is -log(2 * 0.1)
    CHECK(gc_eval(GcSpec::de(), std::vector<double>{0.5, 0.9}) ==
          doctest::Approx(std::log(5.0)).epsilon(1e-12));

    // degenerate inputs are clamped, never infinite
    for (auto spec : {GcSpec::fisher(), GcSpec::stouffer(), GcSpec::de(), GcSpec::cauchy(),
                      GcSpec::harmonic_mean(), GcSpec::pareto(2.0)}) {
        CHECK(std::isfinite(gc_eval(spec, std::vector<double>{0.0, 1.0})));
    }
}

TEST_CASE("independent null cdf closed forms") {
    CHECK(independent_null_cdf(GcSpec::min(), 3, 0.1) == doctest::Approx(0.271).epsilon(1e-12));
    CHECK(independent_null_cdf(GcSpec::stouffer(), 2, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(independent_null_cdf(GcSpec::cauchy(), 5, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(independent_null_cdf(GcSpec::fisher(), 2, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // Fisher: -2 * statistic is chi-square with 2k df
    CHECK(independent_null_cdf(GcSpec::fisher(), 3, -3.65) ==
          doctest::Approx(stats::chi_square_sf(7.3, 6)).epsilon(1e-12));
}

TEST_CASE("independent combinations match frozen oracles") {
    // reference values from an independent scipy evaluation
    CHECK(combine_independent(GcSpec::fisher(), std::vector<double>{0.05, 0.05}) ==
          doctest::Approx(0.017478661367769956).epsilon(1e-10));
    CHECK(combine_independent(GcSpec::stouffer(), std::vector<double>{0.1, 0.2, 0.3}) ==
          doctest::Approx(0.0631846503341941).epsilon(1e-10));
    CHECK(combine_independent(GcSpec::cauchy(), std::vector<double>{0.05, 0.5, 0.9}) ==
          doctest::Approx(0.23795604723451766).epsilon(1e-10));
}

TEST_CASE("laplace convolution cdf") {
    // k = 1 reduces to the standard Laplace cdf
    for (double x : {-2.0, -0.3, 0.0, 0.7, 4.0})
        CHECK(laplace_sum_cdf(x, 1) == doctest::Approx(stats::laplace_cdf(x)).epsilon(1e-13));
    // symmetry about zero
    for (int k : {2, 3, 6})
        for (double x : {0.4, 1.1, 2.8})
            CHECK(laplace_sum_cdf(-x, k) == doctest::Approx(1.0 - laplace_sum_cdf(x, k)).epsilon(1e-12));
    // k = 2: survival 0.25 * exp(-x) * (x + 2) on x >= 0 (exact convolution)
    CHECK(laplace_sum_cdf(1.5, 2) ==
          doctest::Approx(1.0 - 0.25 * std::exp(-1.5) * 3.5).epsilon(1e-13));
    // reference values from an independent mpmath quadrature oracle
    CHECK(laplace_sum_cdf(1.5, 2) == doctest::Approx(0.8047611155959116).epsilon(1e-6));
    CHECK(laplace_sum_cdf(-0.7, 2) == doctest::Approx(0.3351950801367977).epsilon(1e-6));
    CHECK(laplace_sum_cdf(2.0, 3) == doctest::Approx(0.8139139853343638).epsilon(1e-6));
    CHECK_THROWS_AS((void)laplace_sum_cdf(0.0, 0), std::invalid_argument);

    // Monte Carlo cross-check at k = 3
    Rng rng(314159);
    const int n = 200'000;
    int below = 0;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += stats::laplace_quantile(rng.uniform());
        if (s <= 2.0) ++below;
    }
    double se = std::sqrt(0.814 * 0.186 / n);
    CHECK(std::fabs(static_cast<double>(below) / n - 0.8139139853) <= 3.0 * se);
}

TEST_CASE("combined p-values are uniform under independent uniforms") {
    std::vector<GcSpec> specs = {GcSpec::fisher(),        GcSpec::stouffer(), GcSpec::de(),
                                 GcSpec::min(),           GcSpec::cauchy(),   GcSpec::harmonic_mean(),
                                 GcSpec::pareto(2.0)};
    const int reps = 20'000;
    const double crit = 1.6276 / std::sqrt(static_cast<double>(reps));  // KS, alpha = 0.01
    std::uint64_t tag = 0;
    for (const auto& spec : specs) {
        for (int k : {2, 3, 5}) {
            Rng rng = Rng::stream(5150, tag++);
            std::vector<double> pc(reps);
            std::vector<double> p(static_cast<std::size_t>(k));
            for (int r = 0; r < reps; ++r) {
                for (auto& pi : p) pi = rng.uniform();
                pc[static_cast<std::size_t>(r)] = combine_independent(spec, p);
            }
            INFO(spec.label() << " k=" << k);
            CHECK(ks_against_uniform(pc) <= crit);
        }
    }
}

TEST_CASE("combined p-values increase with every component") {
    std::vector<GcSpec> specs = {GcSpec::fisher(), GcSpec::stouffer(),      GcSpec::de(),
                                 GcSpec::min(),    GcSpec::cauchy(),        GcSpec::harmonic_mean(),
                                 GcSpec::pareto(1.5)};
    for (const auto& spec : specs) {
        double prev = -1.0;
        for (double p1 = 0.02; p1 < 1.0; p1 += 0.02) {
            double pc = combine_independent(spec, std::vector<double>{p1, 0.4, 0.7});
            INFO(spec.label() << " p1=" << p1);
            // Monte Carlo tails for HM/Pareto carry sampling granularity
            double slack = spec.decreasing() ? 5e-3 : 1e-12;
            CHECK(pc >= prev - slack);
            prev = pc;
        }
    }
}

TEST_CASE("weighted Cauchy with equal weights equals the unweighted form") {
    Rng rng(99);
    for (int r = 0; r < 1000; ++r) {
        std::vector<double> p = {rng.uniform(), rng.uniform(), rng.uniform()};
        GcSpec eq = GcSpec::cauchy({1.0 / 3, 1.0 / 3, 1.0 / 3});
        CHECK(std::fabs(combine_independent(eq, p) - combine_independent(GcSpec::cauchy(), p)) <=
              1e-10);
    }
}

TEST_CASE("Pareto with unit exponent is the harmonic-mean statistic") {
    Rng rng(123);
    for (int r = 0; r < 200; ++r) {
        std::vector<double> p = {rng.uniform(), rng.uniform()};
        CHECK(gc_eval(GcSpec::pareto(1.0), p) ==
              doctest::Approx(gc_eval(GcSpec::harmonic_mean(), p)).epsilon(1e-12));
        // null tails come from two independent Monte Carlo caches
        CHECK(std::fabs(combine_independent(GcSpec::pareto(1.0), p) -
                        combine_independent(GcSpec::harmonic_mean(), p)) <= 0.01);
    }
}

TEST_CASE("Monte Carlo null tails are decreasing and hit the endpoints") {
    for (auto spec : {GcSpec::harmonic_mean(), GcSpec::pareto(2.0)}) {
        // the statistic is at least k, so the upper tail there is 1
        CHECK(independent_null_cdf(spec, 2, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
        double prev = 1.0;
        for (double s = 2.0; s < 5000.0; s *= 1.7) {
            double t = independent_null_cdf(spec, 2, s);
            CHECK(t <= prev + 1e-15);
            prev = t;
        }
        CHECK(prev < 0.05);
    }
}

TEST_CASE("specification validation") {
    CHECK_THROWS_AS((void)gc_eval(GcSpec::fisher(), std::vector<double>{}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gc_eval(GcSpec::cauchy({0.5, 0.5}), std::vector<double>{0.1, 0.2, 0.3}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gc_eval(GcSpec::cauchy({0.5, 0.2}), std::vector<double>{0.1, 0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gc_eval(GcSpec::cauchy({1.5, -0.5}), std::vector<double>{0.1, 0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)gc_eval(GcSpec::pareto(0.0), std::vector<double>{0.1, 0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)independent_null_cdf(GcSpec::fisher(), 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)gc_kind_from_name("tippett"), std::invalid_argument);
}

TEST_CASE("kind names round trip") {
    for (auto kind : {GcKind::Fisher, GcKind::Stouffer, GcKind::DE, GcKind::Min, GcKind::Cauchy,
                      GcKind::HarmonicMean, GcKind::Pareto})
        CHECK(gc_kind_from_name(gc_kind_name(kind)) == kind);
    CHECK(gc_kind_from_name("stou") == GcKind::Stouffer);
    CHECK(gc_kind_from_name("Gcmin") == GcKind::Min);
    CHECK(GcSpec::pareto(2.0).label() == "Pareto(2)");
    CHECK(GcSpec::de().label() == "DE");
}
