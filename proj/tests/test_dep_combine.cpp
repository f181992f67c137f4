#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "depcomb/dep_combine.hpp"
#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <vector>

using namespace depcomb;

namespace {

// Perfectly positively dependent margins: every component equals the same
// uniform draw.
class ComonotoneSampler final : public PValueSampler {
public:
    explicit ComonotoneSampler(int k) : k_(k) {}
    int dim() const override { return k_; }
    void sample(std::uint64_t seed, std::uint64_t b, std::span<double> out) const override {
        Rng rng = Rng::stream(seed, 0xc0c0ULL, b);
        double u = rng.uniform();
        for (auto& v : out) v = u;
    }

private:
    int k_;
};

}  // namespace

TEST_CASE("empirical cdf evaluation on a tiny sample") {
    EmpiricalNullCdf cdf{{1.0, 2.0, 2.0, 5.0}, GcSpec::fisher(), 2};
    CHECK(cdf.B() == 4);
    CHECK(cdf.eval(0.5) == doctest::Approx(0.0));
    CHECK(cdf.eval(1.0) == doctest::Approx(0.25));
    CHECK(cdf.eval(2.0) == doctest::Approx(0.75));
    CHECK(cdf.eval(4.9) == doctest::Approx(0.75));
    CHECK(cdf.eval(5.0) == doctest::Approx(1.0));
    CHECK(cdf.eval(9.0) == doctest::Approx(1.0));
    CHECK(cdf.eval_upper(2.0) == doctest::Approx(0.75));
    CHECK(cdf.eval_upper(5.1) == doctest::Approx(0.0));
    CHECK(cdf.eval_upper(0.0) == doctest::Approx(1.0));
    CHECK(cdf.eval_smoothed(2.0) == doctest::Approx(4.0 / 5.0));

    EmpiricalNullCdf one{{3.0}, GcSpec::min(), 1};
    CHECK(one.eval(2.0) == doctest::Approx(0.0));
    CHECK(one.eval(3.0) == doctest::Approx(1.0));
}

TEST_CASE("bootstrap null under independence recovers the closed form") {
    const int k = 3, B = 100'000;
    IidUniformSampler sampler(k);
    auto cdf = build_empirical_null(sampler, GcSpec::fisher(), B, 4242);
    REQUIRE(cdf.B() == B);
    CHECK(std::is_sorted(cdf.sorted_values.begin(), cdf.sorted_values.end()));
    // P(sum log p <= z) = P(chi2_{2k} >= -2z)
    double sup = 0.0;
    for (double z = -18.0; z < 0.0; z += 0.05)
        sup = std::max(sup, std::fabs(cdf.eval(z) - stats::chi_square_sf(-2.0 * z, 2 * k)));
    CHECK(sup <= 0.01);

    // adjusted p-values match the analytic combination up to binomial noise
    Rng rng(777);
    for (int r = 0; r < 50; ++r) {
        std::vector<double> p = {rng.uniform(), rng.uniform(), rng.uniform()};
        double exact = combine_independent(GcSpec::fisher(), p);
        double approx = combine_dependent(GcSpec::fisher(), p, cdf);
        double se = std::sqrt(exact * (1.0 - exact) / B);
        CHECK(std::fabs(approx - exact) <= 3.0 * se + 2.0 / B);
    }
}

TEST_CASE("bootstrap builds are deterministic and thread-count invariant") {
    GaussianCopulaSampler sampler(0.5, 4);
    auto a = build_empirical_null(sampler, GcSpec::stouffer(), 5000, 31, 1);
    auto b = build_empirical_null(sampler, GcSpec::stouffer(), 5000, 31, 1);
    auto c = build_empirical_null(sampler, GcSpec::stouffer(), 5000, 31, 3);
    REQUIRE(a.B() == b.B());
    REQUIRE(a.B() == c.B());
    for (int i = 0; i < a.B(); ++i) {
        CHECK(a.sorted_values[static_cast<std::size_t>(i)] ==
              b.sorted_values[static_cast<std::size_t>(i)]);
        CHECK(a.sorted_values[static_cast<std::size_t>(i)] ==
              c.sorted_values[static_cast<std::size_t>(i)]);
    }
    auto d = build_empirical_null(sampler, GcSpec::stouffer(), 5000, 32, 1);
    CHECK(a.sorted_values != d.sorted_values);
}

TEST_CASE("comonotone dependence: the adjusted Fisher p-value is the common p") {
    const int B = 20'000;
    ComonotoneSampler sampler(3);
    auto cdf = build_empirical_null(sampler, GcSpec::fisher(), B, 6);
    for (double q : {0.01, 0.1, 0.5, 0.9}) {
        std::vector<double> p = {q, q, q};
        double adj = combine_dependent(GcSpec::fisher(), p, cdf);
        double se = std::sqrt(q * (1.0 - q) / B);
        CHECK(std::fabs(adj - q) <= 3.0 * se + 2.0 / B);
    }
}

TEST_CASE("extreme statistics map to the boundary of the step function") {
    IidUniformSampler sampler(2);
    auto cdf = build_empirical_null(sampler, GcSpec::min(), 1000, 8);
    std::vector<double> tiny = {1e-12, 1e-12};
    CHECK(combine_dependent(GcSpec::min(), tiny, cdf) == doctest::Approx(0.0));
    std::vector<double> dull = {1.0, 1.0};
    CHECK(combine_dependent(GcSpec::min(), dull, cdf) == doctest::Approx(1.0));

    // HM uses the upper tail: strong evidence still maps near zero
    auto hm = build_empirical_null(sampler, GcSpec::harmonic_mean(), 1000, 8);
    CHECK(combine_dependent(GcSpec::harmonic_mean(), tiny, hm) == doctest::Approx(0.0));
    CHECK(combine_dependent(GcSpec::harmonic_mean(), dull, hm) == doctest::Approx(1.0));
}

TEST_CASE("gaussian copula sampler has uniform margins and target correlation") {
    const int n = 10'000;
    SUBCASE("independent case") {
        GaussianCopulaSampler sampler(0.0, 2);
        double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
        std::vector<double> m1(n);
        for (int b = 0; b < n; ++b) {
            auto p = sampler.draw(101, static_cast<std::uint64_t>(b));
            double x = stats::std_normal_quantile(p[0]);
            double y = stats::std_normal_quantile(p[1]);
            sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
            m1[static_cast<std::size_t>(b)] = p[0];
        }
        double corr = (sxy / n - sx / n * sy / n) /
                      std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
        CHECK(std::fabs(corr) <= 0.03);
    }
    SUBCASE("strong positive dependence") {
        GaussianCopulaSampler sampler(0.99, 2);
        double gap = 0.0;
        for (int b = 0; b < n; ++b) {
            auto p = sampler.draw(102, static_cast<std::uint64_t>(b));
            gap += std::fabs(p[0] - p[1]);
        }
        CHECK(gap / n < 0.05);
    }
    SUBCASE("marginal uniformity at rho = 0.7, k = 3") {
        GaussianCopulaSampler sampler(0.7, 3);
        std::vector<double> u(n);
        for (int b = 0; b < n; ++b) u[static_cast<std::size_t>(b)] = sampler.draw(103, static_cast<std::uint64_t>(b))[2];
        std::sort(u.begin(), u.end());
        double d = 0.0;
        for (int i = 0; i < n; ++i)
            d = std::max(d, std::fabs(u[static_cast<std::size_t>(i)] - (i + 0.5) / n));
        CHECK(d <= 1.63 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("copula construction rejects invalid correlation") {
    CHECK_THROWS_AS(GaussianCopulaSampler(1.0, 2), std::domain_error);
    CHECK_THROWS_AS(GaussianCopulaSampler(-1.0, 3), std::domain_error);
    // equicorrelation must keep the matrix positive definite
    CHECK_THROWS_AS(GaussianCopulaSampler(-0.6, 3), std::domain_error);
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 1.5, 1.5, 1.0;
    CHECK_THROWS_AS(GaussianCopulaSampler{bad}, std::domain_error);
}

TEST_CASE("dependence adjustment repairs the size of naive combination") {
    const double rho = 0.9;
    const int k = 3, B = 10'000, reps = 10'000;
    GaussianCopulaSampler sampler(rho, k);
    for (auto spec : {GcSpec::fisher(), GcSpec::stouffer()}) {
        auto cdf = build_empirical_null(sampler, spec, B, 2024);
        int naive_rej = 0, adj_rej = 0;
        std::vector<double> p(static_cast<std::size_t>(k));
        for (int r = 0; r < reps; ++r) {
            sampler.sample(555, static_cast<std::uint64_t>(r), p);
            if (combine_independent(spec, p) <= 0.05) ++naive_rej;
            if (combine_dependent(spec, p, cdf) <= 0.05) ++adj_rej;
        }
        double naive = static_cast<double>(naive_rej) / reps;
        double adj = static_cast<double>(adj_rej) / reps;
        INFO(spec.label() << " naive=" << naive << " adjusted=" << adj);
        CHECK(naive > 0.07);  // assumes independence, badly anti-conservative
        CHECK(std::fabs(adj - 0.05) <= 0.01);
    }
}

TEST_CASE("null cache round trips through disk") {
    GaussianCopulaSampler sampler(0.4, 2);
    auto cdf = build_empirical_null(sampler, GcSpec::pareto(2.5), 300, 77);
    auto path = std::filesystem::temp_directory_path() / "depcomb_null_roundtrip.csv";
    cdf.save(path);
    auto back = EmpiricalNullCdf::load(path);
    std::filesystem::remove(path);
    CHECK(back.k == cdf.k);
    CHECK(back.spec.kind == cdf.spec.kind);
    CHECK(back.spec.eta == doctest::Approx(cdf.spec.eta).epsilon(1e-15));
    REQUIRE(back.B() == cdf.B());
    for (int i = 0; i < cdf.B(); ++i)
        CHECK(back.sorted_values[static_cast<std::size_t>(i)] ==
              doctest::Approx(cdf.sorted_values[static_cast<std::size_t>(i)]).epsilon(1e-15));
}

TEST_CASE("dependent combination validates its inputs") {
    IidUniformSampler sampler(3);
    auto cdf = build_empirical_null(sampler, GcSpec::pareto(2.0), 100, 5);
    std::vector<double> p2 = {0.1, 0.2};
    std::vector<double> p3 = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS((void)combine_dependent(GcSpec::pareto(2.0), p2, cdf), std::invalid_argument);
    CHECK_THROWS_AS((void)combine_dependent(GcSpec::fisher(), p3, cdf), std::invalid_argument);
    CHECK_THROWS_AS((void)combine_dependent(GcSpec::pareto(3.0), p3, cdf), std::invalid_argument);
    CHECK(combine_dependent(GcSpec::pareto(2.0), p3, cdf) >= 0.0);
}
