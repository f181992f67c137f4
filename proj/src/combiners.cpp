#include "depcomb/combiners.hpp"

#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace depcomb {

namespace {
constexpr double kClampEps = 1e-15;
constexpr int kMonteCarloCdfSamples = 1'000'000;
constexpr std::uint64_t kMonteCarloCdfSeed = 0x9c0de5eedULL;

double clamp_p(double p) { return std::clamp(p, kClampEps, 1.0 - kClampEps); }
}  // namespace

const char* gc_kind_name(GcKind kind) {
    switch (kind) {
        case GcKind::Fisher: return "Fisher";
        case GcKind::Stouffer: return "Stouffer";
        case GcKind::DE: return "DE";
        case GcKind::Min: return "Min";
        case GcKind::Cauchy: return "Cauchy";
        case GcKind::HarmonicMean: return "HM";
        case GcKind::Pareto: return "Pareto";
    }
    return "?";
}

GcKind gc_kind_from_name(const std::string& name) {
    if (name == "Fisher" || name == "fisher") return GcKind::Fisher;
    if (name == "Stouffer" || name == "stouffer" || name == "Stou" || name == "stou")
        return GcKind::Stouffer;
    if (name == "DE" || name == "de") return GcKind::DE;
    if (name == "Min" || name == "min" || name == "Gcmin" || name == "gcmin") return GcKind::Min;
    if (name == "Cauchy" || name == "cauchy") return GcKind::Cauchy;
    if (name == "HM" || name == "hm" || name == "harmonic-mean") return GcKind::HarmonicMean;
    if (name == "Pareto" || name == "pareto") return GcKind::Pareto;
    throw std::invalid_argument("unknown combination method: " + name);
}

void GcSpec::validate(std::size_t k) const {
    if (k < 1) throw std::invalid_argument("GcSpec: need at least one p-value");
    if (kind == GcKind::Cauchy && !weights.empty()) {
        if (weights.size() != k)
            throw std::invalid_argument("GcSpec: Cauchy weight count does not match p-value count");
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("GcSpec: negative Cauchy weight");
            sum += w;
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("GcSpec: Cauchy weights must sum to 1");
    }
    if (kind == GcKind::Pareto && !(eta > 0.0))
        throw std::invalid_argument("GcSpec: Pareto eta must be positive");
}

std::string GcSpec::label() const {
    if (kind == GcKind::Pareto) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "Pareto(%g)", eta);
        return buf;
    }
    return gc_kind_name(kind);
}

double gc_eval(const GcSpec& spec, std::span<const double> p) {
    const std::size_t k = p.size();
    spec.validate(k);
    double s = 0.0;
    switch (spec.kind) {
        case GcKind::Fisher:
            for (double pi : p) s += std::log(clamp_p(pi));
            return s;
        case GcKind::Stouffer:
            for (double pi : p) s += stats::std_normal_quantile(clamp_p(pi));
            return s;
        case GcKind::DE:
            for (double pi : p) s += stats::laplace_quantile(clamp_p(pi));
            return s;
        case GcKind::Min: {
            double m = 1.0;
            for (double pi : p) m = std::min(m, clamp_p(pi));
            return m;
        }
        case GcKind::Cauchy: {
            const double weq = 1.0 / static_cast<double>(k);
            for (std::size_t i = 0; i < k; ++i) {
                double w = spec.weights.empty() ? weq : spec.weights[i];
                s += w * stats::cauchy_quantile(clamp_p(p[i]));
            }
            return s;
        }
        case GcKind::HarmonicMean:
            for (double pi : p) s += 1.0 / clamp_p(pi);
            return s;
        case GcKind::Pareto:
            for (double pi : p) s += std::pow(clamp_p(pi), -spec.eta);
            return s;
    }
    throw std::logic_error("gc_eval: unreachable");
}

double laplace_sum_cdf(double x, int k) {
    if (k < 1) throw std::invalid_argument("laplace_sum_cdf: k must be positive");
    const double ax = std::fabs(x);
    // Density of the k-fold convolution on x >= 0:
    //   f_k(x) = sum_{m=0}^{k-1} c_m x^m e^{-x},
    //   c_m = 2^m (2k-2-m)! / ((k-1)! 2^{2k-1} m! (k-1-m)!).
    // Upper tail integrates termwise via the incomplete gamma recurrence.
    double sf = 0.0;
    for (int m = 0; m <= k - 1; ++m) {
        double logc = m * std::log(2.0) + std::lgamma(2.0 * k - 1.0 - m) -
                      std::lgamma(static_cast<double>(k)) - (2 * k - 1) * std::log(2.0) -
                      std::lgamma(m + 1.0) - std::lgamma(static_cast<double>(k - m));
        // int_x^inf t^m e^-t dt = m! e^-x sum_{i=0}^m x^i / i!
        double tail = 0.0;
        double term = 1.0;  // x^i / i!
        for (int i = 0; i <= m; ++i) {
            tail += term;
            term *= ax / static_cast<double>(i + 1);
        }
        sf += std::exp(logc + std::lgamma(m + 1.0) - ax) * tail;
    }
    return x >= 0.0 ? 1.0 - sf : sf;
}

namespace {

// Sorted Monte Carlo null sample of the HM/Pareto statistic, cached per
// (kind, k, eta). Built once under a lock, then read concurrently.
const std::vector<double>& mc_null_sample(const GcSpec& spec, int k) {
    static std::mutex mu;
    static std::map<std::tuple<GcKind, int, double>, std::vector<double>> cache;
    std::scoped_lock lock(mu);
    auto key = std::make_tuple(spec.kind, k, spec.kind == GcKind::Pareto ? spec.eta : 1.0);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    double eta = spec.kind == GcKind::Pareto ? spec.eta : 1.0;
    Rng rng = Rng::stream(kMonteCarloCdfSeed, static_cast<std::uint64_t>(spec.kind) * 1000 + k,
                          static_cast<std::uint64_t>(eta * 4096.0));
    std::vector<double> draws(kMonteCarloCdfSamples);
    for (auto& g : draws) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += std::pow(rng.uniform(), -eta);
        g = s;
    }
    std::sort(draws.begin(), draws.end());
    return cache.emplace(key, std::move(draws)).first->second;
}

}  // namespace

double independent_null_cdf(const GcSpec& spec, int k, double s) {
    if (k < 1) throw std::invalid_argument("independent_null_cdf: k must be positive");
    spec.validate(static_cast<std::size_t>(k));
    switch (spec.kind) {
        case GcKind::Fisher:
            return s >= 0.0 ? 1.0 : stats::chi_square_sf(-2.0 * s, 2 * k);
        case GcKind::Stouffer:
            return stats::std_normal_cdf(s / std::sqrt(static_cast<double>(k)));
        case GcKind::Min: {
            double t = std::clamp(s, 0.0, 1.0);
            return 1.0 - std::pow(1.0 - t, k);
        }
        case GcKind::Cauchy:
            return stats::cauchy_cdf(s);
        case GcKind::DE:
            return laplace_sum_cdf(s, k);
        case GcKind::HarmonicMean:
        case GcKind::Pareto: {
            const auto& draws = mc_null_sample(spec, k);
            auto lo = std::lower_bound(draws.begin(), draws.end(), s);
            std::size_t n_ge = draws.size() - static_cast<std::size_t>(lo - draws.begin());
            return static_cast<double>(n_ge) / static_cast<double>(draws.size());
        }
    }
    throw std::logic_error("independent_null_cdf: unreachable");
}

double combine_independent(const GcSpec& spec, std::span<const double> p) {
    return independent_null_cdf(spec, static_cast<int>(p.size()), gc_eval(spec, p));
}

}  // namespace depcomb
