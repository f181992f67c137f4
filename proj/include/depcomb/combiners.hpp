#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace depcomb {

enum class GcKind { Fisher, Stouffer, DE, Min, Cauchy, HarmonicMean, Pareto };

const char* gc_kind_name(GcKind kind);
GcKind gc_kind_from_name(const std::string& name);

// Identifies a combination function: the kind, optional per-component
// weights (Cauchy only; default 1/k) and the Pareto exponent eta.
struct GcSpec {
    GcKind kind = GcKind::Fisher;
    std::vector<double> weights;  // Cauchy only; empty means equal weights
    double eta = 1.0;             // Pareto only

    static GcSpec fisher() { return {GcKind::Fisher, {}, 1.0}; }
    static GcSpec stouffer() { return {GcKind::Stouffer, {}, 1.0}; }
    static GcSpec de() { return {GcKind::DE, {}, 1.0}; }
    static GcSpec min() { return {GcKind::Min, {}, 1.0}; }
    static GcSpec cauchy(std::vector<double> w = {}) { return {GcKind::Cauchy, std::move(w), 1.0}; }
    static GcSpec harmonic_mean() { return {GcKind::HarmonicMean, {}, 1.0}; }
    static GcSpec pareto(double eta) { return {GcKind::Pareto, {}, eta}; }

    // Throws std::invalid_argument on dimension/parameter problems.
    void validate(std::size_t k) const;

    // True for kinds whose statistic shrinks as p-values shrink is false,
    // i.e. HM/Pareto where small p-values blow the statistic up.
    bool decreasing() const { return kind == GcKind::HarmonicMean || kind == GcKind::Pareto; }

    std::string label() const;
};

// Combined statistic s = g_c(p_1,...,p_k). Inputs are clamped to
// [1e-15, 1 - 1e-15] before transformation.
double gc_eval(const GcSpec& spec, std::span<const double> p);

// Null evaluation of the statistic under k iid U[0,1] components.
// For increasing kinds this is the CDF P(g <= s); for HM/Pareto the
// upper tail P(g >= s) so that stronger evidence maps to smaller output.
// Fisher/Stouffer/Min/Cauchy/DE are closed form; HM/Pareto use a seeded
// Monte Carlo sample of 10^6 draws cached per (kind, k, eta).
double independent_null_cdf(const GcSpec& spec, int k, double s);

// Eq-style independent combination: G_c(g_c(p)).
double combine_independent(const GcSpec& spec, std::span<const double> p);

// Exact CDF of the sum of k iid standard Laplace variables.
double laplace_sum_cdf(double x, int k);

}  // namespace depcomb
