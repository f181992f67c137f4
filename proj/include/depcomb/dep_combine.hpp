#pragma once

#include "depcomb/combiners.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace depcomb {

// Joint sampler of null p-vectors. Implementations must be stateless with
// respect to the replicate index: sample(seed, b) is a pure function, so
// replicates can run in any order or in parallel.
class PValueSampler {
public:
    virtual ~PValueSampler() = default;
    virtual int dim() const = 0;
    // Writes dim() marginally-uniform values into out.
    virtual void sample(std::uint64_t seed, std::uint64_t b, std::span<double> out) const = 0;

    std::vector<double> draw(std::uint64_t seed, std::uint64_t b) const {
        std::vector<double> p(static_cast<std::size_t>(dim()));
        sample(seed, b, p);
        return p;
    }
};

class IidUniformSampler final : public PValueSampler {
public:
    explicit IidUniformSampler(int k) : k_(k) {}
    int dim() const override { return k_; }
    void sample(std::uint64_t seed, std::uint64_t b, std::span<double> out) const override;

private:
    int k_;
};

// Gaussian copula with a given correlation matrix; marginals are exactly
// uniform. The equicorrelated constructor requires rho in (-1, 1) and a
// positive definite matrix (rho > -1/(k-1)).
class GaussianCopulaSampler final : public PValueSampler {
public:
    GaussianCopulaSampler(double rho, int k);
    explicit GaussianCopulaSampler(const Eigen::MatrixXd& correlation);
    int dim() const override { return static_cast<int>(factor_.rows()); }
    void sample(std::uint64_t seed, std::uint64_t b, std::span<double> out) const override;

private:
    Eigen::MatrixXd factor_;  // square root of the correlation matrix
};

// Sorted bootstrap sample of g_c statistics: the empirical null CDF
// \tilde G_c^B of Algorithm-1 style combination.
struct EmpiricalNullCdf {
    std::vector<double> sorted_values;
    GcSpec spec;
    int k = 0;

    int B() const { return static_cast<int>(sorted_values.size()); }

    // (#{values <= z}) / B; right-continuous step function on {0, 1/B, ..., 1}.
    double eval(double z) const;
    // (#{values >= z}) / B; the upper-tail analogue used by HM/Pareto.
    double eval_upper(double z) const;
    // Optional add-one smoothing (1 + #{<= z})/(B + 1); off by default
    // everywhere, provided for downstream log transforms.
    double eval_smoothed(double z) const;

    void save(const std::filesystem::path& path) const;
    static EmpiricalNullCdf load(const std::filesystem::path& path);
};

// Algorithm-1 steps 1-3: B joint null draws, transformed by g_c and sorted.
// Replicate b uses the substream (seed, b), so the result is identical for
// any degree of parallelism.
EmpiricalNullCdf build_empirical_null(const PValueSampler& sampler, const GcSpec& spec, int B,
                                      std::uint64_t seed, int threads = 1);

// Eq-(3) style dependence-adjusted combined p-value.
double combine_dependent(const GcSpec& spec, std::span<const double> p,
                         const EmpiricalNullCdf& cdf);

}  // namespace depcomb
