#pragma once

#include "depcomb/combiners.hpp"
#include "depcomb/dep_combine.hpp"
#include "depcomb/special_fns.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace depcomb::mb {

// Response, covariates, OTU counts and the derived composition matrix.
struct OtuDesign {
    Eigen::VectorXd Y;
    Eigen::MatrixXd X;  // n x q, first column typically the intercept
    Eigen::MatrixXd Z;  // n x p nonnegative counts
    Eigen::MatrixXd O;  // n x p row-normalized compositions
    bool binary = false;

    int n() const { return static_cast<int>(Y.size()); }
    int q() const { return static_cast<int>(X.cols()); }
    int p() const { return static_cast<int>(Z.cols()); }

    // Validates dimensions, rejects all-zero count rows, computes O.
    static OtuDesign make(Eigen::VectorXd Y, Eigen::MatrixXd X, Eigen::MatrixXd Z, bool binary);
};

// Bray-Curtis dissimilarity between composition rows:
// d_ij = sum_k |o_ik - o_jk| / sum_k (o_ik + o_jk).
Eigen::MatrixXd bray_curtis(const Eigen::MatrixXd& O);

// Double-centering transform K = -1/2 (I - 11'/n) D∘D (I - 11'/n).
Eigen::MatrixXd kernel_from_distance(const Eigen::MatrixXd& D);

struct NullModelFit {
    bool binary = false;
    Eigen::VectorXd alpha;   // coefficient estimates, length q
    Eigen::VectorXd fitted;  // mu-hat
    Eigen::VectorXd resid;   // Y - fitted
    double sigma2 = 0.0;     // continuous only
    double phi = 1.0;        // dispersion: sigma2 (linear) or 1 (logistic)
    Eigen::MatrixXd X;       // design, kept for score-test projections
};

NullModelFit fit_null_linear(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X);
NullModelFit fit_null_logistic(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X,
                               double tol = 1e-8, int max_iter = 50);
NullModelFit fit_null(const OtuDesign& design);

struct TestResult {
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
};

// Q = (Y - mu)' K (Y - mu) / (2 phi).
double mirkat_statistic(const NullModelFit& fit, const Eigen::MatrixXd& K);

// Kernel score test. The eigenweights come from the residual-covariance-
// projected kernel, so they depend only on (X, K) for the linear model and
// additionally on the fitted working variances for the logistic model.
// The linear case accounts for the estimated residual variance exactly:
// Q >= q is the event r'(K - cI)r >= 0 with c = 2q/(n - q_x), a signed
// mixture referenced at zero. The logistic case (known dispersion) uses the
// weighted chi-square mixture tail.
class MirkatContext {
public:
    MirkatContext(const NullModelFit& fit, const Eigen::MatrixXd& K);
    TestResult run(const NullModelFit& fit) const;
    const stats::ChiSqMixture& mixture() const { return mix_; }

private:
    const Eigen::MatrixXd* K_;
    stats::ChiSqMixture mix_;
    Eigen::VectorXd spectrum_;  // linear case: eigenvalues of P0 K P0 on range(P0)
    bool continuous_ = false;
};

TestResult mirkat_pvalue(const NullModelFit& fit, const Eigen::MatrixXd& K);

// Per-OTU two-sided score-test p-values p_k = 2(1 - Phi(|z_k|)) with
// z_k = O_k'(Y - mu) / sd. Zero-variance columns report p = 1.
Eigen::VectorXd marginal_otu_pvalues(const NullModelFit& fit, const Eigen::MatrixXd& O);

double simes_pvalue(std::span<const double> p);

// max over j = 1..h of sqrt(m) (j/m - p_(j)) / sqrt(p_(j)(1 - p_(j))).
double higher_criticism(std::span<const double> p, int h);

// Minimum over HC(h) (unweighted and abundance-weighted) and Simes,
// calibrated by Monte Carlo under the joint null law of the marginal
// z-scores. Component p-values use (1+count)/(1+resamples).
class MihcContext {
public:
    MihcContext(const NullModelFit& fit, const Eigen::MatrixXd& O,
                std::vector<int> grid = {1, 3, 5, 10, 20});

    // z-scores of an arbitrary refit that shares this context's X (and, for
    // the logistic case, this context's fitted variances).
    Eigen::VectorXd zscores(const NullModelFit& fit) const;

    TestResult run(const Eigen::VectorXd& z_obs, int resamples, std::uint64_t stream_seed) const;
    TestResult run(const NullModelFit& fit, int resamples, std::uint64_t stream_seed) const {
        return run(zscores(fit), resamples, stream_seed);
    }

    const std::vector<int>& grid() const { return grid_; }

private:
    Eigen::MatrixXd simulate_factor_;  // p x n: z* = simulate_factor_ * g
    Eigen::MatrixXd score_scaled_;     // n x p: z = score_scaled_' resid / sd_scale
    Eigen::VectorXd sd_;               // marginal score standard deviations
    Eigen::VectorXd hc_weights_;       // abundance weights, mean 1
    std::vector<int> grid_;
    std::vector<int> degenerate_;      // zero-variance OTU columns
    bool binary_ = false;
    friend Eigen::VectorXd marginal_otu_pvalues(const NullModelFit&, const Eigen::MatrixXd&);
};

TestResult mihc_test(const NullModelFit& fit, const Eigen::MatrixXd& O,
                     const std::vector<int>& grid, int resamples, std::uint64_t seed);

// Algorithm-2 step 1: resample the response from the fitted null model,
// keeping X and Z fixed. Deterministic in (seed, b).
OtuDesign parametric_bootstrap_design(const NullModelFit& fit, const OtuDesign& design,
                                      std::uint64_t b, std::uint64_t seed);

struct CombinedOptions {
    int B = 500;
    double alpha = 0.05;
    int mihc_resamples = 500;
    std::vector<int> hc_grid = {1, 3, 5, 10, 20};
    int threads = 1;
};

struct CombinedMethodResult {
    GcSpec spec;
    double p_dependent = 1.0;    // Algorithm-2 combined p-value
    double p_independent = 1.0;  // same g_c referenced to the iid-uniform null
    bool reject = false;
};

struct CombinedResult {
    TestResult mirkat;
    TestResult mihc;
    std::vector<CombinedMethodResult> methods;
    Eigen::MatrixXd bootstrap_pvalues;  // B x 2 columns (p_Q^b, p_M^b)
    std::uint64_t seed = 0;
};

// Algorithm 2: fit the null once, evaluate both component tests on the
// observed data and on B parametric-bootstrap replicates, then reference
// each requested g_c against its bootstrap empirical null.
CombinedResult combined_microbiome_test(const OtuDesign& design, const std::vector<GcSpec>& specs,
                                        const CombinedOptions& opt, std::uint64_t seed);

}  // namespace depcomb::mb
