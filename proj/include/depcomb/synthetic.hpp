#pragma once

#include "depcomb/combiners.hpp"
#include "depcomb/dep_combine.hpp"
#include "depcomb/microbiome.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace depcomb::sim {

// Dirichlet-multinomial generator parameters. dispersion is the
// over-dispersion theta in [0,1); theta -> 0 degenerates to a plain
// multinomial.
struct DmParams {
    Eigen::VectorXd mean_props;
    double dispersion = 0.02;
    int depth = 1000;

    // Synthetic default: mean proportions follow a power law with exponent
    // 1.5 over p OTUs.
    static DmParams power_law_default(int p, double dispersion = 0.02, int depth = 1000);
    void validate() const;
};

// n x p count matrix; each row draws pi ~ Dirichlet(mean * (1-theta)/theta)
// then counts ~ Multinomial(depth, pi). Rows sum to depth.
Eigen::MatrixXd dirichlet_multinomial_sample(const DmParams& params, int n, std::uint64_t seed);

enum class SignalStructure { Phylogenetic, Abundance, Random };
SignalStructure structure_from_name(const std::string& name);
const char* structure_name(SignalStructure s);

// Indices of the ceil(K% * p) columns with the largest totals.
std::vector<int> signal_set_abundance(const Eigen::MatrixXd& Z, double k_percent);
// Seeded uniform sample of ceil(K% * p) column indices.
std::vector<int> signal_set_random(int p, double k_percent, std::uint64_t seed);
// Average-linkage clustering of OTU composition profiles (Bray-Curtis over
// transposed compositions) into n_clusters groups. Clusters partition
// {0..p-1} and are ordered by their smallest member index.
std::vector<std::vector<int>> phylo_clusters(const Eigen::MatrixXd& O, int n_clusters = 20);
// The cluster whose size is closest to 5% of p (ties -> lowest index).
std::vector<int> signal_set_phylogenetic(const Eigen::MatrixXd& O, int n_clusters = 20);

std::vector<int> signal_set(SignalStructure structure, const Eigen::MatrixXd& Z,
                            const Eigen::MatrixXd& O, double k_percent, std::uint64_t seed);

// Covariates [1, X1, X2] with X1 ~ N(0,1) and X2 ~ Bernoulli(0.5).
Eigen::MatrixXd generate_covariates(int n, std::uint64_t seed);

// y = 0.5 X1 + 0.5 X2 + beta * scale(sum_{j in A} Z_j) + eps (continuous) or
// the same linear predictor through the logit link (binary).
Eigen::VectorXd generate_response(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                                  const std::vector<int>& signal, double beta, bool binary,
                                  std::uint64_t seed);

// The synthetic pair construction where both margins are standard Cauchy but
// the signs are coupled: T1 = X1, T2 = sign(T1)|X2|; p_i = 1 - F_CC(T_i).
std::vector<std::pair<double, double>> cauchy_counterexample_sample(int reps, std::uint64_t seed);

// Sampler form of the same law, for Algorithm-1 style adjustment.
class CauchyCounterexampleSampler final : public PValueSampler {
public:
    int dim() const override { return 2; }
    void sample(std::uint64_t seed, std::uint64_t b, std::span<double> out) const override;
};

struct Scenario {
    SignalStructure structure = SignalStructure::Abundance;
    double sparsity_percent = 1.0;
    double beta = 0.0;
    int n = 100;
    int p = 50;
    bool binary = false;
    int replications = 500;
    std::uint64_t seed = 1;
    std::vector<GcSpec> methods;  // defaults to Fisher/Stou/DE/Gcmin/Cauchy
    int B = 200;
    int mihc_resamples = 200;
    double alpha = 0.05;
    int threads = 1;
    DmParams dm;  // mean_props empty -> power-law default for p

    static Scenario from_file(const std::filesystem::path& path);
    std::vector<GcSpec> effective_methods() const;
    DmParams effective_dm() const;
};

struct ExperimentRow {
    std::string method;
    double alpha = 0.05;
    int rejections = 0;
    int reps = 0;
    double rate = 0.0;
    double mc_se = 0.0;
};

struct ExperimentTable {
    std::vector<ExperimentRow> rows;
    std::uint64_t seed = 0;
    double alpha = 0.05;
};

// Null rejection frequencies for the single tests, the independence-assumed
// combiners and the dependence-adjusted combiners.
ExperimentTable run_size_experiment(const Scenario& sc);
// Rejection frequencies under the alternative: singles plus
// dependence-adjusted combiners only.
ExperimentTable run_power_experiment(const Scenario& sc);

struct CounterexampleRow {
    double alpha = 0.0;
    double cauchy_size = 0.0;
    double dcauchy_size = 0.0;
};

// Size curves of the vanilla and dependence-adjusted Cauchy combinations
// under the counterexample law. The adjusted null uses a shared sample of
// null_b statistics from the exact law.
std::vector<CounterexampleRow> run_counterexample_experiment(const std::vector<double>& alphas,
                                                             int reps, int null_b,
                                                             std::uint64_t seed);

// alpha = 0.001 + 0.005 m, up to 0.3.
std::vector<double> default_alpha_grid();

}  // namespace depcomb::sim
