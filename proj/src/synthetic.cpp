#include "depcomb/synthetic.hpp"

#include "depcomb/parallel.hpp"
#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace depcomb::sim {

namespace {
constexpr std::uint64_t kTagCounts = 0xc0117ULL;
constexpr std::uint64_t kTagCov = 0xc0fULL;
constexpr std::uint64_t kTagResp = 0x4e5ULL;
constexpr std::uint64_t kTagTest = 0x7e57ULL;
constexpr std::uint64_t kTagSignal = 0x51fULL;
}  // namespace

DmParams DmParams::power_law_default(int p, double dispersion, int depth) {
    if (p < 1) throw std::invalid_argument("DmParams: p must be positive");
    DmParams params;
    params.mean_props.resize(p);
    for (int k = 0; k < p; ++k) params.mean_props[k] = std::pow(static_cast<double>(k + 1), -1.5);
    params.mean_props /= params.mean_props.sum();
    params.dispersion = dispersion;
    params.depth = depth;
    params.validate();
    return params;
}

void DmParams::validate() const {
    if (mean_props.size() < 1) throw std::invalid_argument("DmParams: empty mean proportions");
    if ((mean_props.array() < 0.0).any())
        throw std::invalid_argument("DmParams: negative mean proportion");
    if (std::fabs(mean_props.sum() - 1.0) > 1e-8)
        throw std::invalid_argument("DmParams: mean proportions must sum to 1");
    if (!(dispersion >= 0.0 && dispersion < 1.0))
        throw std::invalid_argument("DmParams: dispersion must lie in [0,1)");
    if (depth < 1) throw std::invalid_argument("DmParams: depth must be positive");
}

Eigen::MatrixXd dirichlet_multinomial_sample(const DmParams& params, int n, std::uint64_t seed) {
    params.validate();
    if (n < 1) throw std::invalid_argument("dirichlet_multinomial_sample: n must be positive");
    const int p = static_cast<int>(params.mean_props.size());
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, p);
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, kTagCounts, static_cast<std::uint64_t>(i));
        Eigen::VectorXd pi(p);
        if (params.dispersion == 0.0) {
            pi = params.mean_props;
        } else {
            double conc = (1.0 - params.dispersion) / params.dispersion;
            double total = 0.0;
            for (int k = 0; k < p; ++k) {
                double a = params.mean_props[k] * conc;
                pi[k] = a > 0.0 ? rng.gamma(a) : 0.0;
                total += pi[k];
            }
            if (total <= 0.0) {
                pi = params.mean_props;  // pathological underflow; fall back to the mean
            } else {
                pi /= total;
            }
        }
        // Multinomial via the chain of conditional binomials.
        int remaining = params.depth;
        double mass = 1.0;
        for (int k = 0; k < p && remaining > 0; ++k) {
            if (k == p - 1) {
                Z(i, k) = remaining;
                remaining = 0;
                break;
            }
            double cond = mass > 0.0 ? std::clamp(pi[k] / mass, 0.0, 1.0) : 1.0;
            int c = rng.binomial(remaining, cond);
            Z(i, k) = c;
            remaining -= c;
            mass -= pi[k];
        }
        if (remaining > 0) Z(i, p - 1) += remaining;
    }
    return Z;
}

SignalStructure structure_from_name(const std::string& name) {
    if (name == "phylogenetic" || name == "phylo") return SignalStructure::Phylogenetic;
    if (name == "abundance") return SignalStructure::Abundance;
    if (name == "random") return SignalStructure::Random;
    throw std::invalid_argument("unknown signal structure: " + name);
}

const char* structure_name(SignalStructure s) {
    switch (s) {
        case SignalStructure::Phylogenetic: return "phylogenetic";
        case SignalStructure::Abundance: return "abundance";
        case SignalStructure::Random: return "random";
    }
    return "?";
}

namespace {
int signal_count(int p, double k_percent) {
    if (!(k_percent > 0.0 && k_percent <= 100.0))
        throw std::invalid_argument("signal set: K% must lie in (0,100]");
    int m = static_cast<int>(std::ceil(static_cast<double>(p) * k_percent / 100.0));
    return std::clamp(m, 1, p);
}
}  // namespace

std::vector<int> signal_set_abundance(const Eigen::MatrixXd& Z, double k_percent) {
    const int p = static_cast<int>(Z.cols());
    const int m = signal_count(p, k_percent);
    Eigen::VectorXd totals = Z.colwise().sum();
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return totals[a] > totals[b]; });
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<int> signal_set_random(int p, double k_percent, std::uint64_t seed) {
    const int m = signal_count(p, k_percent);
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = Rng::stream(seed, kTagSignal);
    for (int i = 0; i < m; ++i) {  // partial Fisher-Yates
        std::size_t j = static_cast<std::size_t>(i) + rng.index(static_cast<std::size_t>(p - i));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<std::vector<int>> phylo_clusters(const Eigen::MatrixXd& O, int n_clusters) {
    const int p = static_cast<int>(O.cols());
    if (p < n_clusters)
        throw std::invalid_argument("phylo_clusters: fewer OTUs than clusters");

    // Bray-Curtis distance between OTU profiles across subjects.
    Eigen::MatrixXd prof(O.rows(), p);
    for (int k = 0; k < p; ++k) {
        double s = O.col(k).sum();
        prof.col(k) = s > 0.0 ? (O.col(k) / s).eval() : Eigen::VectorXd::Zero(O.rows()).eval();
    }
    std::vector<std::vector<double>> dist(static_cast<std::size_t>(p),
                                          std::vector<double>(static_cast<std::size_t>(p), 0.0));
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b) {
            double num = (prof.col(a) - prof.col(b)).cwiseAbs().sum();
            double den = (prof.col(a) + prof.col(b)).sum();
            double d = den > 0.0 ? num / den : 0.0;
            dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                dist[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = d;
        }

    // Average-linkage agglomeration down to n_clusters groups.
    std::vector<std::vector<int>> clusters;
    for (int k = 0; k < p; ++k) clusters.push_back({k});
    std::vector<std::vector<double>> cd = dist;
    while (static_cast<int>(clusters.size()) > n_clusters) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j)
                if (cd[i][j] < best) {
                    best = cd[i][j];
                    bi = i;
                    bj = j;
                }
        double wi = static_cast<double>(clusters[bi].size());
        double wj = static_cast<double>(clusters[bj].size());
        for (std::size_t m = 0; m < clusters.size(); ++m) {
            if (m == bi || m == bj) continue;
            double merged = (wi * cd[bi][m] + wj * cd[bj][m]) / (wi + wj);
            cd[bi][m] = cd[m][bi] = merged;
        }
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        cd.erase(cd.begin() + static_cast<std::ptrdiff_t>(bj));
        for (auto& row : cd) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
    }

    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return clusters;
}

std::vector<int> signal_set_phylogenetic(const Eigen::MatrixXd& O, int n_clusters) {
    auto clusters = phylo_clusters(O, n_clusters);
    // Designated causal cluster: size closest to 5% of p, ties to the
    // cluster containing the lowest OTU index.
    double target = 0.05 * static_cast<double>(O.cols());
    std::size_t pick = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        double gap = std::fabs(static_cast<double>(clusters[i].size()) - target);
        if (gap < best) {
            best = gap;
            pick = i;
        }
    }
    return clusters[pick];
}

std::vector<int> signal_set(SignalStructure structure, const Eigen::MatrixXd& Z,
                            const Eigen::MatrixXd& O, double k_percent, std::uint64_t seed) {
    switch (structure) {
        case SignalStructure::Abundance: return signal_set_abundance(Z, k_percent);
        case SignalStructure::Random:
            return signal_set_random(static_cast<int>(Z.cols()), k_percent, seed);
        case SignalStructure::Phylogenetic: return signal_set_phylogenetic(O);
    }
    throw std::logic_error("signal_set: unreachable");
}

Eigen::MatrixXd generate_covariates(int n, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, kTagCov);
    Eigen::MatrixXd X(n, 3);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = rng.normal();
        X(i, 2) = static_cast<double>(rng.bernoulli(0.5));
    }
    return X;
}

Eigen::VectorXd generate_response(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                                  const std::vector<int>& signal, double beta, bool binary,
                                  std::uint64_t seed) {
    const auto n = X.rows();
    if (X.cols() < 2) throw std::invalid_argument("generate_response: need two covariates");
    if (Z.rows() != n) throw std::invalid_argument("generate_response: Z rows mismatch");
    const auto c1 = X.cols() - 2;
    const auto c2 = X.cols() - 1;

    Eigen::VectorXd pred = 0.5 * X.col(c1) + 0.5 * X.col(c2);
    if (beta != 0.0) {
        if (signal.empty())
            throw std::invalid_argument("generate_response: beta > 0 requires a signal set");
        Eigen::VectorXd agg = Eigen::VectorXd::Zero(n);
        for (int j : signal) agg += Z.col(j);
        double mean = agg.mean();
        double sd = std::sqrt((agg.array() - mean).square().sum() / static_cast<double>(n - 1));
        if (sd <= 0.0)
            throw std::invalid_argument("generate_response: zero-variance signal aggregate");
        pred += beta * ((agg.array() - mean) / sd).matrix();
    }

    Rng rng = Rng::stream(seed, kTagResp);
    Eigen::VectorXd y(n);
    if (!binary) {
        for (Eigen::Index i = 0; i < n; ++i) y[i] = pred[i] + rng.normal();
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            double prob = 1.0 / (1.0 + std::exp(-pred[i]));
            y[i] = static_cast<double>(rng.bernoulli(prob));
        }
    }
    return y;
}

std::vector<std::pair<double, double>> cauchy_counterexample_sample(int reps, std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("cauchy_counterexample_sample: reps must be >= 1");
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(reps));
    CauchyCounterexampleSampler sampler;
    for (int r = 0; r < reps; ++r) {
        double p[2];
        sampler.sample(seed, static_cast<std::uint64_t>(r) + 1, p);
        out[static_cast<std::size_t>(r)] = {p[0], p[1]};
    }
    return out;
}

void CauchyCounterexampleSampler::sample(std::uint64_t seed, std::uint64_t b,
                                         std::span<double> out) const {
    Rng rng = Rng::stream(seed, 0xce7ULL, b);
    double x1 = rng.cauchy();
    double x2 = rng.cauchy();
    double t1 = x1;
    double t2 = t1 >= 0.0 ? std::fabs(x2) : -std::fabs(x2);
    out[0] = 1.0 - stats::cauchy_cdf(t1);
    out[1] = 1.0 - stats::cauchy_cdf(t2);
}

Scenario Scenario::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("Scenario: cannot open " + path.string());
    Scenario sc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("Scenario: line " + std::to_string(lineno) +
                                        ": expected key=value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "structure") sc.structure = structure_from_name(val);
        else if (key == "sparsity" || key == "sparsity_percent") sc.sparsity_percent = std::stod(val);
        else if (key == "beta") sc.beta = std::stod(val);
        else if (key == "n") sc.n = std::stoi(val);
        else if (key == "p") sc.p = std::stoi(val);
        else if (key == "response") sc.binary = (val == "binary");
        else if (key == "replications" || key == "R") sc.replications = std::stoi(val);
        else if (key == "seed") sc.seed = std::stoull(val);
        else if (key == "B") sc.B = std::stoi(val);
        else if (key == "mihc_resamples") sc.mihc_resamples = std::stoi(val);
        else if (key == "alpha") sc.alpha = std::stod(val);
        else if (key == "threads") sc.threads = std::stoi(val);
        else if (key == "dm_dispersion") sc.dm.dispersion = std::stod(val);
        else if (key == "dm_depth") sc.dm.depth = std::stoi(val);
        else if (key == "methods") {
            sc.methods.clear();
            std::istringstream ms(val);
            std::string tok;
            while (std::getline(ms, tok, ',')) {
                GcSpec spec;
                spec.kind = gc_kind_from_name(trim(tok));
                sc.methods.push_back(spec);
            }
        } else {
            throw std::invalid_argument("Scenario: unknown key '" + key + "' on line " +
                                        std::to_string(lineno));
        }
    }
    return sc;
}

std::vector<GcSpec> Scenario::effective_methods() const {
    if (!methods.empty()) return methods;
    return {GcSpec::fisher(), GcSpec::stouffer(), GcSpec::de(), GcSpec::min(), GcSpec::cauchy()};
}

DmParams Scenario::effective_dm() const {
    if (dm.mean_props.size() > 0) {
        DmParams d = dm;
        d.validate();
        return d;
    }
    return DmParams::power_law_default(p, dm.dispersion, dm.depth);
}

namespace {

struct ReplicateOutcome {
    double p_mirkat = 1.0;
    double p_mihc = 1.0;
    std::vector<double> p_vanilla;  // per method
    std::vector<double> p_dep;      // per method
};

ReplicateOutcome run_replicate(const Scenario& sc, const DmParams& dm,
                               const std::vector<GcSpec>& specs, std::uint64_t rep) {
    std::uint64_t rep_seed = derive_seed(sc.seed, kTagTest, rep);
    Eigen::MatrixXd Z = dirichlet_multinomial_sample(dm, sc.n, derive_seed(rep_seed, 1));
    Eigen::MatrixXd X = generate_covariates(sc.n, derive_seed(rep_seed, 2));

    std::vector<int> signal;
    Eigen::VectorXd Y;
    if (sc.beta != 0.0) {
        Eigen::MatrixXd O(sc.n, sc.p);
        for (int i = 0; i < sc.n; ++i) O.row(i) = Z.row(i) / Z.row(i).sum();
        signal = signal_set(sc.structure, Z, O, sc.sparsity_percent, derive_seed(rep_seed, 3));
    }
    Y = generate_response(X, Z, signal, sc.beta, sc.binary, derive_seed(rep_seed, 4));

    mb::OtuDesign design = mb::OtuDesign::make(Y, X, Z, sc.binary);
    mb::CombinedOptions opt;
    opt.B = sc.B;
    opt.alpha = sc.alpha;
    opt.mihc_resamples = sc.mihc_resamples;
    mb::CombinedResult res =
        mb::combined_microbiome_test(design, specs, opt, derive_seed(rep_seed, 5));

    ReplicateOutcome out;
    out.p_mirkat = res.mirkat.p_value;
    out.p_mihc = res.mihc.p_value;
    for (const auto& m : res.methods) {
        out.p_vanilla.push_back(m.p_independent);
        out.p_dep.push_back(m.p_dependent);
    }
    return out;
}

ExperimentTable summarize(const Scenario& sc, const std::vector<GcSpec>& specs,
                          const std::vector<ReplicateOutcome>& outcomes, bool include_vanilla) {
    const int R = static_cast<int>(outcomes.size());
    auto make_row = [&](const std::string& label, auto getp) {
        ExperimentRow row;
        row.method = label;
        row.alpha = sc.alpha;
        row.reps = R;
        for (const auto& oc : outcomes)
            if (getp(oc) <= sc.alpha) ++row.rejections;
        row.rate = static_cast<double>(row.rejections) / static_cast<double>(R);
        row.mc_se = std::sqrt(row.rate * (1.0 - row.rate) / static_cast<double>(R));
        return row;
    };

    ExperimentTable table;
    table.seed = sc.seed;
    table.alpha = sc.alpha;
    table.rows.push_back(make_row("MiRKAT", [](const auto& oc) { return oc.p_mirkat; }));
    table.rows.push_back(make_row("MiHC", [](const auto& oc) { return oc.p_mihc; }));
    for (std::size_t m = 0; m < specs.size(); ++m) {
        std::string label = specs[m].label();
        if (include_vanilla)
            table.rows.push_back(
                make_row(label, [m](const auto& oc) { return oc.p_vanilla[m]; }));
        table.rows.push_back(
            make_row("d" + label, [m](const auto& oc) { return oc.p_dep[m]; }));
    }
    return table;
}

}  // namespace

ExperimentTable run_size_experiment(const Scenario& sc) {
    if (std::fabs(sc.beta) > 1e-12)
        throw std::invalid_argument("run_size_experiment: beta must be 0 under the null");
    const DmParams dm = sc.effective_dm();
    const auto specs = sc.effective_methods();
    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(sc.replications));
    parallel_for(outcomes.size(), sc.threads, [&](std::size_t r) {
        outcomes[r] = run_replicate(sc, dm, specs, r + 1);
    });
    return summarize(sc, specs, outcomes, /*include_vanilla=*/true);
}

ExperimentTable run_power_experiment(const Scenario& sc) {
    if (!(sc.beta > 0.0))
        throw std::invalid_argument("run_power_experiment: beta must be positive");
    const DmParams dm = sc.effective_dm();
    const auto specs = sc.effective_methods();
    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(sc.replications));
    parallel_for(outcomes.size(), sc.threads, [&](std::size_t r) {
        outcomes[r] = run_replicate(sc, dm, specs, r + 1);
    });
    return summarize(sc, specs, outcomes, /*include_vanilla=*/false);
}

std::vector<double> default_alpha_grid() {
    std::vector<double> alphas;
    for (int m = 0;; ++m) {
        double a = 0.001 + 0.005 * m;
        if (a > 0.3 + 1e-12) break;
        alphas.push_back(a);
    }
    return alphas;
}

std::vector<CounterexampleRow> run_counterexample_experiment(const std::vector<double>& alphas,
                                                             int reps, int null_b,
                                                             std::uint64_t seed) {
    if (reps < 10'000)
        throw std::invalid_argument("run_counterexample_experiment: need reps >= 10^4");
    if (null_b < 10'000)
        throw std::invalid_argument("run_counterexample_experiment: need null_b >= 10^4");

    const GcSpec spec = GcSpec::cauchy();
    CauchyCounterexampleSampler sampler;

    // Shared empirical null of the g_c statistic under the exact law.
    std::vector<double> null_g(static_cast<std::size_t>(null_b));
    for (int b = 0; b < null_b; ++b) {
        double p[2];
        sampler.sample(derive_seed(seed, 11), static_cast<std::uint64_t>(b) + 1, p);
        null_g[static_cast<std::size_t>(b)] = gc_eval(spec, p);
    }
    std::sort(null_g.begin(), null_g.end());

    std::vector<CounterexampleRow> rows;
    for (double a : alphas) rows.push_back({a, 0.0, 0.0});

    for (int r = 0; r < reps; ++r) {
        double p[2];
        sampler.sample(derive_seed(seed, 12), static_cast<std::uint64_t>(r) + 1, p);
        double g = gc_eval(spec, p);
        double p_vanilla = stats::cauchy_cdf(g);  // = 1 - F_CC(T_Cauchy)
        auto it = std::upper_bound(null_g.begin(), null_g.end(), g);
        double p_dep =
            static_cast<double>(it - null_g.begin()) / static_cast<double>(null_g.size());
        for (auto& row : rows) {
            if (p_vanilla <= row.alpha) row.cauchy_size += 1.0;
            if (p_dep <= row.alpha) row.dcauchy_size += 1.0;
        }
    }
    for (auto& row : rows) {
        row.cauchy_size /= static_cast<double>(reps);
        row.dcauchy_size /= static_cast<double>(reps);
    }
    return rows;
}

}  // namespace depcomb::sim
