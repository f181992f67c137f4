#include "depcomb/microbiome.hpp"

#include "depcomb/parallel.hpp"
#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace depcomb::mb {

namespace {

constexpr std::uint64_t kBootTag = 0xb007ULL;
constexpr std::uint64_t kMihcTag = 0x316cULL;
constexpr double kPEps = 1e-15;

double two_sided_p(double z) { return std::erfc(std::fabs(z) / 1.4142135623730951); }

Eigen::MatrixXd residual_projection(const Eigen::MatrixXd& X) {
    // P0 = I - X (X'X)^-1 X'
    const auto n = X.rows();
    Eigen::MatrixXd P0 = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd XtX = X.transpose() * X;
    P0.noalias() -= X * XtX.ldlt().solve(X.transpose());
    return P0;
}

// Working-variance projected residual covariance for the logistic null:
// P = V - V X (X'VX)^-1 X'V with V = diag(mu(1-mu)).
Eigen::MatrixXd logistic_residual_cov(const NullModelFit& fit) {
    Eigen::VectorXd v = fit.fitted.array() * (1.0 - fit.fitted.array());
    Eigen::MatrixXd VX = v.asDiagonal() * fit.X;
    Eigen::MatrixXd XtVX = fit.X.transpose() * VX;
    Eigen::MatrixXd P = Eigen::MatrixXd(v.asDiagonal());
    P.noalias() -= VX * XtVX.ldlt().solve(VX.transpose());
    return P;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success)
        throw std::domain_error("symmetric_sqrt: eigendecomposition failed");
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

OtuDesign OtuDesign::make(Eigen::VectorXd Y, Eigen::MatrixXd X, Eigen::MatrixXd Z, bool binary) {
    const auto n = Y.size();
    if (X.rows() != n || Z.rows() != n)
        throw std::invalid_argument("OtuDesign: Y, X and Z must have matching row counts");
    if (Z.cols() < 1) throw std::invalid_argument("OtuDesign: need at least one OTU");
    if ((Z.array() < 0.0).any()) throw std::invalid_argument("OtuDesign: negative OTU count");
    if (binary)
        for (Eigen::Index i = 0; i < n; ++i)
            if (Y[i] != 0.0 && Y[i] != 1.0)
                throw std::invalid_argument("OtuDesign: binary response must be 0/1");
    OtuDesign d;
    d.binary = binary;
    d.Y = std::move(Y);
    d.X = std::move(X);
    d.O.resize(n, Z.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        double total = Z.row(i).sum();
        if (total <= 0.0)
            throw std::invalid_argument("OtuDesign: subject " + std::to_string(i) +
                                        " has an all-zero OTU count row");
        d.O.row(i) = Z.row(i) / total;
    }
    d.Z = std::move(Z);
    return d;
}

Eigen::MatrixXd bray_curtis(const Eigen::MatrixXd& O) {
    const auto n = O.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::fabs(O.row(i).sum() - 1.0) > 1e-8)
            throw std::invalid_argument("bray_curtis: composition row does not sum to 1");
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double num = (O.row(i) - O.row(j)).cwiseAbs().sum();
            double den = (O.row(i) + O.row(j)).sum();
            double d = den > 0.0 ? num / den : 0.0;
            D(i, j) = D(j, i) = d;
        }
    }
    return D;
}

Eigen::MatrixXd kernel_from_distance(const Eigen::MatrixXd& D) {
    const auto n = D.rows();
    if (D.cols() != n) throw std::invalid_argument("kernel_from_distance: D must be square");
    if (!D.isApprox(D.transpose(), 1e-10))
        throw std::invalid_argument("kernel_from_distance: D must be symmetric");
    if (D.diagonal().cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("kernel_from_distance: D must have a zero diagonal");
    Eigen::MatrixXd D2 = D.array().square();
    // Double centering: K_ij = -1/2 (D2_ij - rbar_i - rbar_j + grand).
    Eigen::VectorXd rowMean = D2.rowwise().mean();
    double grand = rowMean.mean();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            K(i, j) = -0.5 * (D2(i, j) - rowMean[i] - rowMean[j] + grand);
    return K;
}

NullModelFit fit_null_linear(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X) {
    const auto n = Y.size();
    const auto q = X.cols();
    if (X.rows() != n) throw std::invalid_argument("fit_null_linear: dimension mismatch");
    if (n <= q) throw std::invalid_argument("fit_null_linear: need n > q");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < q) throw std::invalid_argument("fit_null_linear: rank-deficient design");
    NullModelFit fit;
    fit.binary = false;
    fit.alpha = qr.solve(Y);
    fit.fitted = X * fit.alpha;
    fit.resid = Y - fit.fitted;
    fit.sigma2 = fit.resid.squaredNorm() / static_cast<double>(n - q);
    fit.phi = fit.sigma2;
    fit.X = X;
    return fit;
}

NullModelFit fit_null_logistic(const Eigen::VectorXd& Y, const Eigen::MatrixXd& X, double tol,
                               int max_iter) {
    const auto n = Y.size();
    const auto q = X.cols();
    if (X.rows() != n) throw std::invalid_argument("fit_null_logistic: dimension mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
        if (Y[i] != 0.0 && Y[i] != 1.0)
            throw std::invalid_argument("fit_null_logistic: response must be 0/1");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < q) throw std::invalid_argument("fit_null_logistic: rank-deficient design");

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd mu(n), w(n);
    bool converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd eta = X * alpha;
        if (eta.cwiseAbs().maxCoeff() > 30.0)
            throw std::domain_error("fit_null_logistic: separation detected");
        mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        w = mu.array() * (1.0 - mu.array());
        Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
        Eigen::VectorXd score = X.transpose() * (Y - mu);
        Eigen::VectorXd delta = XtWX.ldlt().solve(score);
        alpha += delta;
        if (delta.cwiseAbs().maxCoeff() < tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw std::domain_error("fit_null_logistic: IRLS did not converge");

    NullModelFit fit;
    fit.binary = true;
    fit.alpha = alpha;
    Eigen::VectorXd eta = X * alpha;
    fit.fitted = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    fit.resid = Y - fit.fitted;
    fit.phi = 1.0;
    fit.X = X;
    return fit;
}

NullModelFit fit_null(const OtuDesign& design) {
    return design.binary ? fit_null_logistic(design.Y, design.X)
                         : fit_null_linear(design.Y, design.X);
}

double mirkat_statistic(const NullModelFit& fit, const Eigen::MatrixXd& K) {
    if (K.rows() != fit.resid.size() || K.cols() != fit.resid.size())
        throw std::invalid_argument("mirkat_statistic: kernel dimension mismatch");
    if (!(fit.phi > 0.0))
        throw std::domain_error("mirkat_statistic: nonpositive dispersion (degenerate variance)");
    return fit.resid.dot(K * fit.resid) / (2.0 * fit.phi);
}

MirkatContext::MirkatContext(const NullModelFit& fit, const Eigen::MatrixXd& K)
    : K_(&K), continuous_(!fit.binary) {
    Eigen::MatrixXd M;
    if (!fit.binary) {
        Eigen::MatrixXd P0 = residual_projection(fit.X);
        M = P0 * K * P0;
    } else {
        Eigen::MatrixXd S = symmetric_sqrt(logistic_residual_cov(fit));
        M = S * K * S;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    if (es.info() != Eigen::Success)
        throw std::domain_error("MirkatContext: eigendecomposition failed");
    double lmax = es.eigenvalues().cwiseMax(0.0).maxCoeff();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double l = es.eigenvalues()[i];
        if (l > 1e-12 * lmax && l > 0.0) mix_.weights.push_back(0.5 * l);
    }
    if (!fit.binary) {
        // The projection has rank n - q_x; discard the q_x structural zeros
        // so the signed mixture runs over the residual space only.
        const auto n = es.eigenvalues().size();
        const auto qx = fit.X.cols();
        std::vector<double> all(es.eigenvalues().data(), es.eigenvalues().data() + n);
        std::sort(all.begin(), all.end(),
                  [](double a, double b) { return std::fabs(a) < std::fabs(b); });
        spectrum_.resize(n - qx);
        for (Eigen::Index i = qx; i < n; ++i) spectrum_[i - qx] = all[static_cast<std::size_t>(i)];
    }
}

TestResult MirkatContext::run(const NullModelFit& fit) const {
    double Q = mirkat_statistic(fit, *K_);
    double p = 1.0;
    if (continuous_) {
        // P(Q >= q | sigma2 estimated) = P(sum (lambda_i - c) chi^2_1 >= 0)
        const double df = static_cast<double>(spectrum_.size());
        if (df > 0.0) {
            const double c = 2.0 * Q / df;
            std::vector<double> w(spectrum_.data(), spectrum_.data() + spectrum_.size());
            for (double& wi : w) wi -= c;
            p = stats::signed_chisq_mixture_positive_prob(w);
        }
    } else if (!mix_.weights.empty() && Q > 0.0) {
        p = stats::weighted_chisq_mixture_sf(Q, mix_);
    }
    return {"MiRKAT", Q, p};
}

TestResult mirkat_pvalue(const NullModelFit& fit, const Eigen::MatrixXd& K) {
    return MirkatContext(fit, K).run(fit);
}

MihcContext::MihcContext(const NullModelFit& fit, const Eigen::MatrixXd& O, std::vector<int> grid)
    : grid_(std::move(grid)), binary_(fit.binary) {
    const auto n = O.rows();
    const auto p = O.cols();
    if (fit.X.rows() != n) throw std::invalid_argument("MihcContext: dimension mismatch");
    if (grid_.empty()) throw std::invalid_argument("MihcContext: empty HC grid");
    for (int& h : grid_) h = std::min<int>(h, static_cast<int>(p));
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());

    // Abundance weights, normalized to mean 1.
    hc_weights_ = O.colwise().mean();
    double wmean = hc_weights_.mean();
    if (wmean > 0.0) hc_weights_ /= wmean;

    Eigen::MatrixXd scores;  // n x p, column k gives z_k = scores_k' resid (up to sigma)
    if (!fit.binary) {
        Eigen::MatrixXd P0 = residual_projection(fit.X);
        scores = P0 * O;
        sd_.resize(p);
        for (Eigen::Index k = 0; k < p; ++k) sd_[k] = scores.col(k).norm();
    } else {
        Eigen::MatrixXd P = logistic_residual_cov(fit);
        scores = O;
        sd_.resize(p);
        for (Eigen::Index k = 0; k < p; ++k) {
            double v = O.col(k).dot(P * O.col(k));
            sd_[k] = std::sqrt(std::max(v, 0.0));
        }
    }

    double sd_max = sd_.maxCoeff();
    score_scaled_.resize(n, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        if (sd_[k] <= 1e-10 * std::max(sd_max, 1.0)) {
            degenerate_.push_back(static_cast<int>(k));
            score_scaled_.col(k).setZero();
        } else {
            score_scaled_.col(k) = scores.col(k) / sd_[k];
        }
    }

    if (!fit.binary) {
        simulate_factor_ = score_scaled_.transpose();
    } else {
        Eigen::MatrixXd S = symmetric_sqrt(logistic_residual_cov(fit));
        simulate_factor_ = score_scaled_.transpose() * S;
    }
}

Eigen::VectorXd MihcContext::zscores(const NullModelFit& fit) const {
    Eigen::VectorXd z = score_scaled_.transpose() * fit.resid;
    if (!binary_) {
        double sigma = std::sqrt(fit.sigma2);
        z = sigma > 0.0 ? (z / sigma).eval() : Eigen::VectorXd::Zero(z.size()).eval();
    }
    for (int k : degenerate_) z[k] = 0.0;
    return z;
}

Eigen::VectorXd marginal_otu_pvalues(const NullModelFit& fit, const Eigen::MatrixXd& O) {
    MihcContext ctx(fit, O);
    Eigen::VectorXd z = ctx.zscores(fit);
    Eigen::VectorXd p(z.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) p[k] = two_sided_p(z[k]);
    return p;
}

double simes_pvalue(std::span<const double> p) {
    if (p.empty()) throw std::invalid_argument("simes_pvalue: empty p-value vector");
    std::vector<double> sorted(p.begin(), p.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double best = 1.0;
    for (std::size_t j = 0; j < sorted.size(); ++j)
        best = std::min(best, sorted[j] * m / static_cast<double>(j + 1));
    return std::min(best, 1.0);
}

double higher_criticism(std::span<const double> p, int h) {
    if (p.empty()) throw std::invalid_argument("higher_criticism: empty p-value vector");
    if (h < 1 || static_cast<std::size_t>(h) > p.size())
        throw std::invalid_argument("higher_criticism: h out of range");
    std::vector<double> sorted(p.begin(), p.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= h; ++j) {
        double pj = std::clamp(sorted[static_cast<std::size_t>(j - 1)], kPEps, 1.0 - kPEps);
        double term = std::sqrt(m) * (static_cast<double>(j) / m - pj) / std::sqrt(pj * (1.0 - pj));
        best = std::max(best, term);
    }
    return best;
}

namespace {

// All MiHC component statistics for one marginal p-vector. HC terms are
// computed once on the sorted order; wHC scales each term by the abundance
// weight of the OTU holding that order statistic.
struct MihcStats {
    std::vector<double> uhc, whc;
    double simes = 1.0;
};

MihcStats mihc_stats(const Eigen::VectorXd& p, const Eigen::VectorXd& weights,
                     const std::vector<int>& grid) {
    const int m = static_cast<int>(p.size());
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return p[a] < p[b]; });

    MihcStats st;
    st.uhc.assign(grid.size(), -std::numeric_limits<double>::infinity());
    st.whc.assign(grid.size(), -std::numeric_limits<double>::infinity());
    const int maxh = grid.back();
    const double md = static_cast<double>(m);
    double run_u = -std::numeric_limits<double>::infinity();
    double run_w = run_u;
    std::size_t gi = 0;
    double simes = 1.0;
    for (int j = 1; j <= m; ++j) {
        double pj = p[order[static_cast<std::size_t>(j - 1)]];
        simes = std::min(simes, pj * md / static_cast<double>(j));
        if (j <= maxh) {
            double pc = std::clamp(pj, kPEps, 1.0 - kPEps);
            double term =
                std::sqrt(md) * (static_cast<double>(j) / md - pc) / std::sqrt(pc * (1.0 - pc));
            run_u = std::max(run_u, term);
            run_w = std::max(run_w, term * weights[order[static_cast<std::size_t>(j - 1)]]);
            while (gi < grid.size() && grid[gi] == j) {
                st.uhc[gi] = run_u;
                st.whc[gi] = run_w;
                ++gi;
            }
        }
    }
    while (gi < grid.size()) {
        st.uhc[gi] = run_u;
        st.whc[gi] = run_w;
        ++gi;
    }
    st.simes = simes;
    return st;
}

}  // namespace

TestResult MihcContext::run(const Eigen::VectorXd& z_obs, int resamples,
                            std::uint64_t stream_seed) const {
    if (resamples < 100)
        throw std::invalid_argument("MihcContext: need at least 100 resamples for calibration");
    const auto p_dim = score_scaled_.cols();
    const auto n = score_scaled_.rows();

    auto pvals_of = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd p(p_dim);
        for (Eigen::Index k = 0; k < p_dim; ++k) p[k] = two_sided_p(z[k]);
        return p;
    };

    const std::size_t ncomp = 2 * grid_.size() + 1;
    MihcStats obs = mihc_stats(pvals_of(z_obs), hc_weights_, grid_);

    // Null draws of the score vector share this fit's joint law.
    std::vector<std::vector<double>> comp(ncomp,
                                          std::vector<double>(static_cast<std::size_t>(resamples)));
    Rng rng(stream_seed);
    Eigen::VectorXd g(n);
    for (int i = 0; i < resamples; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) g[j] = rng.normal();
        Eigen::VectorXd z = simulate_factor_ * g;
        MihcStats st = mihc_stats(pvals_of(z), hc_weights_, grid_);
        std::size_t c = 0;
        for (std::size_t hi = 0; hi < grid_.size(); ++hi) comp[c++][static_cast<std::size_t>(i)] = st.uhc[hi];
        for (std::size_t hi = 0; hi < grid_.size(); ++hi) comp[c++][static_cast<std::size_t>(i)] = st.whc[hi];
        comp[c][static_cast<std::size_t>(i)] = st.simes;
    }

    std::vector<std::vector<double>> sorted = comp;
    for (auto& v : sorted) std::sort(v.begin(), v.end());
    const double denom = static_cast<double>(resamples) + 1.0;

    // HC components reject for large values, Simes for small.
    auto count_extreme = [&](std::size_t c, double v) -> int {
        const auto& s = sorted[c];
        if (c + 1 < ncomp) {  // HC: #{>= v}
            return static_cast<int>(s.end() - std::lower_bound(s.begin(), s.end(), v));
        }
        return static_cast<int>(std::upper_bound(s.begin(), s.end(), v) - s.begin());  // #{<= v}
    };

    std::vector<double> obs_flat(ncomp);
    {
        std::size_t c = 0;
        for (double v : obs.uhc) obs_flat[c++] = v;
        for (double v : obs.whc) obs_flat[c++] = v;
        obs_flat[c] = obs.simes;
    }

    double M_obs = 1.0;
    for (std::size_t c = 0; c < ncomp; ++c)
        M_obs = std::min(M_obs, (1.0 + count_extreme(c, obs_flat[c])) / denom);

    int n_le = 0;
    for (int i = 0; i < resamples; ++i) {
        double Mi = 1.0;
        for (std::size_t c = 0; c < ncomp; ++c) {
            // In-sample rank: the draw counts itself, matching (1 + count).
            Mi = std::min(Mi, count_extreme(c, comp[c][static_cast<std::size_t>(i)]) / denom);
        }
        if (Mi <= M_obs) ++n_le;
    }
    double p_final = (1.0 + n_le) / denom;
    return {"MiHC", M_obs, p_final};
}

TestResult mihc_test(const NullModelFit& fit, const Eigen::MatrixXd& O,
                     const std::vector<int>& grid, int resamples, std::uint64_t seed) {
    MihcContext ctx(fit, O, grid);
    return ctx.run(ctx.zscores(fit), resamples, derive_seed(seed, kMihcTag, 0));
}

OtuDesign parametric_bootstrap_design(const NullModelFit& fit, const OtuDesign& design,
                                      std::uint64_t b, std::uint64_t seed) {
    if (fit.X.rows() != design.n())
        throw std::invalid_argument("parametric_bootstrap_design: fit/design mismatch");
    OtuDesign out = design;
    Rng rng = Rng::stream(seed, kBootTag, b);
    if (!fit.binary) {
        double sigma = std::sqrt(fit.sigma2);
        for (Eigen::Index i = 0; i < out.Y.size(); ++i)
            out.Y[i] = fit.fitted[i] + sigma * rng.normal();
    } else {
        for (Eigen::Index i = 0; i < out.Y.size(); ++i)
            out.Y[i] = static_cast<double>(rng.bernoulli(fit.fitted[i]));
    }
    return out;
}

CombinedResult combined_microbiome_test(const OtuDesign& design, const std::vector<GcSpec>& specs,
                                        const CombinedOptions& opt, std::uint64_t seed) {
    if (opt.B < 100) throw std::invalid_argument("combined_microbiome_test: need B >= 100");
    if (specs.empty()) throw std::invalid_argument("combined_microbiome_test: no methods given");
    for (const auto& s : specs) s.validate(2);

    NullModelFit fit = fit_null(design);
    Eigen::MatrixXd K = kernel_from_distance(bray_curtis(design.O));
    MirkatContext mirkat_ctx(fit, K);
    MihcContext mihc_ctx(fit, design.O, opt.hc_grid);

    CombinedResult result;
    result.seed = seed;
    result.mirkat = mirkat_ctx.run(fit);
    result.mihc = mihc_ctx.run(fit, opt.mihc_resamples, derive_seed(seed, kMihcTag, 0));

    result.bootstrap_pvalues.resize(opt.B, 2);
    parallel_for(static_cast<std::size_t>(opt.B), opt.threads, [&](std::size_t idx) {
        std::uint64_t b = idx + 1;
        OtuDesign boot = parametric_bootstrap_design(fit, design, b, seed);
        NullModelFit fit_b = fit_null(boot);
        double pq, pm;
        if (!design.binary) {
            pq = mirkat_ctx.run(fit_b).p_value;
            pm = mihc_ctx.run(fit_b, opt.mihc_resamples, derive_seed(seed, kMihcTag, b)).p_value;
        } else {
            // Working variances change with the refit; rebuild both contexts.
            MirkatContext mctx_b(fit_b, K);
            MihcContext hctx_b(fit_b, boot.O, opt.hc_grid);
            pq = mctx_b.run(fit_b).p_value;
            pm = hctx_b.run(fit_b, opt.mihc_resamples, derive_seed(seed, kMihcTag, b)).p_value;
        }
        result.bootstrap_pvalues(static_cast<Eigen::Index>(idx), 0) = pq;
        result.bootstrap_pvalues(static_cast<Eigen::Index>(idx), 1) = pm;
    });

    const double p_obs[2] = {result.mirkat.p_value, result.mihc.p_value};
    for (const auto& spec : specs) {
        EmpiricalNullCdf null_cdf;
        null_cdf.spec = spec;
        null_cdf.k = 2;
        null_cdf.sorted_values.resize(static_cast<std::size_t>(opt.B));
        for (int b = 0; b < opt.B; ++b) {
            double pb[2] = {result.bootstrap_pvalues(b, 0), result.bootstrap_pvalues(b, 1)};
            null_cdf.sorted_values[static_cast<std::size_t>(b)] = gc_eval(spec, pb);
        }
        std::sort(null_cdf.sorted_values.begin(), null_cdf.sorted_values.end());

        CombinedMethodResult mr;
        mr.spec = spec;
        mr.p_dependent = combine_dependent(spec, p_obs, null_cdf);
        mr.p_independent = combine_independent(spec, p_obs);
        mr.reject = mr.p_dependent <= opt.alpha;
        result.methods.push_back(std::move(mr));
    }
    return result;
}

}  // namespace depcomb::mb
