#include "depcomb/dep_combine.hpp"

#include "depcomb/parallel.hpp"
#include "depcomb/rng.hpp"
#include "depcomb/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace depcomb {

namespace {
constexpr std::uint64_t kSamplerTag = 0x5a11d0c7ULL;
}

void IidUniformSampler::sample(std::uint64_t seed, std::uint64_t b, std::span<double> out) const {
    Rng rng = Rng::stream(seed, kSamplerTag, b);
    for (auto& u : out) u = rng.uniform();
}

GaussianCopulaSampler::GaussianCopulaSampler(double rho, int k) {
    if (k < 1) throw std::invalid_argument("GaussianCopulaSampler: k must be positive");
    if (!(rho > -1.0 && rho < 1.0))
        throw std::domain_error("GaussianCopulaSampler: rho must lie in (-1,1)");
    Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(k, k, rho);
    corr.diagonal().setOnes();
    *this = GaussianCopulaSampler(corr);
}

GaussianCopulaSampler::GaussianCopulaSampler(const Eigen::MatrixXd& correlation) {
    if (correlation.rows() != correlation.cols() || correlation.rows() < 1)
        throw std::invalid_argument("GaussianCopulaSampler: correlation must be square");
    if (!correlation.isApprox(correlation.transpose(), 1e-10))
        throw std::invalid_argument("GaussianCopulaSampler: correlation must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(correlation);
    if (es.info() != Eigen::Success)
        throw std::domain_error("GaussianCopulaSampler: eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= 1e-12)
        throw std::domain_error("GaussianCopulaSampler: correlation matrix not positive definite");
    factor_ = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
}

void GaussianCopulaSampler::sample(std::uint64_t seed, std::uint64_t b,
                                   std::span<double> out) const {
    const int k = dim();
    if (static_cast<int>(out.size()) != k)
        throw std::invalid_argument("GaussianCopulaSampler: output span has wrong size");
    Rng rng = Rng::stream(seed, kSamplerTag + 1, b);
    Eigen::VectorXd z(k);
    for (int i = 0; i < k; ++i) z[i] = rng.normal();
    Eigen::VectorXd x = factor_ * z;
    for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = stats::std_normal_cdf(x[i]);
}

double EmpiricalNullCdf::eval(double z) const {
    auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), z);
    return static_cast<double>(it - sorted_values.begin()) /
           static_cast<double>(sorted_values.size());
}

double EmpiricalNullCdf::eval_upper(double z) const {
    auto it = std::lower_bound(sorted_values.begin(), sorted_values.end(), z);
    return static_cast<double>(sorted_values.end() - it) /
           static_cast<double>(sorted_values.size());
}

double EmpiricalNullCdf::eval_smoothed(double z) const {
    auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), z);
    return (1.0 + static_cast<double>(it - sorted_values.begin())) /
           (1.0 + static_cast<double>(sorted_values.size()));
}

void EmpiricalNullCdf::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("EmpiricalNullCdf: cannot open " + path.string());
    out.precision(17);
    out << "kind,k,eta,B\n"
        << gc_kind_name(spec.kind) << ',' << k << ',' << spec.eta << ',' << B() << '\n';
    if (!spec.weights.empty()) {
        out << "# weights";
        for (double w : spec.weights) out << ',' << w;
        out << '\n';
    }
    for (double v : sorted_values) out << v << '\n';
}

EmpiricalNullCdf EmpiricalNullCdf::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("EmpiricalNullCdf: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("kind,k,eta,B", 0) != 0)
        throw std::runtime_error("EmpiricalNullCdf: bad header in " + path.string());
    if (!std::getline(in, line))
        throw std::runtime_error("EmpiricalNullCdf: truncated file " + path.string());
    std::istringstream hdr(line);
    std::string kind_name, field;
    std::getline(hdr, kind_name, ',');
    EmpiricalNullCdf cdf;
    cdf.spec.kind = gc_kind_from_name(kind_name);
    std::getline(hdr, field, ',');
    cdf.k = std::stoi(field);
    std::getline(hdr, field, ',');
    cdf.spec.eta = std::stod(field);
    std::getline(hdr, field, ',');
    int B = std::stoi(field);
    cdf.sorted_values.reserve(static_cast<std::size_t>(B));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ws(line);
            std::string tok;
            std::getline(ws, tok, ',');  // "# weights"
            while (std::getline(ws, tok, ',')) cdf.spec.weights.push_back(std::stod(tok));
            continue;
        }
        cdf.sorted_values.push_back(std::stod(line));
    }
    if (static_cast<int>(cdf.sorted_values.size()) != B)
        throw std::runtime_error("EmpiricalNullCdf: value count does not match header B");
    if (!std::is_sorted(cdf.sorted_values.begin(), cdf.sorted_values.end()))
        throw std::runtime_error("EmpiricalNullCdf: values not sorted");
    return cdf;
}

EmpiricalNullCdf build_empirical_null(const PValueSampler& sampler, const GcSpec& spec, int B,
                                      std::uint64_t seed, int threads) {
    if (B < 1) throw std::invalid_argument("build_empirical_null: B must be positive");
    const int k = sampler.dim();
    spec.validate(static_cast<std::size_t>(k));
    std::vector<double> values(static_cast<std::size_t>(B));
    parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
        std::vector<double> p(static_cast<std::size_t>(k));
        sampler.sample(seed, b + 1, p);  // replicate indices b = 1..B
        values[b] = gc_eval(spec, p);
    });
    std::sort(values.begin(), values.end());
    return EmpiricalNullCdf{std::move(values), spec, k};
}

double combine_dependent(const GcSpec& spec, std::span<const double> p,
                         const EmpiricalNullCdf& cdf) {
    if (static_cast<int>(p.size()) != cdf.k)
        throw std::invalid_argument("combine_dependent: p-vector length does not match null k");
    if (spec.kind != cdf.spec.kind || (spec.kind == GcKind::Pareto && spec.eta != cdf.spec.eta))
        throw std::invalid_argument("combine_dependent: GcSpec does not match the cached null");
    double g = gc_eval(spec, p);
    // HM/Pareto statistics grow with evidence, so significance lives in the
    // upper tail of the bootstrap null.
    return spec.decreasing() ? cdf.eval_upper(g) : cdf.eval(g);
}

}  // namespace depcomb
