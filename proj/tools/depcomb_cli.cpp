// depcomb: combine dependent p-values, run the microbiome combined test and
// reproduce the synthetic/efficiency studies from the command line.

#include "depcomb/combiners.hpp"
#include "depcomb/csv.hpp"
#include "depcomb/dep_combine.hpp"
#include "depcomb/efficiency.hpp"
#include "depcomb/microbiome.hpp"
#include "depcomb/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using depcomb::GcSpec;
using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Emit {
    std::string output = "-";  // "-" = stdout
    std::string format = "csv";
    int precision = 6;

    void table(const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) const {
        std::ostringstream out;
        if (format == "json") {
            // Numeric-looking cells become JSON numbers, everything else strings.
            auto cell = [](const std::string& s) -> json {
                if (s.empty()) return nullptr;
                char* end = nullptr;
                if (s.find_first_of(".eE") == std::string::npos) {
                    long long i = std::strtoll(s.c_str(), &end, 10);
                    if (end == s.c_str() + s.size()) return i;
                }
                double v = std::strtod(s.c_str(), &end);
                if (end == s.c_str() + s.size()) return v;
                return s;
            };
            json arr = json::array();
            for (const auto& row : rows) {
                json obj;
                for (std::size_t c = 0; c < header.size(); ++c) obj[header[c]] = cell(row[c]);
                arr.push_back(obj);
            }
            out << arr.dump(2) << '\n';
        } else {
            for (std::size_t c = 0; c < header.size(); ++c)
                out << header[c] << (c + 1 < header.size() ? ',' : '\n');
            for (const auto& row : rows)
                for (std::size_t c = 0; c < row.size(); ++c)
                    out << row[c] << (c + 1 < row.size() ? ',' : '\n');
        }
        if (output == "-") {
            std::cout << out.str();
        } else {
            std::ofstream f(output);
            if (!f) throw std::runtime_error("cannot open output file " + output);
            f << out.str();
        }
    }

    std::string num(double v) const { return depcomb::io::format_double(v, precision); }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

std::vector<GcSpec> parse_methods(const std::string& list, double eta) {
    std::vector<GcSpec> specs;
    try {
        for (const auto& name : split_list(list)) {
            GcSpec spec;
            spec.kind = depcomb::gc_kind_from_name(name);
            spec.eta = eta;
            specs.push_back(spec);
        }
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (specs.empty()) throw ConfigError("empty method list");
    return specs;
}

std::vector<double> parse_double_list(const std::string& list, const char* what) {
    std::vector<double> out;
    for (const auto& tok : split_list(list)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError(std::string("cannot parse ") + what + " entry '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
    return out;
}

void sort_rows(std::vector<std::vector<std::string>>& rows) {
    std::stable_sort(rows.begin(), rows.end());
}

int run_combine(const std::string& input, const std::string& methods, double eta,
                std::uint64_t seed, const Emit& emit) {
    auto specs = parse_methods(methods, eta);
    auto p = depcomb::io::read_pvalues(input);
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("p-value outside [0,1] in " + input);
    std::vector<std::vector<std::string>> rows;
    for (const auto& spec : specs) {
        double pc = depcomb::combine_independent(spec, p);
        rows.push_back({spec.label(), emit.num(pc), std::to_string(seed)});
    }
    sort_rows(rows);
    emit.table({"method", "p_value", "seed"}, rows);
    return 0;
}

int run_combine_dep(const std::string& input, const std::string& method, double eta, double rho,
                    bool have_rho, const std::string& null_cache, const std::string& save_null,
                    int B, std::uint64_t seed, int threads, const Emit& emit) {
    auto specs = parse_methods(method, eta);
    if (specs.size() != 1) throw ConfigError("combine-dep takes exactly one method");
    if (!have_rho && null_cache.empty())
        throw ConfigError("provide either --rho (Gaussian-copula null) or --null-cache");
    if (have_rho && !null_cache.empty())
        throw ConfigError("--rho and --null-cache are mutually exclusive");
    if (have_rho && !(rho > -1.0 && rho < 1.0)) throw ConfigError("--rho must lie in (-1,1)");

    auto p = depcomb::io::read_pvalues(input);
    const int k = static_cast<int>(p.size());
    depcomb::EmpiricalNullCdf cdf;
    if (!null_cache.empty()) {
        cdf = depcomb::EmpiricalNullCdf::load(null_cache);
    } else {
        depcomb::GaussianCopulaSampler sampler(rho, k);
        cdf = depcomb::build_empirical_null(sampler, specs[0], B, seed, threads);
    }
    if (!save_null.empty()) cdf.save(save_null);
    double pt = depcomb::combine_dependent(specs[0], p, cdf);
    emit.table({"method", "p_value", "B", "seed"},
               {{"d" + specs[0].label(), emit.num(pt), std::to_string(cdf.B()),
                 std::to_string(seed)}});
    return 0;
}

int run_microbiome(const std::string& y_path, const std::string& x_path,
                   const std::string& z_path, const std::string& kind,
                   const std::string& methods, double eta, int B, int mihc_resamples,
                   double alpha, std::uint64_t seed, int threads, const Emit& emit) {
    if (kind != "continuous" && kind != "binary")
        throw ConfigError("--kind must be continuous or binary");
    auto specs = parse_methods(methods, eta);
    auto design = depcomb::io::load_otu_design(y_path, x_path, z_path, kind == "binary");

    depcomb::mb::CombinedOptions opt;
    opt.B = B;
    opt.alpha = alpha;
    opt.mihc_resamples = mihc_resamples;
    opt.threads = threads;
    auto res = depcomb::mb::combined_microbiome_test(design, specs, opt, seed);

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"MiRKAT", emit.num(res.mirkat.p_value), "", std::to_string(seed)});
    rows.push_back({"MiHC", emit.num(res.mihc.p_value), "", std::to_string(seed)});
    for (const auto& m : res.methods)
        rows.push_back({"MiRKAT+MiHC (d" + m.spec.label() + ")", emit.num(m.p_dependent),
                        std::to_string(B), std::to_string(seed)});
    sort_rows(rows);
    emit.table({"method", "p_value", "B", "seed"}, rows);
    return 0;
}

int run_simulate(const std::string& scenario_path, const CLI::App* cmd, double beta,
                 bool seed_set, std::uint64_t seed, int replications, bool threads_set,
                 int threads, const Emit& emit) {
    depcomb::sim::Scenario sc;
    try {
        sc = depcomb::sim::Scenario::from_file(scenario_path);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cmd->count("--beta")) sc.beta = beta;
    if (seed_set) sc.seed = seed;
    if (cmd->count("--replications")) sc.replications = replications;
    if (threads_set) sc.threads = threads;

    auto start = std::chrono::steady_clock::now();
    depcomb::sim::ExperimentTable table =
        sc.beta > 0.0 ? depcomb::sim::run_power_experiment(sc)
                      : depcomb::sim::run_size_experiment(sc);
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : table.rows)
        rows.push_back({r.method, emit.num(r.alpha), std::to_string(r.rejections),
                        std::to_string(r.reps), emit.num(r.rate), emit.num(r.mc_se),
                        std::to_string(table.seed)});
    sort_rows(rows);
    emit.table({"method", "alpha", "rejections", "reps", "rate", "mc_se", "seed"}, rows);
    std::cerr << "simulate: seed " << table.seed << ", " << table.rows.size() << " methods, "
              << emit.num(secs) << "s\n";
    return 0;
}

int run_counterexample(int reps, int null_b, std::uint64_t seed, const Emit& emit) {
    auto start = std::chrono::steady_clock::now();
    auto rows_out = depcomb::sim::run_counterexample_experiment(
        depcomb::sim::default_alpha_grid(), reps, null_b, seed);
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : rows_out)
        rows.push_back({emit.num(r.alpha), emit.num(r.cauchy_size), emit.num(r.dcauchy_size),
                        std::to_string(seed)});
    emit.table({"alpha", "cauchy_size", "dcauchy_size", "seed"}, rows);
    std::cerr << "counterexample: seed " << seed << ", " << rows.size() << " alpha levels, "
              << emit.num(secs) << "s\n";
    return 0;
}

int run_efficiency(const std::string& rhos, const std::string& effects, int n, double alpha,
                   int reps, int B, std::uint64_t seed, int threads, const Emit& emit) {
    depcomb::eff::EfficiencyGridOptions opt;
    opt.rhos = parse_double_list(rhos, "rho");
    opt.effects = parse_double_list(effects, "effect");
    opt.n = n;
    opt.alpha = alpha;
    opt.reps = reps;
    opt.B = B;
    opt.threads = threads;
    auto start = std::chrono::steady_clock::now();
    auto grid = depcomb::eff::run_efficiency_grid(opt, seed);
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : grid)
        rows.push_back({emit.num(r.rho), emit.num(r.effect), r.method, emit.num(r.power),
                        emit.num(r.mc_se), std::to_string(seed)});
    emit.table({"rho", "effect", "method", "power", "mc_se", "seed"}, rows);
    std::cerr << "efficiency: seed " << seed << ", " << rows.size() << " rows, " << emit.num(secs)
              << "s\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-value combination under arbitrary dependence"};
    app.require_subcommand(1);

    Emit emit;
    std::uint64_t seed = 1;
    int threads = 1;
    app.add_option("--output,-o", emit.output, "Output path ('-' = stdout)")->capture_default_str();
    app.add_option("--format,-f", emit.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--precision", emit.precision, "Significant digits in numeric output")
        ->check(CLI::Range(1, 17))
        ->capture_default_str();
    app.add_option("--seed", seed, "Master RNG seed")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber)
        ->capture_default_str();

    // combine
    auto* c1 = app.add_subcommand("combine", "Combine independent p-values");
    std::string c1_input;
    std::string c1_methods = "fisher,stouffer,de,min,cauchy";
    double c1_eta = 2.0;
    c1->add_option("input", c1_input, "CSV of p-values")->required();
    c1->add_option("--methods,-m", c1_methods, "Comma-separated method list")
        ->capture_default_str();
    c1->add_option("--eta", c1_eta, "Pareto exponent")->capture_default_str();

    // combine-dep
    auto* c2 = app.add_subcommand("combine-dep", "Dependence-adjusted combination");
    std::string c2_input, c2_method = "cauchy", c2_cache, c2_save;
    double c2_eta = 2.0, c2_rho = 0.0;
    int c2_B = 2000;
    c2->add_option("input", c2_input, "CSV of p-values")->required();
    c2->add_option("--method,-m", c2_method, "Combination method")->capture_default_str();
    c2->add_option("--eta", c2_eta, "Pareto exponent")->capture_default_str();
    auto* rho_opt = c2->add_option("--rho", c2_rho, "Gaussian-copula correlation for the null");
    c2->add_option("--null-cache", c2_cache, "Load a saved empirical null CDF");
    c2->add_option("--save-null", c2_save, "Save the empirical null CDF");
    c2->add_option("-B,--bootstrap", c2_B, "Null sample size")->check(CLI::PositiveNumber)
        ->capture_default_str();

    // microbiome
    auto* c3 = app.add_subcommand("microbiome", "MiRKAT + MiHC combined association test");
    std::string c3_y, c3_x, c3_z, c3_kind = "continuous";
    std::string c3_methods = "fisher,stouffer,de,min,cauchy";
    double c3_eta = 2.0, c3_alpha = 0.05;
    int c3_B = 500, c3_resamples = 500;
    c3->add_option("--y", c3_y, "Response CSV (one column)")->required();
    c3->add_option("--x", c3_x, "Covariate CSV (optional; intercept added)");
    c3->add_option("--z", c3_z, "OTU count CSV")->required();
    c3->add_option("--kind", c3_kind, "continuous or binary")->capture_default_str();
    c3->add_option("--methods,-m", c3_methods, "Comma-separated method list")
        ->capture_default_str();
    c3->add_option("--eta", c3_eta, "Pareto exponent")->capture_default_str();
    c3->add_option("-B,--bootstrap", c3_B, "Parametric bootstrap replicates")
        ->capture_default_str();
    c3->add_option("--mihc-resamples", c3_resamples, "MiHC calibration resamples")
        ->capture_default_str();
    c3->add_option("--alpha", c3_alpha, "Test level")->capture_default_str();

    // simulate
    auto* c4 = app.add_subcommand("simulate", "Size/power experiment from a scenario file");
    std::string c4_scenario;
    double c4_beta = 0.0;
    int c4_reps = 500;
    c4->add_option("scenario", c4_scenario, "key=value scenario file")->required();
    c4->add_option("--beta", c4_beta, "Override the effect size");
    c4->add_option("--replications", c4_reps, "Override the replication count");

    // counterexample
    auto* c5 = app.add_subcommand("counterexample", "Coupled-Cauchy size curves");
    int c5_reps = 100'000, c5_null_b = 2'000'000;
    c5->add_option("--reps", c5_reps, "Monte Carlo replicates")->capture_default_str();
    c5->add_option("--null-b", c5_null_b, "Null sample size for the adjusted test")
        ->capture_default_str();

    // efficiency
    auto* c6 = app.add_subcommand("efficiency", "Bivariate-normal power study");
    std::string c6_rhos = "0,0.3,0.6,0.9", c6_effects = "0.5,1,2";
    int c6_n = 100, c6_reps = 100'000, c6_B = 100'000;
    double c6_alpha = 0.05;
    c6->add_option("--rhos", c6_rhos, "Comma-separated correlations")->capture_default_str();
    c6->add_option("--effects", c6_effects, "Effects in units of 1/sqrt(n)")
        ->capture_default_str();
    c6->add_option("--n", c6_n, "Per-test sample size")->capture_default_str();
    c6->add_option("--alpha", c6_alpha, "Test level")->capture_default_str();
    c6->add_option("--reps", c6_reps, "Monte Carlo replicates per grid point")
        ->capture_default_str();
    c6->add_option("-B,--bootstrap", c6_B, "Null draws for the Fisher critical value")
        ->capture_default_str();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*c1) return run_combine(c1_input, c1_methods, c1_eta, seed, emit);
        if (*c2)
            return run_combine_dep(c2_input, c2_method, c2_eta, c2_rho, rho_opt->count() > 0,
                                   c2_cache, c2_save, c2_B, seed, threads, emit);
        if (*c3)
            return run_microbiome(c3_y, c3_x, c3_z, c3_kind, c3_methods, c3_eta, c3_B,
                                  c3_resamples, c3_alpha, seed, threads, emit);
        if (*c4)
            return run_simulate(c4_scenario, c4, c4_beta, app.count("--seed") > 0, seed, c4_reps,
                                app.count("--threads") > 0, threads, emit);
        if (*c5) return run_counterexample(c5_reps, c5_null_b, seed, emit);
        if (*c6)
            return run_efficiency(c6_rhos, c6_effects, c6_n, c6_alpha, c6_reps, c6_B, seed,
                                  threads, emit);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
