// Command-line front end: index sets, moment matrices, benchmarks,
// experiments and the convergence-rate table.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "smm/error.hpp"
#include "smm/harness.hpp"
#include "smm/moment.hpp"

using namespace smm;
using json = nlohmann::ordered_json;

namespace {

struct Globals {
    unsigned threads = 1;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

struct SetFlags {
    bool ts = false, isotd = false, isotp = false, atd = false, atp = false;
    std::vector<double> mu;
    double eps = 0.0;
    std::uint32_t N = 1;
    double K = 0.0;
    std::vector<double> weights;
    std::string file;

    void attach(CLI::App* app) {
        app->add_flag("--ts", ts, "threshold set from --mu and --eps");
        app->add_flag("--isotd", isotd, "isotropic total degree set from -N and -K");
        app->add_flag("--isotp", isotp, "isotropic tensor product set from -N and -K");
        app->add_flag("--atd", atd, "anisotropic total degree set from -N, -K and --weights");
        app->add_flag("--atp", atp, "anisotropic tensor product set from -N, -K and --weights");
        app->add_option("--mu", mu, "threshold sequence (comma separated)")->delimiter(',');
        app->add_option("--eps", eps, "threshold");
        app->add_option("-N", N, "number of dimensions");
        app->add_option("-K", K, "degree");
        app->add_option("--weights", weights, "anisotropy weights (comma separated)")->delimiter(',');
        app->add_option("--set", file, "index set text file instead of inline flags");
    }

    IndexSetSpec spec() const {
        const int chosen = int(ts) + int(isotd) + int(isotp) + int(atd) + int(atp);
        if (chosen != 1) throw ConfigError("choose exactly one of --ts, --isotd, --isotp, --atd, --atp");
        auto integer_degree = [&] {
            if (K < 0 || K != std::floor(K)) throw ConfigError("-K must be a nonnegative integer for isotropic sets");
            return static_cast<std::uint32_t>(K);
        };
        if (ts) return TsSpec{mu, eps};
        if (isotd) return IsoTdSpec{N, integer_degree()};
        if (isotp) return IsoTpSpec{N, integer_degree()};
        if (atd) return AtdSpec{N, K, weights};
        return AtpSpec{N, K, weights};
    }

    IndexSet build() const {
        if (!file.empty()) {
            std::ifstream is(file);
            if (!is) throw ConfigError("cannot open index set file " + file);
            return read_text(is);
        }
        const IndexSetSpec s = spec();
        validate(s);
        return IndexSet::build(s);
    }

    std::string canonical() const {
        json j = {{"ts", ts},   {"isotd", isotd}, {"isotp", isotp}, {"atd", atd},         {"atp", atp},
                  {"mu", mu},   {"eps", eps},     {"N", N},         {"K", K},             {"weights", weights},
                  {"set", file}};
        return j.dump();
    }
};

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string dense_label(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "_" : "") + std::to_string(v[i]);
    return s.empty() ? "0" : s;
}

template <typename Exponent>
std::string label(const SparseIndex<Exponent>& a) {
    std::vector<std::int64_t> dense(a.length(), 0);
    for (const auto& e : a.pairs()) dense[e.position - 1] = e.value;
    return dense_label(dense);
}

// Number of random variables the set is defined over.
Position set_dimension(const IndexSet& set) {
    if (!set.spec()) return set.max_length();
    return std::visit(
        [](const auto& spec) -> Position {
            if constexpr (std::is_same_v<std::decay_t<decltype(spec)>, TsSpec>)
                return static_cast<Position>(spec.mu.size());
            else
                return spec.dims;
        },
        *set.spec());
}

int cmd_indexset(const Globals& g, const SetFlags& flags) {
    const IndexSet set = flags.build();
    std::ostringstream text;
    write_text(text, set);
    std::uint32_t max_exp = 0;
    Position max_len = 0;
    for (const auto& a : set.indices()) {
        max_exp = std::max(max_exp, a.max_exponent());
        max_len = std::max(max_len, a.length());
    }
    json summary = {{"family", family_name(set.family())},
                    {"cardinality", set.size()},
                    {"max_degree", max_exp},
                    {"max_order", set.max_order()},
                    {"max_length", max_len}};
    harness::OutputWriter out(g.out_dir);
    out.write("indexset.txt", text.str());
    out.write("summary.json", summary.dump(2) + "\n");
    out.write_manifest("indexset", flags.canonical(), g.seed);
    std::cout << family_name(set.family()) << " |Lambda|=" << set.size() << " max degree=" << max_exp
              << " max |alpha|=" << set.max_order() << '\n';
    return 0;
}

int cmd_moment(const Globals& g, const SetFlags& flags, const std::vector<std::string>& mu_text,
               const std::string& family_text) {
    const Family family = parse_family(family_text);
    if (mu_text.empty()) throw ConfigError("give at least one --xi exponent vector");
    std::vector<MultiIndex> xi;
    for (const auto& t : mu_text) {
        std::vector<std::uint32_t> dense;
        std::stringstream ss(t);
        std::string part;
        while (std::getline(ss, part, ',')) {
            std::size_t used = 0;
            long v = -1;
            try {
                v = std::stol(part, &used);
            } catch (const std::exception&) {
            }
            if (v < 0 || used != part.size()) throw ConfigError("--xi expects nonnegative integers, got '" + t + "'");
            dense.push_back(static_cast<std::uint32_t>(v));
        }
        xi.push_back(MultiIndex::from_dense(std::span<const std::uint32_t>(dense)));
    }
    const IndexSet set = flags.build();
    const Position dims = set_dimension(set);
    for (const auto& mu : xi)
        if (mu.length() > dims)
            throw ConfigError("exponent " + to_tuple_string(mu) + " has more dimensions than the index set (" +
                              std::to_string(dims) + ")");

    std::vector<WeightSet> sets;
    for (const auto& mu : xi) sets.push_back(weight_set(mu));
    const auto weights = weight_union(sets);
    const NeighbourMap nmats = neighbour_matrices(set, weights, {g.threads});
    const KMatrixMap kmats = build_k_matrices(family, xi, set.max_order() + 1 + [&] {
        std::uint32_t m = 0;
        for (const auto& mu : xi) m = std::max(m, mu.max_exponent());
        return m;
    }());

    harness::OutputWriter out(g.out_dir);
    json report;
    report["family"] = family_name(family);
    report["cardinality"] = set.size();
    json neighbours = json::array(), moments = json::array();
    for (const auto& [w, nm] : nmats) {
        std::ostringstream os;
        write_matrix_market(os, nm.pattern, MatrixMarketField::Pattern);
        const std::string name = "N_w_" + label(w) + ".mtx";
        out.write(name, os.str());
        neighbours.push_back({{"w", to_tuple_string(w)}, {"file", name}, {"nnz", nm.pattern.nnz()}});
    }
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const SummedMatrix smat = summed_matrix(sets[i], nmats);
        const MomentMatrix gm = moment_matrix(xi[i], set, smat, kmats);
        std::ostringstream s_os, g_os;
        write_matrix_market(s_os, smat.counts, MatrixMarketField::Real);
        write_matrix_market(g_os, gm.values, MatrixMarketField::Real);
        const std::string tag = label(xi[i]);
        out.write("S_mu_" + tag + ".mtx", s_os.str());
        out.write("G_mu_" + tag + ".mtx", g_os.str());
        moments.push_back({{"mu", to_tuple_string(xi[i])},
                           {"S_file", "S_mu_" + tag + ".mtx"},
                           {"G_file", "G_mu_" + tag + ".mtx"},
                           {"nnz_S", smat.counts.nnz()},
                           {"nnz_G", gm.values.nnz()},
                           {"weights", sets[i].elements.size()}});
        std::cout << "mu=" << to_tuple_string(xi[i]) << " nnz(S)=" << smat.counts.nnz()
                  << " nnz(G)=" << gm.values.nnz() << '\n';
    }
    report["neighbour_matrices"] = neighbours;
    report["moment_matrices"] = moments;
    out.write("sparsity.json", report.dump(2) + "\n");
    json config = {{"set", json::parse(flags.canonical())}, {"mu", mu_text}, {"family", family_name(family)}};
    out.write_manifest("moment", config.dump(), g.seed);
    return 0;
}

int cmd_bench(const Globals& g, harness::BenchConfig config, std::optional<std::uint32_t> k_max) {
    config.threads = g.threads;
    if (k_max) {
        config.k_max.clear();
        config.default_k_max = *k_max;
    }
    const auto records = harness::run_bench(config, &std::cerr);
    harness::OutputWriter out(g.out_dir);
    out.write("bench.csv", harness::bench_csv(records));
    json cfg = {{"M", config.Ms}, {"p", config.ps}, {"repeats", config.repeats}, {"min_seconds", config.min_seconds}, {"repeat_seconds", config.repeat_seconds}};
    json kmax = json::object();
    for (std::uint32_t M : config.Ms)
        kmax[std::to_string(M)] = config.k_max.count(M) ? config.k_max.at(M) : config.default_k_max;
    cfg["k_max"] = kmax;
    out.write_manifest("bench", cfg.dump(), g.seed);
    for (const auto& r : records)
        if (r.K == 1)
            std::cout << "M=" << r.M << " p=" << r.p << " |W_Xi|=" << r.weight_count
                      << " sum|W(mu)|=" << r.weight_total << " epsilon=" << harness::format_double(r.fitted_epsilon)
                      << " step epsilon=" << harness::format_double(r.step_epsilon) << '\n';
    return 0;
}

int cmd_experiment(const Globals& g, const std::string& path) {
    const harness::ExperimentConfig config = harness::parse_experiment_config(read_file(path));
    SolverOptions solver;
    solver.threads = g.threads;
    harness::OutputWriter out(g.out_dir);
    harness::ExperimentResult result;
    try {
        result = harness::run_experiment(config, solver, &out, &std::cerr);
    } catch (const NumericalError& e) {
        std::ostringstream log;
        log << "solver failure: " << e.what() << "\nresidual: " << harness::format_double(e.residual()) << '\n';
        out.write("residual.log", log.str());
        throw;
    }
    out.write_manifest("experiment", harness::canonical_config(config), g.seed);
    std::cout << config.name << ": weights";
    for (double w : result.weights) std::cout << ' ' << harness::format_double(w);
    std::cout << ", rate " << harness::format_double(result.rate) << '\n';
    for (const auto& [family, row] : result.final_rows)
        std::cout << "  " << family << " |Lambda|=" << row.cardinality << " mean error "
                  << harness::format_double(row.mean_error_pct) << "% variance error "
                  << harness::format_double(row.variance_error_pct) << "%\n";
    return 0;
}

int cmd_rates(const Globals& g, harness::RateConfig config, const std::string& spatial) {
    config.spatial = parse_spatial(spatial);
    SolverOptions solver;
    solver.threads = g.threads;
    const auto records = harness::run_rates(config, solver, &std::cerr);
    harness::OutputWriter out(g.out_dir);
    out.write("rates.csv", harness::rates_csv(records));
    json cfg = {{"M", config.Ms},
                {"s", config.ss},
                {"p", config.ps},
                {"spatial", spatial_name(config.spatial)},
                {"min_cardinality", config.min_cardinality},
                {"first", config.first},
                {"last", config.last}};
    out.write_manifest("rates", cfg.dump(), g.seed);
    for (const auto& r : records)
        std::cout << "M=" << r.M << " s=" << harness::format_double(r.s) << " p=" << r.p
                  << " |Lambda|=" << r.cardinality << " rate=" << harness::format_double(r.rate) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic moment matrices and sGFEM experiments"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
    app.add_option("--seed", g.seed, "seed recorded in the manifest")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();

    SetFlags set_flags;
    auto* indexset = app.add_subcommand("indexset", "build an index set and write its text form");
    set_flags.attach(indexset);

    SetFlags moment_set;
    std::vector<std::string> mu_text;
    std::string family_text = "legendre";
    auto* moment = app.add_subcommand("moment", "neighbour, summed and moment matrices in Matrix Market form");
    moment_set.attach(moment);
    moment->add_option("--xi", mu_text, "dense exponent vector, e.g. 2,1 (repeatable)");
    moment->add_option("--family", family_text, "legendre or hermite")->capture_default_str();

    harness::BenchConfig bench_config;
    std::optional<std::uint32_t> k_max;
    auto* bench = app.add_subcommand("bench", "time neighbour-matrix construction over isoTD sweeps");
    bench->add_option("--M", bench_config.Ms, "dimensions")->delimiter(',')->capture_default_str();
    bench->add_option("--p", bench_config.ps, "coefficient powers")->delimiter(',')->capture_default_str();
    bench->add_option("--K-max", k_max, "largest K for every M (default: 200/30/16 for M = 2/4/6)");
    bench->add_option("--repeats", bench_config.repeats, "most timed runs per point, median taken")->capture_default_str();
    bench->add_option("--min-seconds", bench_config.min_seconds, "fit only points slower than this")
        ->capture_default_str();

    std::string config_path;
    auto* experiment = app.add_subcommand("experiment", "staged sGFEM experiment from a JSON config");
    experiment->add_option("config", config_path, "experiment JSON")->required();

    harness::RateConfig rate_config;
    std::string spatial = "sinusoidal";
    auto* rates = app.add_subcommand("rates", "Legendre coefficient convergence-rate table");
    rates->add_option("--M", rate_config.Ms, "dimensions")->delimiter(',')->capture_default_str();
    rates->add_option("--s", rate_config.ss, "decay exponents")->delimiter(',')->capture_default_str();
    rates->add_option("--p", rate_config.ps, "coefficient powers")->delimiter(',')->capture_default_str();
    rates->add_option("--spatial", spatial, "constant or sinusoidal")->capture_default_str();
    rates->add_option("--min-cardinality", rate_config.min_cardinality, "use the smallest isoTD set larger than this")
        ->capture_default_str();
    rates->add_option("--first", rate_config.first, "first rank of the fit")->capture_default_str();
    rates->add_option("--last", rate_config.last, "last rank of the fit")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (g.threads == 0) throw ConfigError("--threads must be at least 1");
        if (*indexset) return cmd_indexset(g, set_flags);
        if (*moment) return cmd_moment(g, moment_set, mu_text, family_text);
        if (*bench) return cmd_bench(g, bench_config, k_max);
        if (*experiment) return cmd_experiment(g, config_path);
        if (*rates) return cmd_rates(g, rate_config, spatial);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << " (residual " << harness::format_double(e.residual()) << ")\n";
        return 3;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
