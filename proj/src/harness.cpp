#include "smm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "smm/error.hpp"
#include "smm/moment.hpp"

namespace smm::harness {

using json = nlohmann::ordered_json;

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

OutputWriter::OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

void OutputWriter::write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(dir_);
    std::ofstream os(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + (dir_ / name).string());
    os << content;
    hashes_[name] = fnv1a_hex(content);
}

void OutputWriter::write_manifest(const std::string& command, const std::string& config_text, std::uint64_t seed) {
    json m;
    m["command"] = command;
    m["config_hash"] = fnv1a_hex(config_text);
    m["library_version"] = kVersion;
    m["seed"] = seed;
    json files = json::array();
    for (const auto& [name, hash] : hashes_) files.push_back({{"name", name}, {"fnv1a", hash}});
    m["files"] = files;
    std::filesystem::create_directories(dir_);
    std::ofstream os(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write manifest in " + dir_.string());
    os << m.dump(2) << '\n';
}

namespace {

double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

std::vector<MultiIndex> coefficient_xi(std::uint32_t M, std::uint32_t p) {
    return IndexSet::build(IsoTdSpec{M, p}).indices();
}

}  // namespace

EpsilonFit fit_epsilon(const std::vector<BenchRecord>& sweep, double min_seconds) {
    std::vector<double> lx, lt, ls;
    for (const auto& r : sweep) {
        if (!(r.wall_time_seconds > min_seconds) || r.cardinality < 2 || r.locate_steps == 0) continue;
        lx.push_back(std::log(static_cast<double>(r.cardinality)));
        lt.push_back(std::log(r.wall_time_seconds));
        ls.push_back(std::log(static_cast<double>(r.locate_steps)));
    }
    if (lx.size() < 4)
        throw InsufficientDataError("epsilon fit needs at least 4 sweep points above " + format_double(min_seconds) +
                                    " s, got " + std::to_string(lx.size()));
    return {slope(lx, lt) - 1.0, slope(lx, ls) - 1.0, lx.size()};
}

std::vector<BenchRecord> run_bench(const BenchConfig& config, std::ostream* progress) {
    if (config.repeats == 0) throw ConfigError("bench needs at least one repeat");
    std::vector<BenchRecord> out;
    for (std::uint32_t M : config.Ms)
        for (std::uint32_t p : config.ps) {
            if (M == 0 || p == 0) throw ConfigError("bench needs M >= 1 and p >= 1");
            std::vector<WeightSet> sets;
            std::size_t total = 0;
            for (const auto& mu : coefficient_xi(M, p)) {
                sets.push_back(weight_set(mu));
                total += sets.back().elements.size();
            }
            const auto weights = weight_union(sets);
            const auto it = config.k_max.find(M);
            const std::uint32_t k_max = it == config.k_max.end() ? config.default_k_max : it->second;
            std::vector<BenchRecord> sweep;
            for (std::uint32_t K = 1; K <= k_max; ++K) {
                const IndexSet set = IndexSet::build(IsoTdSpec{M, K});
                std::vector<double> times;
                double measured = 0.0;
                NeighbourStats stats;
                neighbour_matrices(set, weights, {config.threads});  // warm-up, untimed
                for (std::size_t r = 0; r < config.repeats && measured < config.repeat_seconds; ++r) {
                    stats = {};
                    const auto start = std::chrono::steady_clock::now();
                    const auto matrices = neighbour_matrices(set, weights, {config.threads}, &stats);
                    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
                    measured += times.back();
                    if (matrices.empty()) throw InternalError("no neighbour matrices were produced");
                }
                std::sort(times.begin(), times.end());
                BenchRecord rec;
                rec.M = M;
                rec.p = p;
                rec.K = K;
                rec.cardinality = set.size();
                rec.weight_count = weights.size();
                rec.weight_total = total;
                rec.wall_time_seconds = times[times.size() / 2];
                rec.locate_steps = stats.locate_steps;
                sweep.push_back(rec);
                if (progress)
                    *progress << "bench M=" << M << " p=" << p << " K=" << K << " |Lambda|=" << rec.cardinality
                              << " time=" << rec.wall_time_seconds << "s\n";
            }
            double eps = std::numeric_limits<double>::quiet_NaN(), step_eps = eps;
            try {
                const EpsilonFit fit = fit_epsilon(sweep, config.min_seconds);
                eps = fit.epsilon;
                step_eps = fit.step_epsilon;
            } catch (const InsufficientDataError& e) {
                if (progress) *progress << "bench M=" << M << " p=" << p << ": " << e.what() << '\n';
            }
            for (auto& r : sweep) {
                r.fitted_epsilon = eps;
                r.step_epsilon = step_eps;
                out.push_back(r);
            }
        }
    return out;
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
    std::ostringstream os;
    os << "set_family,M,p,K,cardinality,weight_count,weight_total,wall_time_seconds,locate_steps,fitted_epsilon,"
          "step_epsilon\n";
    for (const auto& r : records)
        os << r.set_family << ',' << r.M << ',' << r.p << ',' << r.K << ',' << r.cardinality << ',' << r.weight_count
           << ',' << r.weight_total << ',' << format_double(r.wall_time_seconds) << ',' << r.locate_steps << ','
           << format_double(r.fitted_epsilon) << ',' << format_double(r.step_epsilon) << '\n';
    return os.str();
}

// ---- experiment configuration

namespace {

SetFamily parse_set_family(const std::string& name) {
    for (SetFamily f : {SetFamily::IsoTD, SetFamily::IsoTP, SetFamily::ATD, SetFamily::ATP})
        if (family_name(f) == name) return f;
    throw ConfigError("unknown index set family '" + name + "' (expected isoTD, isoTP, aTD or aTP)");
}

bool anisotropic(SetFamily f) { return f == SetFamily::ATD || f == SetFamily::ATP; }

SetChoice parse_choice(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("family") || !j.contains("degree"))
        throw ConfigError(std::string(what) + " needs \"family\" and \"degree\"");
    SetChoice c{parse_set_family(j.at("family").get<std::string>()), j.at("degree").get<double>()};
    if (!(c.degree >= 0.0)) throw ConfigError(std::string(what) + " degree must be nonnegative");
    if (!anisotropic(c.family) && c.degree != std::floor(c.degree))
        throw ConfigError(std::string(what) + " degree must be an integer for isotropic sets");
    return c;
}

json choice_json(const SetChoice& c) { return {{"family", family_name(c.family)}, {"degree", c.degree}}; }

IndexSet build_set(const SetChoice& c, std::uint32_t M, const std::vector<double>& g) {
    switch (c.family) {
        case SetFamily::IsoTD: return IndexSet::build(IsoTdSpec{M, static_cast<std::uint32_t>(c.degree)});
        case SetFamily::IsoTP: return IndexSet::build(IsoTpSpec{M, static_cast<std::uint32_t>(c.degree)});
        case SetFamily::ATD: return IndexSet::build(AtdSpec{M, c.degree, g});
        case SetFamily::ATP: return IndexSet::build(AtpSpec{M, c.degree, g});
        default: throw ConfigError("unsupported experiment set family");
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        ExperimentConfig c;
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        c.name = j.value("name", c.name);
        const json& d = j.at("diffusion");
        c.diffusion.M = d.at("M").get<std::uint32_t>();
        c.diffusion.s = d.at("s").get<double>();
        c.diffusion.p = d.at("p").get<std::uint32_t>();
        c.diffusion.spatial = parse_spatial(d.value("spatial", std::string("constant")));
        if (j.contains("fem")) {
            const json& f = j.at("fem");
            c.elements = f.value("elements", c.elements);
            c.order = f.value("order", c.order);
            c.quadrature_points = f.value("quadrature_points", c.quadrature_points);
        }
        std::size_t entries = 0;
        if (j.contains("iso_sweeps"))
            for (const auto& [key, list] : j.at("iso_sweeps").items()) {
                const SetFamily f = parse_set_family(key);
                if (anisotropic(f)) throw ConfigError("iso_sweeps accepts isoTD and isoTP only");
                if (!list.is_array()) throw ConfigError("sweep list for " + key + " must be an array");
                std::vector<std::uint32_t> values;
                for (const auto& v : list) {
                    if (!v.is_number_unsigned()) throw ConfigError("isotropic degrees must be nonnegative integers");
                    values.push_back(v.get<std::uint32_t>());
                }
                if (values.empty()) throw ConfigError("empty sweep list for " + key);
                entries += values.size();
                c.iso_sweeps[f] = std::move(values);
            }
        if (j.contains("aniso_sweeps"))
            for (const auto& [key, list] : j.at("aniso_sweeps").items()) {
                const SetFamily f = parse_set_family(key);
                if (!anisotropic(f)) throw ConfigError("aniso_sweeps accepts aTD and aTP only");
                auto values = list.get<std::vector<double>>();
                if (values.empty()) throw ConfigError("empty sweep list for " + key);
                entries += values.size();
                c.aniso_sweeps[f] = std::move(values);
            }
        if (j.contains("weights")) {
            const json& w = j.at("weights");
            if (w.contains("from")) {
                c.weight_source = parse_choice(w.at("from"), "weights.from");
                if (anisotropic(c.weight_source->family))
                    throw ConfigError("weights must be estimated from an isotropic set");
            } else {
                c.given_weights = w.at("given").get<std::vector<double>>();
                if (c.given_weights.size() != c.diffusion.M)
                    throw ConfigError("weights.given needs one weight per random variable");
            }
        }
        if (j.contains("reference") && !(j.at("reference").is_string() && j.at("reference") == "exact"))
            c.reference = parse_choice(j.at("reference"), "reference");
        if (j.contains("best_m")) {
            const json& b = j.at("best_m");
            c.best_m_source = parse_choice(b.at("from"), "best_m.from");
            c.best_m_sizes = b.at("sizes").get<std::vector<std::size_t>>();
            if (c.best_m_sizes.empty()) throw ConfigError("empty sweep list for best_m");
            entries += c.best_m_sizes.size();
        }
        if (j.contains("rate_window")) {
            const auto w = j.at("rate_window").get<std::vector<std::size_t>>();
            if (w.size() != 2 || w[0] < 1 || w[1] < w[0] + 2) throw ConfigError("rate_window must be [first, last]");
            c.rate_first = w[0];
            c.rate_last = w[1];
        }

        if (entries == 0) throw ConfigError("the experiment has no sweep entries");
        const bool needs_g = !c.aniso_sweeps.empty() || (c.reference && anisotropic(c.reference->family)) ||
                             (c.best_m_source && anisotropic(c.best_m_source->family));
        if (needs_g && !c.weight_source && c.given_weights.empty())
            throw ConfigError("anisotropic sets need a \"weights\" section");
        if (!c.reference && c.diffusion.spatial != SpatialForm::Constant)
            throw ConfigError("an exact reference needs a constant spatial form; give a reference set");
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
}

std::string canonical_config(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["diffusion"] = {{"M", c.diffusion.M},
                      {"s", c.diffusion.s},
                      {"p", c.diffusion.p},
                      {"spatial", spatial_name(c.diffusion.spatial)}};
    j["fem"] = {{"elements", c.elements}, {"order", c.order}, {"quadrature_points", c.quadrature_points}};
    json iso = json::object(), aniso = json::object();
    for (const auto& [f, v] : c.iso_sweeps) iso[family_name(f)] = v;
    for (const auto& [f, v] : c.aniso_sweeps) aniso[family_name(f)] = v;
    j["iso_sweeps"] = iso;
    j["aniso_sweeps"] = aniso;
    if (c.weight_source)
        j["weights"] = {{"from", choice_json(*c.weight_source)}};
    else
        j["weights"] = {{"given", c.given_weights}};
    j["reference"] = c.reference ? choice_json(*c.reference) : json("exact");
    if (c.best_m_source) j["best_m"] = {{"from", choice_json(*c.best_m_source)}, {"sizes", c.best_m_sizes}};
    j["rate_window"] = {c.rate_first, c.rate_last};
    return j.dump();
}

// ---- experiment pipeline

namespace {

std::string degree_label(double d) {
    std::ostringstream os;
    os << d;
    return os.str();
}

std::string norms_block(const std::string& family, const std::vector<CoefficientNorm>& norms) {
    std::ostringstream os;
    for (std::size_t r = 0; r < norms.size(); ++r)
        os << family << ',' << (r + 1) << ',' << norms[r].ordinal << ",\"" << to_pair_string(norms[r].index) << "\","
           << format_double(norms[r].norm) << '\n';
    return os.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const SolverOptions& solver, OutputWriter* out,
                                std::ostream* progress) {
    const NonAffineExpansion expansion = expand_diffusion(config.diffusion);
    const FemSpace fem(config.elements, config.order, config.quadrature_points);
    const std::uint32_t M = config.diffusion.M;

    struct Run {
        ConvergenceRow row;
        Statistics stats;
    };
    std::vector<Run> runs;
    std::map<std::string, std::vector<CoefficientNorm>> last_norms;

    auto record = [&](const std::string& family, double parameter, const ChaosSolution& sol) {
        Run run;
        run.row.family = family;
        run.row.parameter = parameter;
        run.row.cardinality = sol.basis.size();
        run.row.iterations = sol.report.iterations;
        run.row.residual = sol.report.residual;
        run.stats = statistics(sol, fem);
        last_norms[family] = coefficient_norms(sol, fem);
        if (progress)
            *progress << config.name << ": " << family << ' ' << degree_label(parameter) << " |Lambda|=" << sol.basis.size()
                      << " iterations=" << sol.report.iterations << '\n';
        runs.push_back(std::move(run));
    };
    auto solve = [&](const SetChoice& c, const std::vector<double>& g) {
        return assemble_and_solve(expansion, build_set(c, M, g), fem, solver);
    };

    ExperimentResult result;
    result.rate = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [family, degrees] : config.iso_sweeps)
        for (std::uint32_t K : degrees) record(family_name(family), K, solve({family, double(K)}, {}));

    auto rate_of = [&](const ChaosSolution& sol) {
        std::vector<double> norms;
        for (const auto& c : coefficient_norms(sol, fem)) norms.push_back(c.norm);
        return fit_rate(norms, config.rate_first, std::min(config.rate_last, norms.size()));
    };
    if (config.weight_source) {
        const ChaosSolution sol = solve(*config.weight_source, {});
        result.weights = estimate_weights(sol, fem, M);
        result.rate = rate_of(sol);
    } else {
        result.weights = config.given_weights;
    }

    for (const auto& [family, degrees] : config.aniso_sweeps)
        for (double d : degrees) record(family_name(family), d, solve({family, d}, result.weights));

    if (config.best_m_source) {
        const ChaosSolution source = solve(*config.best_m_source, result.weights);
        for (std::size_t size : config.best_m_sizes) {
            if (size > source.basis.size())
                throw ConfigError("best-M size " + std::to_string(size) + " exceeds the source set (" +
                                  std::to_string(source.basis.size()) + ")");
            const auto basis = best_m_select(source, fem, size);
            record("bestM", static_cast<double>(size), assemble_and_solve(expansion, std::span(basis), fem, solver));
        }
    }

    Statistics reference;
    if (config.reference) {
        const ChaosSolution ref = solve(*config.reference, result.weights);
        reference = statistics(ref, fem);
        if (!config.weight_source) result.rate = rate_of(ref);
    } else {
        reference = exact_statistics(config.diffusion, fem);
    }

    for (auto& run : runs) {
        const RelativeErrors e = relative_errors(run.stats, reference, fem);
        run.row.mean_error_pct = e.mean_pct;
        run.row.variance_error_pct = e.var_pct;
        result.rows.push_back(run.row);
        result.final_rows[run.row.family] = run.row;
    }

    if (out) {
        std::ostringstream conv;
        conv << "family,parameter,cardinality,mean_error_pct,variance_error_pct,iterations,residual\n";
        for (const auto& r : result.rows)
            conv << r.family << ',' << format_double(r.parameter) << ',' << r.cardinality << ','
                 << format_double(r.mean_error_pct) << ',' << format_double(r.variance_error_pct) << ','
                 << r.iterations << ',' << format_double(r.residual) << '\n';
        out->write("convergence.csv", conv.str());

        std::string norms = "family,rank,ordinal,multi_index,norm\n";
        for (const auto& [family, list] : last_norms) norms += norms_block(family, list);
        out->write("coeff_norms.csv", norms);

        json w;
        w["weights"] = json::array();
        for (double g : result.weights) w["weights"].push_back(g);
        w["source"] = config.weight_source ? choice_json(*config.weight_source) : json("given");
        w["rate"] = std::isfinite(result.rate) ? json(result.rate) : json(nullptr);
        w["rate_window"] = {config.rate_first, config.rate_last};
        out->write("weights.json", w.dump(2) + "\n");
    }
    return result;
}

// ---- rate table

std::uint32_t smallest_td_degree_above(std::uint32_t M, std::size_t n) {
    if (M == 0) throw ConfigError("rate table needs M >= 1");
    std::uint32_t K = 0;
    for (;;) {
        // C(M + K, K)
        long double c = 1;
        for (std::uint32_t i = 1; i <= K; ++i) c = c * (M + i) / i;
        if (c > static_cast<long double>(n)) return K;
        ++K;
    }
}

RateRecord rate_entry(std::uint32_t M, double s, std::uint32_t p, const RateConfig& config,
                      const SolverOptions& solver) {
    const NonAffineExpansion expansion = expand_diffusion({M, s, p, config.spatial});
    const FemSpace fem;
    RateRecord rec;
    rec.M = M;
    rec.s = s;
    rec.p = p;
    rec.degree = smallest_td_degree_above(M, config.min_cardinality);
    const ChaosSolution sol = assemble_and_solve(expansion, IndexSet::build(IsoTdSpec{M, rec.degree}), fem, solver);
    rec.cardinality = sol.basis.size();
    rec.iterations = sol.report.iterations;
    rec.residual = sol.report.residual;
    std::vector<double> norms;
    for (const auto& c : coefficient_norms(sol, fem)) norms.push_back(c.norm);
    rec.rate = fit_rate(norms, config.first, config.last);
    return rec;
}

std::vector<RateRecord> run_rates(const RateConfig& config, const SolverOptions& solver, std::ostream* progress) {
    std::vector<RateRecord> out;
    for (std::uint32_t p : config.ps)
        for (std::uint32_t M : config.Ms)
            for (double s : config.ss) {
                out.push_back(rate_entry(M, s, p, config, solver));
                if (progress)
                    *progress << "rates M=" << M << " s=" << s << " p=" << p << " r=" << out.back().rate << '\n';
            }
    return out;
}

std::string rates_csv(const std::vector<RateRecord>& records) {
    std::ostringstream os;
    os << "M,s,p,degree,cardinality,rate,iterations,residual\n";
    for (const auto& r : records)
        os << r.M << ',' << format_double(r.s) << ',' << r.p << ',' << r.degree << ',' << r.cardinality << ','
           << format_double(r.rate) << ',' << r.iterations << ',' << format_double(r.residual) << '\n';
    return os.str();
}

}  // namespace smm::harness
