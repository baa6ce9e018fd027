#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "CLI11.hpp"
#include "smm/error.hpp"
#include "smm/harness.hpp"
#include "smm/index_set.hpp"
#include "smm/moment.hpp"
#include "smm/orthopoly.hpp"
#include "smm/quadrature.hpp"
#include "smm/sgfem.hpp"

using namespace smm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, value);
    return buf;
}

std::vector<MultiIndex> sorted_members(const IndexSet& set) {
    std::vector<MultiIndex> v = set.indices();
    std::sort(v.begin(), v.end());
    return v;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<MultiIndex> total_degree(std::uint32_t dims, std::uint32_t degree) {
    return IndexSet::build(IsoTdSpec{dims, degree}).indices();
}

// Random set of any family with at most `limit` elements.
IndexSet random_set(std::mt19937_64& rng, SetFamily family, std::size_t limit) {
    std::uniform_int_distribution<std::uint32_t> dims(1, 6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const IndexSet::BuildOptions options{limit};
    for (;;) {
        const std::uint32_t n = dims(rng);
        std::vector<double> g(n);
        for (auto& v : g) v = 1.0 + 3.0 * unit(rng);
        std::sort(g.begin(), g.end());
        IndexSetSpec spec;
        switch (family) {
            case SetFamily::TS: {
                TsSpec ts;
                for (std::uint32_t m = 0; m < n + 2; ++m) ts.mu.push_back(0.05 + 0.85 * unit(rng));
                std::sort(ts.mu.begin(), ts.mu.end(), std::greater<>());
                ts.eps = std::exp(-1.0 - 6.0 * unit(rng));
                spec = ts;
                break;
            }
            case SetFamily::IsoTD: spec = IsoTdSpec{n, static_cast<std::uint32_t>(unit(rng) * 24)}; break;
            case SetFamily::IsoTP: spec = IsoTpSpec{n, static_cast<std::uint32_t>(unit(rng) * 12)}; break;
            case SetFamily::ATD: spec = AtdSpec{n, 1.0 + 20.0 * unit(rng), g}; break;
            default: spec = AtpSpec{n, 1.0 + 12.0 * unit(rng), g}; break;
        }
        try {
            IndexSet set = IndexSet::build(spec, options);
            if (set.size() >= 2) return set;
        } catch (const SizeError&) {
        }
    }
}

SignedMultiIndex random_offset(std::mt19937_64& rng, const IndexSet& set) {
    std::uniform_int_distribution<std::size_t> len(0, set.max_length() + 1);
    std::uniform_int_distribution<int> entry(-3, 3);
    std::vector<std::int32_t> dense(len(rng));
    for (auto& v : dense) v = entry(rng);
    return SignedMultiIndex::from_dense(std::span<const std::int32_t>(dense));
}

using Wide = boost::multiprecision::cpp_bin_float_50;

struct WideRule {
    std::vector<Wide> nodes;
    std::vector<Wide> weights;
};

// phi_0..phi_{n-1} at y and the derivative of phi_n, in 50 digits.
Wide wide_polys(Family family, const Wide& y, std::size_t n, std::vector<Wide>& phi) {
    const auto a = [&](std::size_t j) {
        const Wide jj = static_cast<unsigned>(j);
        return family == Family::Legendre ? jj / sqrt(4 * jj * jj - 1) : sqrt(jj);
    };
    phi.assign(n + 1, Wide(0));
    std::vector<Wide> d(n + 1, Wide(0));
    phi[0] = 1;
    for (std::size_t j = 0; j < n; ++j) {
        const Wide prev = j ? phi[j - 1] : Wide(0);
        const Wide dprev = j ? d[j - 1] : Wide(0);
        const Wide aj = j ? a(j) : Wide(0);
        phi[j + 1] = (y * phi[j] - aj * prev) / a(j + 1);
        d[j + 1] = (phi[j] + y * d[j] - aj * dprev) / a(j + 1);
    }
    return d[n];
}

// n-point Gauss rule: long double nodes polished by Newton, Christoffel weights.
WideRule wide_gauss_rule(Family family, std::size_t n) {
    const auto seed = gauss_rule<long double>(family, n);
    WideRule rule;
    std::vector<Wide> phi;
    for (long double x0 : seed.nodes) {
        Wide x = x0;
        for (int it = 0; it < 8; ++it) {
            const Wide dn = wide_polys(family, x, n, phi);
            x -= phi[n] / dn;
        }
        wide_polys(family, x, n, phi);
        Wide s = 0;
        for (std::size_t j = 0; j < n; ++j) s += phi[j] * phi[j];
        rule.nodes.push_back(x);
        rule.weights.push_back(1 / s);
    }
    return rule;
}

// ---- criteria

Outcome golden_set() {
    const TsSpec spec{{1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 50, 1.0 / 60, 1.0 / 70}, 1.0 / 20};
    const std::vector<std::vector<std::uint32_t>> expected = {
        {0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 0}, {0, 1, 1}, {0, 2, 0}, {1, 0, 0}, {1, 0, 1},
        {1, 1, 0}, {1, 2, 0}, {2, 0, 0}, {2, 0, 1}, {2, 1, 0}, {3, 0, 0}, {4, 0, 0}};
    const std::vector<double> weights = {1,       0.25,    0.0625, 1.0 / 3,  1.0 / 12, 1.0 / 9, 0.5,    0.125,
                                         1.0 / 6, 1.0 / 18, 0.25,  0.0625,   1.0 / 12, 0.125,   0.0625};
    const std::vector<std::int64_t> parents = {-1, 0, 1, 0, 3, 3, 0, 6, 6, 8, 6, 10, 10, 10, 13};

    double best = 1e9;
    for (int rep = 0; rep < 5; ++rep) {
        const auto start = Clock::now();
        const IndexSet set = IndexSet::build(spec);
        best = std::min(best, seconds_since(start));
    }
    const IndexSet set = IndexSet::build(spec);
    bool ok = set.size() == expected.size();
    double werr = 0.0;
    for (std::size_t i = 0; ok && i < expected.size(); ++i) {
        ok = set.index(i) == MultiIndex::from_dense(std::span<const std::uint32_t>(expected[i])) &&
             set.parent(i) == parents[i];
        werr = std::max(werr, std::abs(set.weight(i) - weights[i]));
    }
    ok = ok && werr <= 1e-12 && best < 1e-3;
    return {ok, "|Lambda|=" + std::to_string(set.size()) + " max weight error " + fmt("%.1e", werr) + ", build " +
                    fmt("%.3f", best * 1e3) + " ms"};
}

Outcome cardinalities() {
    std::size_t checked = 0, bad = 0;
    for (std::uint32_t n = 1; n <= 6; ++n)
        for (std::uint32_t k = 0; k <= 8; ++k) {
            std::uint64_t tp = 1;
            for (std::uint32_t i = 0; i < n; ++i) tp *= k + 1;
            if (IndexSet::build(IsoTpSpec{n, k}).size() != tp) ++bad;
            if (IndexSet::build(IsoTdSpec{n, k}).size() != binomial(n + k, k)) ++bad;
            checked += 2;
        }
    return {bad == 0, std::to_string(checked) + " sets, " + std::to_string(bad) + " mismatches"};
}

Outcome neighbour_oracle(unsigned threads) {
    std::mt19937_64 rng(20240611);
    const SetFamily families[] = {SetFamily::TS, SetFamily::IsoTD, SetFamily::IsoTP, SetFamily::ATD, SetFamily::ATP};
    std::size_t cases = 0, bad = 0, largest = 0;
    const auto start = Clock::now();
    for (int round = 0; round < 44; ++round)
        for (SetFamily family : families) {
            // Every eleventh round reaches for the size limit.
            const std::size_t limit = round % 11 == 10 ? 2000 : 600;
            IndexSet set = random_set(rng, family, limit);
            if (round % 11 == 10)
                while (set.size() < 1000) set = random_set(rng, family, limit);
            largest = std::max(largest, set.size());
            std::vector<SignedMultiIndex> offsets = {SignedMultiIndex{}};
            for (int i = 0; i < 3; ++i) offsets.push_back(random_offset(rng, set));
            std::sort(offsets.begin(), offsets.end());
            offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
            const NeighbourMap fast = neighbour_matrices(set, offsets, {threads});
            for (const auto& w : offsets) {
                ++cases;
                if (!(fast.at(w).pattern == brute_force_neighbour(set, w).pattern)) ++bad;
            }
        }
    const double t = seconds_since(start);
    return {bad == 0 && cases >= 200 && t < 60.0,
            std::to_string(cases) + " cases, " + std::to_string(bad) + " mismatches, largest |Lambda|=" +
                std::to_string(largest) + ", " + fmt("%.1f", t) + " s"};
}

Outcome moment_oracle() {
    const std::vector<IndexSetSpec> specs = {IsoTdSpec{3, 3},
                                             IsoTpSpec{2, 5},
                                             IsoTpSpec{3, 2},
                                             AtdSpec{3, 4.0, {1.0, 1.5, 2.5}},
                                             AtpSpec{2, 4.0, {1.0, 1.9}},
                                             TsSpec{{0.6, 0.4, 0.3}, 0.02},
                                             IsoTdSpec{1, 12}};
    const auto xi = IndexSet::build(IsoTpSpec{3, 4}).indices();
    double worst = 0.0;
    std::size_t matrices = 0, pattern_bad = 0;
    for (const auto& spec : specs) {
        const IndexSet set = IndexSet::build(spec);
        if (set.size() > 50 || set.max_length() > 3) return {false, "test set out of range"};
        std::vector<WeightSet> sets;
        for (const auto& mu : xi) sets.push_back(weight_set(mu));
        const NeighbourMap nm = neighbour_matrices(set, weight_union(sets));
        for (Family family : {Family::Legendre, Family::Hermite}) {
            const auto g = assemble_moment_matrices(set, xi, family, {1, 0});
            const std::size_t n = set.size();
            for (std::size_t i = 0; i < xi.size(); ++i) {
                ++matrices;
                const auto oracle = quadrature_moment_oracle(xi[i], set.indices(), family);
                const SummedMatrix s = summed_matrix(sets[i], nm);
                const RealMatrix& values = g.matrices[i].values;
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b) {
                        const double scale = std::max(1.0, std::abs(oracle[a * n + b]));
                        worst = std::max(worst, std::abs(values(a, b) - oracle[a * n + b]) / scale);
                    }
                bool same = true;
                s.counts.for_each([&](std::size_t r, std::size_t c, std::int32_t) {
                    if (values(r, c) == 0.0) same = false;
                });
                values.for_each([&](std::size_t r, std::size_t c, double) {
                    if (s.counts(r, c) == 0) same = false;
                });
                if (!same) ++pattern_bad;
            }
        }
    }
    return {worst <= 1e-10 && pattern_bad == 0,
            std::to_string(matrices) + " matrices, max error " + fmt("%.1e", worst) + ", pattern mismatches " +
                std::to_string(pattern_bad)};
}

Outcome k_structure() {
    std::size_t structure_bad = 0;
    double worst = 0.0;
    for (Family family : {Family::Legendre, Family::Hermite}) {
        const WideRule rule = wide_gauss_rule(family, 60);
        // Node values of phi_0..phi_39 and y^k, shared by every k.
        std::vector<std::vector<Wide>> phi(rule.nodes.size());
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) wide_polys(family, rule.nodes[i], 40, phi[i]);
        for (unsigned k = 0; k <= 8; ++k)
            for (std::size_t dim : {1u, 2u, 9u, 17u, 40u}) {
                const KMatrix km = build_k_matrix(family, k, dim);
                if (km.bands.half_bandwidth() != k) ++structure_bad;
                for (std::size_t l = 0; l < dim; ++l)
                    for (std::size_t m = 0; m < dim; ++m) {
                        const double v = km(l, m);
                        const std::size_t off = l > m ? l - m : m - l;
                        if (v != km(m, l)) ++structure_bad;
                        if ((off > k || (l + m + k) % 2 != 0) && v != 0.0) ++structure_bad;
                        if (dim == 40 && l <= m) {
                            Wide s = 0;
                            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                                s += rule.weights[i] * pow(rule.nodes[i], k) * phi[i][l] * phi[i][m];
                            const double q = static_cast<double>(s);
                            worst = std::max(worst, std::abs(v - q) / std::max(1.0, std::abs(q)));
                        }
                    }
            }
    }
    std::size_t closed_bad = 0;
    const KMatrix leg = build_k_matrix(Family::Legendre, 1, 40);
    const KMatrix her = build_k_matrix(Family::Hermite, 1, 40);
    for (std::size_t l = 1; l < 40; ++l) {
        const Wide L = static_cast<unsigned>(l);
        if (leg(l - 1, l) != static_cast<double>(L / sqrt((2 * L - 1) * (2 * L + 1)))) ++closed_bad;
        if (her(l - 1, l) != static_cast<double>(sqrt(L))) ++closed_bad;
    }
    return {structure_bad == 0 && worst <= 1e-11 && closed_bad == 0,
            "structure violations " + std::to_string(structure_bad) + ", quadrature error " + fmt("%.1e", worst) +
                ", closed-form mismatches " + std::to_string(closed_bad)};
}

Outcome weight_totals() {
    const std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> table = {
        {{2, 2}, 9},    {{2, 4}, 38},  {{2, 6}, 110},  {{4, 2}, 25},  {{4, 4}, 255},
        {{4, 6}, 1519}, {{6, 2}, 49},  {{6, 4}, 924},  {{6, 6}, 9324}};
    std::ostringstream os;
    bool ok = true;
    for (const auto& [key, expected] : table) {
        std::size_t total = 0;
        for (const auto& mu : total_degree(key.first, key.second)) total += weight_set(mu).elements.size();
        ok = ok && total == expected;
        os << total << (key.second == 6 ? (key.first == 6 ? "" : " | ") : "/");
    }
    return {ok, os.str()};
}

Outcome complexity(unsigned threads) {
    harness::BenchConfig config;
    config.Ms = {6};
    config.k_max = {{6, 16}};
    config.threads = threads;
    const auto start = Clock::now();
    const auto records = harness::run_bench(config);
    const double t = seconds_since(start);
    bool ok = t < 600.0;
    std::ostringstream os;
    for (std::uint32_t p : config.ps) {
        std::vector<harness::BenchRecord> sweep;
        for (const auto& r : records)
            if (r.p == p) sweep.push_back(r);
        const double eps = sweep.back().fitted_epsilon;
        ok = ok && eps >= 0.10 && eps <= 0.28;
        os << "p=" << p << " eps=" << fmt("%.3f", eps) << ", ";
    }
    os << "K<=16, " << fmt("%.0f", t) << " s";
    return {ok, os.str()};
}

const harness::ConvergenceRow& row_near(const std::vector<harness::ConvergenceRow>& rows, const std::string& family,
                                        std::size_t target) {
    const harness::ConvergenceRow* best = nullptr;
    for (const auto& r : rows) {
        if (r.family != family) continue;
        const auto dist = [&](const harness::ConvergenceRow& x) {
            return x.cardinality > target ? x.cardinality - target : target - x.cardinality;
        };
        if (!best || dist(r) < dist(*best)) best = &r;
    }
    if (!best) throw InternalError("no rows for " + family);
    return *best;
}

Outcome example1(unsigned threads) {
    std::ifstream in(std::string(SMM_SOURCE_DIR) + "/configs/example1.json");
    std::stringstream text;
    text << in.rdbuf();
    const auto config = harness::parse_experiment_config(text.str());
    SolverOptions solver;
    solver.threads = threads;
    const auto start = Clock::now();
    const auto result = harness::run_experiment(config, solver);
    const double t = seconds_since(start);
    const auto& r = result.rows;
    const double best = row_near(r, "bestM", 200).mean_error_pct;
    const double atp = row_near(r, "aTP", 200).mean_error_pct;
    const double atd = row_near(r, "aTD", 200).mean_error_pct;
    const double td = row_near(r, "isoTD", 200).mean_error_pct;
    const auto& tp_row = row_near(r, "isoTP", 200);
    const double tp = tp_row.mean_error_pct;
    const auto& g = result.weights;
    const bool weights_ok = g.size() == 2 && std::abs(g[0] - 1.16) <= 0.2 && std::abs(g[1] - 3.82) <= 0.2;
    const bool order_ok = best <= atp && atp <= atd && atd <= td && atd <= tp;
    const bool decade_ok = tp >= 1e-5 && tp <= 1e-3;
    const bool rate_ok = std::abs(result.rate - 2.27) <= 0.3;
    std::ostringstream os;
    os << "g=(" << fmt("%.3f", g.at(0)) << ", " << fmt("%.3f", g.at(1)) << "), mean error % near 200: bestM "
       << fmt("%.2e", best) << " aTP " << fmt("%.2e", atp) << " aTD " << fmt("%.2e", atd) << " isoTD "
       << fmt("%.2e", td) << " isoTP(" << tp_row.cardinality << ") " << fmt("%.2e", tp) << ", rate "
       << fmt("%.3f", result.rate) << ", " << fmt("%.1f", t) << " s";
    return {weights_ok && order_ok && decade_ok && rate_ok && t < 900.0, os.str()};
}

Outcome rate_spots(unsigned threads) {
    const harness::RateConfig config;
    SolverOptions solver;
    solver.threads = threads;
    struct Spot {
        std::uint32_t M;
        std::uint32_t p;
        double s;
        double expected;
        double tol;
    };
    bool ok = true;
    std::ostringstream os;
    for (const Spot& spot : {Spot{4, 1, 2.0, 2.9, 0.4}, Spot{4, 2, 4.0, 4.0, 0.5}}) {
        const auto start = Clock::now();
        const auto rec = harness::rate_entry(spot.M, spot.s, spot.p, config, solver);
        const double t = seconds_since(start);
        ok = ok && std::abs(rec.rate - spot.expected) <= spot.tol && rec.cardinality >= 3000 && t < 1800.0;
        os << "(M=" << spot.M << ", p=" << spot.p << ", s=" << fmt("%g", spot.s) << ") |Lambda|=" << rec.cardinality
           << " rate " << fmt("%.3f", rec.rate) << " in " << fmt("%.0f", t) << " s; ";
    }
    return {ok, os.str()};
}

Outcome properties() {
    std::mt19937_64 rng(77);
    const SetFamily families[] = {SetFamily::TS, SetFamily::IsoTD, SetFamily::IsoTP, SetFamily::ATD, SetFamily::ATP};
    std::vector<std::string> failures;

    std::size_t sets = 0;
    for (int round = 0; round < 10; ++round)
        for (SetFamily family : families) {
            const IndexSet set = random_set(rng, family, 3000);
            ++sets;
            for (std::size_t i = 0; i < set.size(); ++i) {
                const auto& a = set.index(i);
                for (const auto& e : a.pairs())
                    if (!set.contains(subtract(a, SignedMultiIndex::unit(e.position, 1)))) {
                        failures.push_back("downward closure");
                        break;
                    }
                std::size_t steps = 0;
                if (set.locate(a, &steps) != i || steps != a.order()) failures.push_back("locate round trip");
            }
        }

    for (const std::vector<double>& g : {std::vector<double>{1.0, 1.53, 2.21, 3.97}, {0.7, 0.9, 0.9, 2.0}})
        for (double k : {2.5, 4.1, 6.7}) {
            TsSpec ts{{}, std::exp(-k)};
            for (double gn : g) ts.mu.push_back(std::exp(-gn / g[0]));
            if (sorted_members(IndexSet::build(AtdSpec{static_cast<std::uint32_t>(g.size()), k, g})) !=
                sorted_members(IndexSet::build(ts)))
                failures.push_back("aTD vs TS");
        }
    for (std::uint32_t n = 1; n <= 4; ++n)
        for (std::uint32_t k = 0; k <= 6; ++k) {
            const std::vector<double> g(n, 1.7);
            if (sorted_members(IndexSet::build(AtpSpec{n, static_cast<double>(k), g})) !=
                    sorted_members(IndexSet::build(IsoTpSpec{n, k})) ||
                sorted_members(IndexSet::build(AtdSpec{n, static_cast<double>(k), g})) !=
                    sorted_members(IndexSet::build(IsoTdSpec{n, k})))
                failures.push_back("constant weights");
        }

    double identity_err = 0.0;
    for (Family family : {Family::Legendre, Family::Hermite}) {
        const double half = family == Family::Legendre ? 1.0 : 4.0;
        for (int i = 0; i < 101; ++i) {
            const double y = -half + 2.0 * half * i / 100.0;
            for (unsigned k = 0; k <= 10; ++k) {
                const auto c = inversion_coefficients(family, k);
                double sum = 0.0;
                for (unsigned n = 0; n <= k; ++n) sum += c[n] * eval_poly(family, n, y);
                const double exact = std::pow(y, k);
                identity_err = std::max(identity_err, std::abs(sum - exact) / std::max(1.0, std::abs(exact)));
                for (unsigned l = 0; l <= 8 && k <= 8; ++l) {
                    double lin = 0.0;
                    for (const auto& t : linearize_product(family, k, l))
                        lin += t.coefficient * eval_poly(family, t.degree, y);
                    const double prod = eval_poly(family, k, y) * eval_poly(family, l, y);
                    identity_err = std::max(identity_err, std::abs(lin - prod) / std::max(1.0, std::abs(prod)));
                }
            }
        }
    }
    if (identity_err > 1e-10) failures.push_back("pointwise identities");

    const IndexSet set = IndexSet::build(IsoTdSpec{4, 6});
    const auto xi = total_degree(4, 3);
    for (Family family : {Family::Legendre, Family::Hermite}) {
        const auto one = assemble_moment_matrices(set, xi, family, {1, 0});
        const auto four = assemble_moment_matrices(set, xi, family, {4, 0});
        if (!(one.matrices[0].values == RealMatrix::identity(set.size()))) failures.push_back("G0 = I");
        for (std::size_t i = 0; i < xi.size(); ++i)
            if (!(one.matrices[i].values == four.matrices[i].values)) failures.push_back("moment determinism");
    }
    std::vector<WeightSet> ws;
    for (const auto& mu : xi) ws.push_back(weight_set(mu));
    const auto weights = weight_union(ws);
    const auto n1 = neighbour_matrices(set, weights, {1});
    const auto n3 = neighbour_matrices(set, weights, {3});
    for (const auto& w : weights)
        if (!(n1.at(w).pattern == n3.at(w).pattern)) failures.push_back("neighbour determinism");

    const auto expansion = expand_diffusion({2, 2.0, 2, SpatialForm::Sinusoidal});
    const FemSpace fem(8, 3, 8);
    const IndexSet small = IndexSet::build(IsoTdSpec{2, 8});
    SolverOptions one, four;
    four.threads = 4;
    if (assemble_and_solve(expansion, small, fem, one).coefficients !=
        assemble_and_solve(expansion, small, fem, four).coefficients)
        failures.push_back("solver determinism");

    std::sort(failures.begin(), failures.end());
    failures.erase(std::unique(failures.begin(), failures.end()), failures.end());
    std::string detail = std::to_string(sets) + " random sets, identity error " + fmt("%.1e", identity_err);
    for (const auto& f : failures) detail += ", FAILED " + f;
    return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> only;
    unsigned threads = 1;
    app.add_option("criteria", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
    app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"golden TS set", golden_set},
        {"isoTP/isoTD cardinalities", cardinalities},
        {"neighbour matrices vs brute force", [&] { return neighbour_oracle(threads); }},
        {"moment matrices vs quadrature", moment_oracle},
        {"K-matrix structure", k_structure},
        {"weight-set totals", weight_totals},
        {"complexity exponent", [&] { return complexity(threads); }},
        {"Example 1 reproduction", [&] { return example1(threads); }},
        {"rate-table spot checks", [&] { return rate_spots(threads); }},
        {"property suites", properties},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failed;
        std::cout << (out.pass ? "PASS" : "FAIL") << "  [" << id << "] " << criteria[i].first << ": " << out.detail
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
