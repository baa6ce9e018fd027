#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "doctest.h"
#include "smm/error.hpp"
#include "smm/quadrature.hpp"
#include "smm/sgfem.hpp"

using namespace smm;

namespace {

const DiffusionSpec kExample1{2, 1.5, 6, SpatialForm::Constant};
const DiffusionSpec kExample2{4, 1.5, 2, SpatialForm::Sinusoidal};
const DiffusionSpec kExample3{6, 1.5, 4, SpatialForm::Sinusoidal};

std::vector<double> sorted_norms(const ChaosSolution& sol, const FemSpace& fem) {
    std::vector<double> out;
    for (const auto& c : coefficient_norms(sol, fem)) out.push_back(c.norm);
    return out;
}

double parseval(const ChaosSolution& sol, const FemSpace& fem) {
    double s = 0;
    for (double n : sorted_norms(sol, fem)) s += n * n;
    return s;
}

/// E[a] by tensor Gauss-Legendre on the closed form at x.
double mean_coefficient(const DiffusionSpec& spec, double x) {
    const auto rule = gauss_rule<double>(Family::Legendre, 16);
    double s = 0;
    std::vector<double> y(spec.M);
    std::vector<std::size_t> node(spec.M, 0);
    for (;;) {
        double w = 1;
        for (std::size_t m = 0; m < spec.M; ++m) {
            y[m] = rule.nodes[node[m]];
            w *= rule.weights[node[m]];
        }
        s += w * evaluate_closed_form(spec, y, x);
        std::size_t m = 0;
        for (; m < spec.M; ++m) {
            if (++node[m] < 16) break;
            node[m] = 0;
        }
        if (m == spec.M) break;
    }
    return s;
}

}  // namespace

TEST_CASE("multinomial expansion of the coefficient") {
    const auto e = expand_diffusion({1, 1.0, 2, SpatialForm::Constant});
    CHECK(e.a0 == 2.0);
    REQUIRE(e.terms.size() == 2);
    CHECK(e.terms[0].mu == MultiIndex::unit(1, 1));
    CHECK(e.terms[0].coefficient == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(e.terms[1].mu == MultiIndex::unit(1, 2));
    CHECK(e.terms[1].coefficient == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(e.tilde_m == 1);

    for (auto [p, count] : {std::pair{1u, 9u}, {2u, 45u}, {3u, 165u}})
        CHECK(expand_diffusion({8, 2.0, p, SpatialForm::Sinusoidal}).term_count() == count);
}

TEST_CASE("expanded and closed forms agree pointwise") {
    std::vector<DiffusionSpec> rows{kExample1, kExample2, kExample3};
    for (std::uint32_t M : {2u, 4u, 6u, 8u})
        for (double s : {2.0, 4.0, 6.0, 8.0})
            for (std::uint32_t p : {1u, 2u, 3u}) rows.push_back({M, s, p, SpatialForm::Sinusoidal});
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& spec : rows) {
        const auto e = expand_diffusion(spec);
        for (int i = 0; i < 100; ++i) {
            std::vector<double> y(spec.M);
            for (auto& v : y) v = u(rng);
            const double x = u(rng);
            const double exact = evaluate_closed_form(spec, y, x);
            REQUIRE(std::abs(evaluate(e, y, x) - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
        }
    }
}

TEST_CASE("positivity checks") {
    const auto r = check_positivity(kExample1);
    CHECK(r.samples == 10000);
    CHECK(r.interval_bound > 0.0);
    CHECK(r.sampled_min >= r.interval_bound);
    CHECK_THROWS_AS(expand_diffusion({20, 1.0, 1, SpatialForm::Constant}), ModelError);
    CHECK_THROWS_AS(expand_diffusion({0, 1.0, 1, SpatialForm::Constant}), ConfigError);
    CHECK_THROWS_AS(expand_diffusion({2, 1.0, 0, SpatialForm::Constant}), ConfigError);
    CHECK(parse_spatial("Sinusoidal") == SpatialForm::Sinusoidal);
    CHECK_THROWS_AS(parse_spatial("cosine"), ConfigError);
}

TEST_CASE("FEM space reproduces the deterministic solution") {
    const FemSpace fem;
    CHECK(fem.dofs() == 79);
    const Eigen::MatrixXd K(fem.stiffness([](double) { return 1.0; }));
    CHECK((K - K.transpose()).norm() == 0.0);
    const Eigen::VectorXd u = Eigen::LLT<Eigen::MatrixXd>(K).solve(fem.load());
    const auto values = fem.values_at_points(u);
    for (std::size_t q = 0; q < values.size(); ++q) {
        const double x = fem.points()[q];
        REQUIRE(std::abs(values[q] - 0.5 * (1 - x * x)) <= 1e-13);
    }
    CHECK(u.dot(K * u) == doctest::Approx(2.0 / 3).epsilon(1e-13));
    CHECK(fem.value_at(u, 0.3) == doctest::Approx(0.5 * (1 - 0.09)).epsilon(1e-13));
    double w = 0;
    for (double v : fem.weights()) w += v;
    CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(FemSpace(20, 4, 3), ConfigError);
    CHECK_THROWS_AS(FemSpace(1, 1), ConfigError);
}

TEST_CASE("a set holding only the zero index gives the mean-coefficient problem") {
    const FemSpace fem;
    for (const auto& spec : {kExample1, kExample2}) {
        const auto e = expand_diffusion(spec);
        const IndexSet set = IndexSet::build(IsoTdSpec{spec.M, 0});
        const auto sol = assemble_and_solve(e, set, fem);
        const Eigen::MatrixXd A(fem.stiffness([&](double x) { return mean_coefficient(spec, x); }));
        const Eigen::VectorXd u = Eigen::LLT<Eigen::MatrixXd>(A).solve(fem.load());
        CHECK((sol.coefficients.col(0) - u).norm() <= 1e-12 * u.norm());
        const auto st = statistics(sol, fem);
        CHECK(std::all_of(st.variance.begin(), st.variance.end(), [](double v) { return v == 0.0; }));
    }
    const auto st = statistics(assemble_and_solve(expand_diffusion(kExample1), IndexSet::build(IsoTdSpec{2, 0}), fem),
                               fem);
    const double ea = mean_coefficient(kExample1, 0.0);
    for (std::size_t q = 0; q < st.mean.size(); ++q) {
        const double x = fem.points()[q];
        REQUIRE(std::abs(st.mean[q] - (1 - x * x) / (2 * ea)) <= 1e-13);
    }
}

TEST_CASE("matrix-form solver equals a dense Kronecker solve") {
    const FemSpace fem(6, 3, 8);
    const auto e = expand_diffusion({3, 1.5, 2, SpatialForm::Sinusoidal});
    const IndexSet set = IndexSet::build(IsoTdSpec{3, 3});
    const std::size_t n = set.size(), d = fem.dofs();
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * d), static_cast<Eigen::Index>(n * d));
    const Eigen::MatrixXd K(fem.stiffness([](double) { return 1.0; }));
    for (std::size_t a = 0; a < n; ++a)
        big.block(static_cast<Eigen::Index>(a * d), static_cast<Eigen::Index>(a * d), static_cast<Eigen::Index>(d),
                  static_cast<Eigen::Index>(d)) += e.a0 * K;
    for (const auto& t : e.terms) {
        const auto G = quadrature_moment_oracle(t.mu, set.indices(), Family::Legendre);
        const Eigen::MatrixXd A(fem.stiffness(
            [&](double x) { return t.coefficient * spatial_factor(SpatialForm::Sinusoidal, t.mu, x); }));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                big.block(static_cast<Eigen::Index>(a * d), static_cast<Eigen::Index>(b * d),
                          static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) += G[a * n + b] * A;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * d));
    rhs.head(static_cast<Eigen::Index>(d)) = fem.load();
    const Eigen::VectorXd x = Eigen::LLT<Eigen::MatrixXd>(big).solve(rhs);

    const auto sol = assemble_and_solve(e, set, fem);
    CHECK_FALSE(sol.report.separable);
    CHECK(sol.report.residual < 1e-9);
    const Eigen::Map<const Eigen::VectorXd> got(sol.coefficients.data(), sol.coefficients.size());
    CHECK((got - x).norm() <= 1e-11 * x.norm());

    SolverOptions threaded;
    threaded.threads = 4;
    const auto again = assemble_and_solve(e, set, fem, threaded);
    CHECK(again.coefficients == sol.coefficients);

    const auto direct = assemble_and_solve(e, std::span<const MultiIndex>(set.indices()), fem);
    CHECK((direct.coefficients - sol.coefficients).norm() <= 1e-13 * sol.coefficients.norm());
}

TEST_CASE("solver errors") {
    const FemSpace fem;
    const auto e = expand_diffusion(kExample2);
    const std::vector<MultiIndex> no_zero{MultiIndex::unit(1)};
    CHECK_THROWS_AS(assemble_and_solve(e, std::span<const MultiIndex>(no_zero), fem), ConfigError);
    SolverOptions starved;
    starved.max_iterations = 2;
    CHECK_THROWS_AS(assemble_and_solve(e, IndexSet::build(IsoTdSpec{4, 3}), fem, starved), NumericalError);
}

TEST_CASE("statistics agree with Monte Carlo sampling of the expansion") {
    const FemSpace fem;
    const auto sol = assemble_and_solve(expand_diffusion(kExample2), IndexSet::build(IsoTdSpec{4, 4}), fem);
    const auto st = statistics(sol, fem);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t q = 5 * 14 + 3;
    const double x = fem.points()[q];
    const int samples = 100000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < samples; ++i) {
        std::array<double, 4> y{u(rng), u(rng), u(rng), u(rng)};
        const double v = evaluate_solution(sol, fem, y, x);
        s1 += v;
        s2 += v * v;
    }
    const double mean = s1 / samples;
    const double var = s2 / samples - mean * mean;
    CHECK(std::abs(mean - st.mean[q]) <= 5 * std::sqrt(st.variance[q] / samples));
    CHECK(std::abs(var - st.variance[q]) <= 0.02 * st.variance[q]);
}

TEST_CASE("relative errors") {
    const FemSpace fem;
    const auto ref = exact_statistics(kExample1, fem);
    const auto e = relative_errors(ref, ref, fem);
    CHECK(e.mean_pct == 0.0);
    CHECK(e.var_pct == 0.0);
    Statistics zero{std::vector<double>(ref.mean.size(), 0.0), std::vector<double>(ref.mean.size(), 0.0)};
    CHECK_THROWS_AS(relative_errors(ref, zero, fem), DegenerateReferenceError);
    CHECK_THROWS_AS(exact_statistics(kExample2, fem), ConfigError);
}

TEST_CASE("Example 1 against the exact solution") {
    const FemSpace fem;
    const auto e = expand_diffusion(kExample1);
    const auto ref = exact_statistics(kExample1, fem);

    const auto td = assemble_and_solve(e, IndexSet::build(IsoTdSpec{2, 19}), fem);
    CHECK(td.report.separable);
    const auto g = estimate_weights(td, fem, 2);
    CHECK(g[0] == doctest::Approx(1.16).epsilon(0.2 / 1.16));
    CHECK(g[1] == doctest::Approx(3.82).epsilon(0.2 / 3.82));
    CHECK(fit_rate(sorted_norms(td, fem), 1, 100) == doctest::Approx(2.27).epsilon(0.3 / 2.27));

    const auto tp = assemble_and_solve(e, IndexSet::build(IsoTpSpec{2, 13}), fem);
    const auto err = relative_errors(statistics(tp, fem), ref, fem);
    CHECK(err.mean_pct > 1e-5);
    CHECK(err.mean_pct < 1e-3);

    const auto small = relative_errors(statistics(assemble_and_solve(e, IndexSet::build(IsoTdSpec{2, 3}), fem), fem),
                                       ref, fem);
    const auto large = relative_errors(statistics(td, fem), ref, fem);
    CHECK(large.mean_pct * 10 < small.mean_pct);
    CHECK(large.var_pct * 10 < small.var_pct);
}

TEST_CASE("pointwise error decreases with the index set and the mesh") {
    const auto e = expand_diffusion(kExample1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::pair<std::array<double, 2>, double>> probes;
    for (int i = 0; i < 20; ++i) probes.push_back({{u(rng), u(rng)}, u(rng)});
    auto max_error = [&](const FemSpace& fem, std::uint32_t K) {
        const auto sol = assemble_and_solve(e, IndexSet::build(IsoTdSpec{2, K}), fem);
        double worst = 0;
        for (const auto& [y, x] : probes) {
            const double exact = (1 - x * x) / (2 * evaluate_closed_form(kExample1, y, x));
            worst = std::max(worst, std::abs(evaluate_solution(sol, fem, y, x) - exact));
        }
        return worst;
    };
    const FemSpace fem;
    const double k5 = max_error(fem, 5), k10 = max_error(fem, 10), k19 = max_error(fem, 19);
    CHECK(k10 < k5);
    CHECK(k19 < k10);
    const double coarse = max_error(FemSpace(5, 1, 4), 19), fine = max_error(FemSpace(20, 1, 4), 19);
    CHECK(fine < coarse);
}

TEST_CASE("coefficient norms grow with nested sets") {
    const FemSpace fem;
    const auto e = expand_diffusion(kExample2);
    double previous = 0;
    for (std::uint32_t K = 0; K <= 6; ++K) {
        const double s = parseval(assemble_and_solve(e, IndexSet::build(IsoTdSpec{4, K}), fem), fem);
        CHECK(s >= previous);
        previous = s;
    }
    ChaosSolution zero{{MultiIndex{}}, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fem.dofs()), 1), {}};
    CHECK(coefficient_norms(zero, fem)[0].norm == 0.0);
}

TEST_CASE("weight estimation on exact exponential decay") {
    const FemSpace fem;
    const IndexSet set = IndexSet::build(IsoTdSpec{2, 6});
    const Eigen::VectorXd base = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(fem.dofs()), 1.0, 2.0);
    ChaosSolution sol{set.indices(), Eigen::MatrixXd(base.size(), static_cast<Eigen::Index>(set.size())), {}};
    for (std::size_t j = 0; j < set.size(); ++j)
        sol.coefficients.col(static_cast<Eigen::Index>(j)) = std::exp(-0.75 * static_cast<double>(set.index(j).order())) * base;
    const auto g = estimate_weights(sol, fem, 2);
    CHECK(g[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(g[0]).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_weights(sol, fem, 3), InsufficientDataError);

    const IndexSet tiny = IndexSet::build(IsoTdSpec{2, 2});
    ChaosSolution short_ray{tiny.indices(), Eigen::MatrixXd::Ones(base.size(), static_cast<Eigen::Index>(tiny.size())),
                            {}};
    CHECK_THROWS_AS(estimate_weights(short_ray, fem, 1), InsufficientDataError);
}

TEST_CASE("rate fit") {
    std::vector<double> norms;
    for (int r = 1; r <= 200; ++r) norms.push_back(3.0 * std::pow(r, -2.5));
    CHECK(std::abs(fit_rate(norms, 1, 100) - 2.5) <= 1e-10);
    CHECK(std::abs(fit_rate(norms, 10, 200) - 2.5) <= 1e-10);
    CHECK_THROWS_AS(fit_rate(norms, 5, 6), InsufficientDataError);
    CHECK_THROWS_AS(fit_rate(norms, 1, 201), InsufficientDataError);
    CHECK_THROWS_AS(fit_rate(norms, 0, 10), InsufficientDataError);
}

TEST_CASE("best-M selection") {
    const FemSpace fem;
    const auto e = expand_diffusion(kExample2);
    const IndexSet set = IndexSet::build(IsoTdSpec{4, 4});
    const auto sol = assemble_and_solve(e, set, fem);
    const auto all = best_m_select(sol, fem, set.size());
    CHECK(std::set<MultiIndex>(all.begin(), all.end()) == std::set<MultiIndex>(set.indices().begin(), set.indices().end()));
    const auto one = best_m_select(sol, fem, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].is_zero());
    const auto norms = coefficient_norms(sol, fem);
    for (std::size_t i = 1; i < norms.size(); ++i) {
        REQUIRE(norms[i - 1].norm >= norms[i].norm);
        if (norms[i - 1].norm == norms[i].norm) REQUIRE(norms[i - 1].ordinal < norms[i].ordinal);
    }
    CHECK_THROWS_AS(best_m_select(sol, fem, set.size() + 1), ConfigError);

    const auto sub = best_m_select(sol, fem, 20);
    const auto resolved = assemble_and_solve(e, std::span<const MultiIndex>(sub), fem);
    CHECK(resolved.report.residual < 1e-9);
}

TEST_CASE("Example 2 weights and rate") {
    const FemSpace fem;
    const auto sol = assemble_and_solve(expand_diffusion(kExample2), IndexSet::build(IsoTdSpec{4, 17}), fem);
    CHECK(sol.report.residual < 1e-9);
    const auto g = estimate_weights(sol, fem, 4);
    const std::array<double, 4> paper{2.40, 4.17, 5.37, 6.38};
    for (std::size_t m = 0; m < 4; ++m) CHECK(std::abs(g[m] - paper[m]) <= 0.25);
    CHECK(std::abs(fit_rate(sorted_norms(sol, fem), 1, 100) - 2.03) <= 0.3);
}
