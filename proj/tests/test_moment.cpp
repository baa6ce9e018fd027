#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "smm/error.hpp"
#include "smm/moment.hpp"
#include "support.hpp"

using namespace smm;

namespace {

IndexSet golden_set() {
    return IndexSet::build(TsSpec{{1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 50, 1.0 / 60, 1.0 / 70}, 1.0 / 20});
}

std::vector<MultiIndex> xi_total_degree(std::uint32_t dims, std::uint32_t degree, bool with_zero) {
    const IndexSet set = IndexSet::build(IsoTdSpec{dims, degree});
    std::vector<MultiIndex> xi;
    for (const auto& mu : set.indices())
        if (with_zero || !mu.is_zero()) xi.push_back(mu);
    return xi;
}

std::set<std::pair<std::size_t, std::size_t>> pattern_pairs(const PatternMatrix& p) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    p.for_each([&](std::size_t r, std::size_t c, std::uint8_t) { out.insert({r, c}); });
    return out;
}

std::vector<SignedMultiIndex> all_offsets(std::uint32_t dims, std::int32_t bound) {
    std::vector<SignedMultiIndex> out;
    std::vector<std::int32_t> dense(dims, -bound);
    for (;;) {
        out.push_back(SignedMultiIndex::from_dense(std::span<const std::int32_t>(dense)));
        std::uint32_t m = 0;
        for (; m < dims; ++m) {
            if (++dense[m] <= bound) break;
            dense[m] = -bound;
        }
        if (m == dims) break;
    }
    return out;
}

}  // namespace

TEST_CASE("weight sets") {
    const auto affine = weight_set(MultiIndex::unit(3));
    REQUIRE(affine.elements.size() == 1);
    CHECK(affine.elements[0] == SignedMultiIndex::unit(3));

    const auto w11 = weight_set(MultiIndex::from_dense({1, 1}));
    CHECK(w11.elements ==
          std::vector<SignedMultiIndex>{SignedMultiIndex::from_dense({1, -1}), SignedMultiIndex::from_dense({1, 1})});

    const auto w21 = weight_set(MultiIndex::from_dense({2, 1}));
    CHECK(w21.sign_part_size == 2);
    CHECK(w21.magnitude_part_size == 2);
    CHECK(w21.elements == std::vector<SignedMultiIndex>{SignedMultiIndex::from_dense({2, -1}),
                                                        SignedMultiIndex::from_dense({2, 1}),
                                                        SignedMultiIndex::from_dense({0, 1})});

    const auto w0 = weight_set(MultiIndex{});
    CHECK(w0.elements == std::vector<SignedMultiIndex>{SignedMultiIndex{}});

    for (const auto& mu : xi_total_degree(4, 6, true)) {
        const WeightSet ws = weight_set(mu);
        REQUIRE(ws.elements.size() <= ws.sign_part_size * ws.magnitude_part_size);
        REQUIRE(std::is_sorted(ws.elements.begin(), ws.elements.end()));
        REQUIRE(std::adjacent_find(ws.elements.begin(), ws.elements.end()) == ws.elements.end());
        for (const auto& w : ws.elements) {
            if (!w.is_zero()) REQUIRE(w.pairs().front().value > 0);
            for (Position p = 1; p <= 4; ++p) {
                const std::int32_t v = w[p];
                const auto m = static_cast<std::int32_t>(mu[p]);
                REQUIRE(std::abs(v) <= m);
                REQUIRE((m - std::abs(v)) % 2 == 0);
            }
        }
    }
}

TEST_CASE("weight-set totals for the polynomial coefficient") {
    const std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> table = {
        {{2, 2}, 9},   {{2, 4}, 38},   {{2, 6}, 110},  {{4, 2}, 25},  {{4, 4}, 255},
        {{4, 6}, 1519}, {{6, 2}, 49}, {{6, 4}, 924}, {{6, 6}, 9324}};
    for (const auto& [key, expected] : table) {
        const auto xi = xi_total_degree(key.first, key.second, true);
        std::size_t total = 0;
        for (const auto& mu : xi) total += weight_set(mu).elements.size();
        CHECK(total == expected);
        CHECK(static_cast<double>(total) <= weight_count_bound(xi));
    }
}

TEST_CASE("neighbour matrices on the golden set") {
    const IndexSet set = golden_set();
    const std::vector<SignedMultiIndex> weights = {SignedMultiIndex{}, SignedMultiIndex::unit(1)};
    const NeighbourMap nm = neighbour_matrices(set, weights);
    CHECK(nm.at(SignedMultiIndex{}).pattern == PatternMatrix::identity(set.size()));

    std::set<std::pair<std::size_t, std::size_t>> expected;
    auto ord = [&](std::initializer_list<std::uint32_t> d) { return set.locate(MultiIndex::from_dense(d)); };
    const std::vector<std::pair<std::initializer_list<std::uint32_t>, std::initializer_list<std::uint32_t>>> chain = {
        {{0, 0, 0}, {1, 0, 0}}, {{1, 0, 0}, {2, 0, 0}}, {{2, 0, 0}, {3, 0, 0}}, {{3, 0, 0}, {4, 0, 0}},
        {{0, 1, 0}, {1, 1, 0}}, {{0, 0, 1}, {1, 0, 1}}, {{1, 1, 0}, {2, 1, 0}}, {{0, 2, 0}, {1, 2, 0}},
        {{1, 0, 1}, {2, 0, 1}}};
    for (const auto& [a, b] : chain) expected.insert({std::min(ord(a), ord(b)), std::max(ord(a), ord(b))});
    CHECK(pattern_pairs(nm.at(SignedMultiIndex::unit(1)).pattern) == expected);
    CHECK(brute_force_neighbour(set, SignedMultiIndex::unit(1)).pattern == nm.at(SignedMultiIndex::unit(1)).pattern);
}

TEST_CASE("brute-force neighbour edge cases") {
    const IndexSet single = IndexSet::build(IsoTdSpec{3, 0});
    CHECK(brute_force_neighbour(single, SignedMultiIndex::unit(2)).pattern.nnz() == 0);
    CHECK(brute_force_neighbour(single, SignedMultiIndex{}).pattern == PatternMatrix::identity(1));
    const IndexSet set = IndexSet::build(IsoTdSpec{3, 3});
    CHECK(brute_force_neighbour(set, SignedMultiIndex{}).pattern == PatternMatrix::identity(set.size()));
}

TEST_CASE("fast neighbour path equals brute force across families") {
    std::mt19937_64 rng(21);
    const std::vector<IndexSetSpec> specs = {smm::test::random_ts(rng, 5, 2e-3, 2e-2), IsoTdSpec{3, 6},
                                             IsoTpSpec{3, 4}, AtpSpec{3, 5.0, {1.0, 1.6, 2.3}},
                                             AtdSpec{3, 6.0, {1.0, 1.25, 2.1}}};
    const auto offsets = all_offsets(3, 2);
    for (const auto& spec : specs) {
        const IndexSet set = IndexSet::build(spec);
        NeighbourStats stats;
        const NeighbourMap fast = neighbour_matrices(set, offsets, {}, &stats);
        for (const auto& w : offsets) REQUIRE(fast.at(w).pattern == brute_force_neighbour(set, w).pattern);
        std::size_t max_order = set.max_order();
        CHECK(stats.locate_steps <= offsets.size() * set.size() * max_order);
    }
}

TEST_CASE("summed matrices") {
    const IndexSet set = IndexSet::build(IsoTdSpec{3, 5});
    const std::vector<MultiIndex> xi = {MultiIndex{}, MultiIndex::unit(2), MultiIndex::from_dense({2, 1}),
                                        MultiIndex::from_dense({1, 0, 3})};
    std::vector<WeightSet> sets;
    for (const auto& mu : xi) sets.push_back(weight_set(mu));
    const auto weights = weight_union(sets);
    const NeighbourMap nm = neighbour_matrices(set, weights);

    const SummedMatrix s0 = summed_matrix(sets[0], nm);
    CHECK(s0.counts == CountMatrix::identity(set.size()));
    const SummedMatrix s1 = summed_matrix(sets[1], nm);
    CHECK(s1.counts.same_pattern(CountMatrix::from_triplets(set.size(), [&] {
        std::vector<CountMatrix::Triplet> t;
        nm.at(SignedMultiIndex::unit(2)).pattern.for_each([&](std::size_t r, std::size_t c, std::uint8_t) {
            t.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), 1});
        });
        return t;
    }())));
    for (std::size_t i = 2; i < xi.size(); ++i) {
        const SummedMatrix s = summed_matrix(sets[i], nm);
        for (const auto& w : sets[i].elements) CHECK(s.counts.nnz() >= nm.at(w).pattern.nnz());
    }
    NeighbourMap partial = nm;
    partial.erase(sets[2].elements.front());
    CHECK_THROWS_AS(summed_matrix(sets[2], partial), InternalError);
}

TEST_CASE("moment matrices against the quadrature oracle") {
    SUBCASE("identity and the second moment") {
        const IndexSet line = IndexSet::build(IsoTdSpec{1, 2});
        const auto g = assemble_moment_matrices(line, std::vector<MultiIndex>{MultiIndex{}, MultiIndex::unit(1, 2)},
                                                Family::Legendre);
        CHECK(g.matrices[0].values == RealMatrix::identity(3));
        CHECK(g.matrices[1].values(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    }
    SUBCASE("oracle reproduces K") {
        for (Family family : {Family::Legendre, Family::Hermite})
            for (unsigned k = 0; k <= 5; ++k) {
                const IndexSet line = IndexSet::build(IsoTdSpec{1, 12});
                const auto oracle = quadrature_moment_oracle(MultiIndex::unit(1, k), line.indices(), family);
                const KMatrix km = build_k_matrix(family, k, 13);
                for (std::size_t a = 0; a < 13; ++a)
                    for (std::size_t b = 0; b < 13; ++b)
                        REQUIRE(std::abs(oracle[a * 13 + b] - km(a, b)) <= 1e-11 * std::max(1.0, std::abs(km(a, b))));
            }
    }
    SUBCASE("entrywise agreement and pattern equivalence") {
        std::mt19937_64 rng(99);
        const std::vector<IndexSetSpec> specs = {IsoTdSpec{3, 3}, IsoTpSpec{2, 5}, AtdSpec{3, 4.0, {1.0, 1.5, 2.5}},
                                                 AtpSpec{2, 4.0, {1.0, 1.9}}, TsSpec{{0.6, 0.4, 0.3}, 0.02}};
        const auto xi = IndexSet::build(IsoTpSpec{3, 4}).indices();
        for (const auto& spec : specs) {
            const IndexSet set = IndexSet::build(spec);
            REQUIRE(set.size() <= 50);
            std::vector<MultiIndex> sample;
            std::sample(xi.begin(), xi.end(), std::back_inserter(sample), 25, rng);
            sample.push_back(MultiIndex{});
            for (Family family : {Family::Legendre, Family::Hermite}) {
                const auto g = assemble_moment_matrices(set, sample, family, {1, 0});
                REQUIRE_FALSE(g.direct);
                std::vector<WeightSet> sets;
                for (const auto& mu : sample) sets.push_back(weight_set(mu));
                const NeighbourMap nm = neighbour_matrices(set, weight_union(sets));
                for (std::size_t i = 0; i < sample.size(); ++i) {
                    const auto oracle = quadrature_moment_oracle(sample[i], set.indices(), family);
                    const SummedMatrix s = summed_matrix(sets[i], nm);
                    const RealMatrix& values = g.matrices[i].values;
                    REQUIRE(values.same_pattern(RealMatrix::from_triplets(set.size(), [&] {
                        std::vector<RealMatrix::Triplet> t;
                        s.counts.for_each([&](std::size_t r, std::size_t c, std::int32_t) {
                            t.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), 0.0});
                        });
                        return t;
                    }())));
                    const std::size_t n = set.size();
                    for (std::size_t a = 0; a < n; ++a)
                        for (std::size_t b = 0; b < n; ++b) {
                            REQUIRE(std::abs(values(a, b) - oracle[a * n + b]) <= 1e-10);
                            REQUIRE(oracle[a * n + b] == oracle[b * n + a]);
                            if (std::abs(oracle[a * n + b]) > 1e-10) REQUIRE(s.counts(a, b) > 0);
                            if (s.counts(a, b) > 0) REQUIRE(values(a, b) != 0.0);
                        }
                }
            }
        }
    }
}

TEST_CASE("oracle guards and identity") {
    const IndexSet set = IndexSet::build(IsoTdSpec{2, 4});
    const auto id = quadrature_moment_oracle(MultiIndex{}, set.indices(), Family::Hermite);
    for (std::size_t a = 0; a < set.size(); ++a)
        for (std::size_t b = 0; b < set.size(); ++b)
            CHECK(std::abs(id[a * set.size() + b] - (a == b ? 1.0 : 0.0)) <= 1e-12);
    const IndexSet big = IndexSet::build(IsoTdSpec{3, 12});
    CHECK_THROWS_AS(quadrature_moment_oracle(MultiIndex{}, big.indices(), Family::Legendre), SizeError);
}

TEST_CASE("direct and neighbour assembly agree, for any worker count") {
    const IndexSet set = IndexSet::build(IsoTdSpec{4, 6});
    const auto xi = xi_total_degree(4, 3, false);
    const auto direct = assemble_moment_matrices(set, xi, Family::Legendre, {1, 1u << 20});
    const auto fast1 = assemble_moment_matrices(set, xi, Family::Legendre, {1, 0});
    const auto fast4 = assemble_moment_matrices(set, xi, Family::Legendre, {4, 0});
    CHECK(direct.direct);
    CHECK_FALSE(fast1.direct);
    REQUIRE(direct.matrices.size() == xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) {
        REQUIRE(fast1.matrices[i].values == fast4.matrices[i].values);
        REQUIRE(fast1.matrices[i].values.same_pattern(direct.matrices[i].values));
        const auto dd = direct.matrices[i].values.to_dense();
        const auto fd = fast1.matrices[i].values.to_dense();
        for (std::size_t j = 0; j < dd.size(); ++j) REQUIRE(dd[j] == fd[j]);
    }
    CHECK(fast1.stats.locate_steps == fast4.stats.locate_steps);
    CHECK(fast1.stats.locate_steps <= fast1.weight_count * set.size() * set.max_order());
}

TEST_CASE("undersized K matrices are rejected") {
    const IndexSet set = IndexSet::build(IsoTdSpec{2, 4});
    const std::vector<MultiIndex> xi = {MultiIndex::unit(1, 2)};
    const KMatrixMap small = build_k_matrices(Family::Legendre, xi, 3);
    const auto ws = weight_set(xi[0]);
    const auto nm = neighbour_matrices(set, ws.elements);
    CHECK_THROWS_AS(moment_matrix(xi[0], set, summed_matrix(ws, nm), small), DimensionError);
}

TEST_CASE("Matrix Market export") {
    const IndexSet set = IndexSet::build(IsoTdSpec{1, 2});
    const auto nm = neighbour_matrices(set, std::vector<SignedMultiIndex>{SignedMultiIndex::unit(1)});
    std::ostringstream pattern;
    write_matrix_market(pattern, nm.begin()->second.pattern, MatrixMarketField::Pattern);
    CHECK(pattern.str() == "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n");
    const auto g = assemble_moment_matrices(set, std::vector<MultiIndex>{MultiIndex{}}, Family::Legendre);
    std::ostringstream real;
    write_matrix_market(real, g.matrices[0].values, MatrixMarketField::Real);
    CHECK(real.str() == "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n");
}
