#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "smm/error.hpp"
#include "smm/index_set.hpp"
#include "support.hpp"

using namespace smm;
using smm::test::enumerate_box;
using smm::test::sorted_members;

namespace {

IndexSet golden_set() {
    return IndexSet::build(TsSpec{{1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 50, 1.0 / 60, 1.0 / 70}, 1.0 / 20});
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

TEST_CASE("golden threshold set: order, weights and tree") {
    const IndexSet set = golden_set();
    const std::vector<MultiIndex> expected = {
        MultiIndex::from_dense({0, 0, 0}), MultiIndex::from_dense({0, 0, 1}), MultiIndex::from_dense({0, 0, 2}),
        MultiIndex::from_dense({0, 1, 0}), MultiIndex::from_dense({0, 1, 1}), MultiIndex::from_dense({0, 2, 0}),
        MultiIndex::from_dense({1, 0, 0}), MultiIndex::from_dense({1, 0, 1}), MultiIndex::from_dense({1, 1, 0}),
        MultiIndex::from_dense({1, 2, 0}), MultiIndex::from_dense({2, 0, 0}), MultiIndex::from_dense({2, 0, 1}),
        MultiIndex::from_dense({2, 1, 0}), MultiIndex::from_dense({3, 0, 0}), MultiIndex::from_dense({4, 0, 0})};
    const std::vector<double> weights = {1,        0.25,      0.0625,   1.0 / 3, 1.0 / 12,
                                         1.0 / 9,  0.5,       0.125,    1.0 / 6, 1.0 / 18,
                                         0.25,     0.0625,    1.0 / 12, 0.125,   0.0625};
    const std::vector<std::int64_t> parents = {-1, 0, 1, 0, 3, 3, 0, 6, 6, 8, 6, 10, 10, 10, 13};
    REQUIRE(set.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(set.index(i) == expected[i]);
        CHECK(std::abs(set.weight(i) - weights[i]) <= 1e-12);
        CHECK(set.parent(i) == parents[i]);
    }
    // Children are listed in increasing position order.
    CHECK(std::vector<IndexSet::Ordinal>(set.children(0).begin(), set.children(0).end()) ==
          std::vector<IndexSet::Ordinal>{6, 3, 1});
    CHECK(std::vector<IndexSet::Ordinal>(set.children(10).begin(), set.children(10).end()) ==
          std::vector<IndexSet::Ordinal>{13, 12, 11});
}

TEST_CASE("degenerate sets") {
    CHECK(IndexSet::build(IsoTdSpec{4, 0}).size() == 1);
    const IndexSet tiny = IndexSet::build(TsSpec{{0.3, 0.2}, 0.5});
    CHECK(tiny.size() == 1);
    CHECK(tiny.index(0).is_zero());
}

TEST_CASE("invalid specs are rejected") {
    CHECK_THROWS_AS(IndexSet::build(TsSpec{{1.0, 0.5}, 0.1}), ConfigError);
    CHECK_THROWS_AS(IndexSet::build(TsSpec{{0.5, 0.6}, 0.1}), ConfigError);
    CHECK_THROWS_AS(IndexSet::build(TsSpec{{0.5}, 0.0}), ConfigError);
    CHECK_THROWS_AS(IndexSet::build(TsSpec{{0.5}, 1.0}), ConfigError);
    CHECK_THROWS_AS(IndexSet::build(AtdSpec{2, 3.0, {1.0, 0.0}}), ConfigError);
    CHECK_THROWS_AS(IndexSet::build(AtpSpec{2, 3.0, {2.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(IndexSet::build(AtpSpec{2, 3.0, {1.0}}), ConfigError);
}

TEST_CASE("tensor-product and total-degree cardinalities") {
    for (std::uint32_t n = 1; n <= 6; ++n)
        for (std::uint32_t k = 0; k <= 8; ++k) {
            CHECK(IndexSet::build(IsoTpSpec{n, k}).size() == static_cast<std::size_t>(std::pow(k + 1, n)));
            CHECK(IndexSet::build(IsoTdSpec{n, k}).size() == binomial(n + k, k));
        }
}

TEST_CASE("locate walks the tree") {
    const IndexSet set = golden_set();
    std::size_t steps = 0;
    const std::size_t ordinal = set.locate(MultiIndex::from_dense({2, 0, 1}), &steps);
    CHECK(ordinal == 11);
    CHECK(steps == 3);
    CHECK(set.locate(MultiIndex{}) == 0);
    CHECK_THROWS_AS(set.locate(MultiIndex::from_dense({0, 0, 3})), NotFoundError);
    CHECK_THROWS_AS(set.locate(MultiIndex::from_dense({0, 0, 0, 1})), NotFoundError);
}

TEST_CASE("locate round-trip on random sets") {
    std::mt19937_64 rng(7);
    std::size_t big = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const TsSpec spec = smm::test::random_ts(rng, 8, 1e-3, 5e-2);
        const IndexSet set = IndexSet::build(spec);
        big = std::max(big, set.size());
        for (std::size_t i = 0; i < set.size(); ++i) {
            std::size_t steps = 0;
            REQUIRE(set.locate(set.index(i), &steps) == i);
            CHECK(steps == static_cast<std::size_t>(set.index(i).order()));
        }
    }
    CHECK(big >= 500);
    for (const IndexSetSpec& spec : std::vector<IndexSetSpec>{IsoTdSpec{4, 6}, IsoTpSpec{3, 5},
                                                              AtpSpec{3, 4.0, {1.0, 1.7, 2.5}},
                                                              AtdSpec{4, 5.0, {1.0, 1.3, 2.0, 3.1}}}) {
        const IndexSet set = IndexSet::build(spec);
        for (std::size_t i = 0; i < set.size(); ++i) REQUIRE(set.locate(set.index(i)) == i);
    }
}

TEST_CASE("contains matches a linear scan") {
    const IndexSet golden = golden_set();
    CHECK_FALSE(golden.contains(to_signed(MultiIndex::from_dense({0, 0, 3}))));
    CHECK_FALSE(golden.contains(SignedMultiIndex::from_dense({1, -1, 0})));
    CHECK(golden.contains(SignedMultiIndex::from_dense({1, 2, 0})));

    std::mt19937_64 rng(11);
    const std::vector<IndexSetSpec> specs = {smm::test::random_ts(rng, 6, 5e-3, 5e-2), IsoTdSpec{4, 5},
                                             IsoTpSpec{3, 4}, AtpSpec{3, 4.0, {1.0, 1.5, 2.2}},
                                             AtdSpec{3, 5.0, {1.0, 1.4, 2.6}}};
    for (const auto& spec : specs) {
        const IndexSet set = IndexSet::build(spec);
        const auto members = sorted_members(set);
        std::uniform_int_distribution<std::size_t> pick(0, set.size() - 1);
        std::uniform_int_distribution<int> entry(-3, 3);
        std::uniform_int_distribution<int> len(1, 7);
        for (int t = 0; t < 2000; ++t) {
            const std::size_t eta = pick(rng);
            std::vector<std::int32_t> dense(static_cast<std::size_t>(len(rng)));
            for (auto& v : dense) v = entry(rng);
            const auto w = SignedMultiIndex::from_dense(std::span<const std::int32_t>(dense));
            const SignedMultiIndex gamma = subtract(set.index(eta), w);
            const double hint = set.candidate_weight(set.weight(eta), set.offset_weight(w));
            const auto unsigned_gamma = to_unsigned(gamma);
            const bool expected =
                unsigned_gamma && std::binary_search(members.begin(), members.end(), *unsigned_gamma);
            REQUIRE(set.contains(gamma, hint) == expected);
            REQUIRE(set.contains(gamma) == expected);
        }
    }
}

TEST_CASE("subtract agrees with dense arithmetic") {
    CHECK(subtract(MultiIndex::from_dense({1, 2, 0}), SignedMultiIndex::from_dense({1, -1, 0})) ==
          SignedMultiIndex::from_dense({0, 3, 0}));
    const auto a = MultiIndex::from_dense({3, 0, 2});
    CHECK(subtract(a, to_signed(a)).is_zero());

    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(0, 8), pos(0, 4), sgn(-4, 4);
    for (int t = 0; t < 10000; ++t) {
        std::vector<std::uint32_t> da(static_cast<std::size_t>(len(rng)));
        std::vector<std::int32_t> db(static_cast<std::size_t>(len(rng)));
        for (auto& v : da) v = static_cast<std::uint32_t>(pos(rng));
        for (auto& v : db) v = sgn(rng);
        const std::size_t n = std::max(da.size(), db.size());
        std::vector<std::int32_t> expected(n, 0);
        for (std::size_t i = 0; i < da.size(); ++i) expected[i] += static_cast<std::int32_t>(da[i]);
        for (std::size_t i = 0; i < db.size(); ++i) expected[i] -= db[i];
        const auto got = subtract(MultiIndex::from_dense(std::span<const std::uint32_t>(da)),
                                  SignedMultiIndex::from_dense(std::span<const std::int32_t>(db)));
        REQUIRE(got.to_dense(n) == expected);
    }
}

TEST_CASE("every generated set is downward closed") {
    std::mt19937_64 rng(5);
    const std::vector<IndexSetSpec> specs = {smm::test::random_ts(rng, 7, 1e-3, 1e-2), IsoTdSpec{5, 5},
                                             IsoTpSpec{3, 4}, AtpSpec{4, 3.0, {1.0, 1.2, 2.0, 2.9}},
                                             AtdSpec{5, 6.0, {1.0, 1.1, 1.9, 2.5, 4.0}}};
    for (const auto& spec : specs) {
        const IndexSet set = IndexSet::build(spec);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const auto& a = set.index(i);
            for (const auto& e : a.pairs()) {
                const auto lower = subtract(a, SignedMultiIndex::unit(e.position, 1));
                REQUIRE(set.contains(lower));
            }
        }
    }
}

TEST_CASE("anisotropic sets match their defining conditions") {
    const std::vector<double> g = {1.0, 1.37, 2.21};
    const double k = 5.3;
    const auto atp = enumerate_box(3, 6, [&](const std::vector<std::uint32_t>& a) {
        for (std::size_t n = 0; n < a.size(); ++n)
            if (g[n] * a[n] > g[0] * k) return false;
        return true;
    });
    CHECK(sorted_members(IndexSet::build(AtpSpec{3, k, g})) == atp);
    const auto atd = enumerate_box(3, 6, [&](const std::vector<std::uint32_t>& a) {
        double s = 0;
        for (std::size_t n = 0; n < a.size(); ++n) s += g[n] * a[n];
        return s <= g[0] * k;
    });
    CHECK(sorted_members(IndexSet::build(AtdSpec{3, k, g})) == atd);
}

TEST_CASE("aTD equals the exponentially transformed threshold set") {
    const std::vector<std::vector<double>> weights = {{1.0, 1.53, 2.21, 3.97}, {0.7, 0.9, 0.9, 2.0}, {2.0, 3.5, 3.6, 8.0}};
    for (const auto& g : weights)
        for (double k : {2.5, 4.1, 6.7}) {
            TsSpec ts{{}, std::exp(-k)};
            for (double gn : g) ts.mu.push_back(std::exp(-gn / g[0]));
            CHECK(sorted_members(IndexSet::build(AtdSpec{static_cast<std::uint32_t>(g.size()), k, g})) ==
                  sorted_members(IndexSet::build(ts)));
        }
}

TEST_CASE("constant weights reduce to the isotropic sets") {
    for (std::uint32_t n = 1; n <= 4; ++n)
        for (std::uint32_t k = 0; k <= 6; ++k)
            for (double c : {0.3, 1.0, 2.7}) {
                const std::vector<double> g(n, c);
                CHECK(sorted_members(IndexSet::build(AtpSpec{n, static_cast<double>(k), g})) ==
                      sorted_members(IndexSet::build(IsoTpSpec{n, k})));
                CHECK(sorted_members(IndexSet::build(AtdSpec{n, static_cast<double>(k), g})) ==
                      sorted_members(IndexSet::build(IsoTdSpec{n, k})));
            }
}

TEST_CASE("text serialization round-trips") {
    const IndexSet set = IndexSet::build(IsoTdSpec{3, 4});
    std::stringstream ss;
    write_text(ss, set);
    const IndexSet loaded = read_text(ss);
    REQUIRE(loaded.size() == set.size());
    CHECK(loaded.family() == SetFamily::Loaded);
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(loaded.index(i) == set.index(i));
        CHECK(loaded.parent(i) == set.parent(i));
        CHECK(loaded.locate(set.index(i)) == i);
    }
    CHECK_FALSE(loaded.contains(SignedMultiIndex::from_dense({5})));

    std::stringstream golden;
    write_text(golden, golden_set());
    std::string first;
    std::getline(golden, first);
    CHECK(first == "0\t-1\t\t1");
    std::getline(golden, first);
    CHECK(first == "1\t0\t3:1\t0.25");
}
