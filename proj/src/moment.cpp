#include "smm/moment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "smm/error.hpp"
#include "smm/parallel.hpp"
#include "smm/quadrature.hpp"

namespace smm {

namespace {

using Entry = MultiIndex::Entry;
using SignedEntry = SignedMultiIndex::Entry;

SignedMultiIndex sign_canonical(std::vector<SignedEntry> pairs) {
    if (!pairs.empty() && pairs.front().value < 0)
        for (auto& e : pairs) e.value = -e.value;
    return SignedMultiIndex::from_pairs(std::move(pairs));
}

/// gamma = eta - w into `out`; false if some exponent would be negative.
bool difference_into(std::span<const Entry> eta, std::span<const SignedEntry> w, std::vector<Entry>& out) {
    out.clear();
    std::size_t i = 0, j = 0;
    while (i < eta.size() || j < w.size()) {
        if (j == w.size() || (i < eta.size() && eta[i].position < w[j].position)) {
            out.push_back(eta[i++]);
        } else if (i == eta.size() || w[j].position < eta[i].position) {
            if (w[j].value > 0) return false;
            out.push_back({w[j].position, static_cast<std::uint32_t>(-w[j].value)});
            ++j;
        } else {
            const std::int64_t v = static_cast<std::int64_t>(eta[i].value) - w[j].value;
            if (v < 0) return false;
            if (v > 0) out.push_back({eta[i].position, static_cast<std::uint32_t>(v)});
            ++i;
            ++j;
        }
    }
    return true;
}

/// b - a == sign * w, without allocating.
bool difference_equals(std::span<const Entry> a, std::span<const Entry> b, std::span<const SignedEntry> w, int sign) {
    std::size_t i = 0, j = 0, k = 0;
    for (;;) {
        Position pos = ~Position{0};
        if (i < a.size()) pos = std::min(pos, a[i].position);
        if (j < b.size()) pos = std::min(pos, b[j].position);
        if (k < w.size()) pos = std::min(pos, w[k].position);
        if (pos == ~Position{0}) return true;
        std::int64_t d = 0;
        if (i < a.size() && a[i].position == pos) d -= a[i++].value;
        if (j < b.size() && b[j].position == pos) d += b[j++].value;
        std::int64_t expected = 0;
        if (k < w.size() && w[k].position == pos) expected = static_cast<std::int64_t>(sign) * w[k++].value;
        if (d != expected) return false;
    }
}

std::uint32_t exponent_at(const MultiIndex& a, Position position) { return a[position]; }

void check_k_dims(const MultiIndex& mu, std::uint32_t max_exponent, const KMatrixMap& kmats) {
    for (const auto& e : mu.pairs()) {
        const auto it = kmats.find(e.value);
        if (it == kmats.end()) throw InternalError("missing K matrix for exponent " + std::to_string(e.value));
        if (it->second.dim() <= max_exponent)
            throw DimensionError("K matrix of dimension " + std::to_string(it->second.dim()) +
                                 " cannot index exponent " + std::to_string(max_exponent));
    }
}

double product_value(const MultiIndex& mu, const MultiIndex& a, const MultiIndex& b, const KMatrixMap& kmats) {
    double value = 1.0;
    for (const auto& e : mu.pairs())
        value *= kmats.at(e.value)(exponent_at(a, e.position), exponent_at(b, e.position));
    return value;
}

std::uint32_t max_exponent_of(std::span<const MultiIndex> basis) {
    std::uint32_t best = 0;
    for (const auto& a : basis) best = std::max(best, a.max_exponent());
    return best;
}

}  // namespace

WeightSet weight_set(const MultiIndex& mu) {
    WeightSet ws;
    ws.mu = mu;
    const auto support = mu.pairs();
    if (support.empty()) {
        ws.elements.push_back(SignedMultiIndex{});
        return ws;
    }
    ws.sign_part_size = std::size_t{1} << (support.size() - 1);
    for (const auto& e : support) ws.magnitude_part_size *= e.value / 2 + 1;

    std::set<SignedMultiIndex> unique;
    std::vector<std::uint32_t> magnitude(support.size());
    for (std::size_t signs = 0; signs < ws.sign_part_size; ++signs) {
        for (std::size_t i = 0; i < support.size(); ++i) magnitude[i] = support[i].value;
        for (;;) {
            std::vector<SignedEntry> pairs;
            for (std::size_t i = 0; i < support.size(); ++i) {
                if (magnitude[i] == 0) continue;
                const bool negative = i > 0 && ((signs >> (i - 1)) & 1u);
                const auto v = static_cast<std::int32_t>(magnitude[i]);
                pairs.push_back({support[i].position, negative ? -v : v});
            }
            unique.insert(sign_canonical(std::move(pairs)));
            // Odometer over mu_m, mu_m - 2, ..., down to 0 or 1.
            std::size_t i = 0;
            for (; i < support.size(); ++i) {
                if (magnitude[i] >= 2) {
                    magnitude[i] -= 2;
                    break;
                }
                magnitude[i] = support[i].value;
            }
            if (i == support.size()) break;
        }
    }
    ws.elements.assign(unique.begin(), unique.end());
    return ws;
}

std::vector<SignedMultiIndex> weight_union(std::span<const WeightSet> sets) {
    std::set<SignedMultiIndex> unique;
    for (const auto& ws : sets) unique.insert(ws.elements.begin(), ws.elements.end());
    return {unique.begin(), unique.end()};
}

double weight_count_bound(std::span<const MultiIndex> xi) {
    std::uint32_t max_exp = 0;
    Position length = 1;
    for (const auto& mu : xi) {
        max_exp = std::max(max_exp, mu.max_exponent());
        length = std::max(length, mu.length());
    }
    return 0.5 * static_cast<double>(xi.size()) * std::pow(static_cast<double>(max_exp) + 2.0, length);
}

NeighbourMap neighbour_matrices(const IndexSet& set, std::span<const SignedMultiIndex> weights,
                                const NeighbourOptions& options, NeighbourStats* stats) {
    const std::size_t n = set.size();
    std::vector<NeighbourMatrix> results(weights.size());
    std::vector<NeighbourStats> per_weight(weights.size());

    parallel_for(weights.size(), options.threads, [&](std::size_t wi) {
        const SignedMultiIndex& w = weights[wi];
        NeighbourStats& st = per_weight[wi];
        std::vector<PatternMatrix::Triplet> triplets;
        if (w.is_zero()) {
            triplets.reserve(n);
            for (std::size_t a = 0; a < n; ++a)
                triplets.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a), 1});
        } else {
            const double offset = set.offset_weight(w);
            std::vector<Entry> gamma;
            for (std::size_t eta = 0; eta < n; ++eta) {
                ++st.candidates;
                if (!difference_into(set.index(eta).pairs(), w.pairs(), gamma)) continue;
                if (!set.admits(gamma, set.candidate_weight(set.weight(eta), offset))) continue;
                ++st.tested;
                const auto found = set.try_locate(gamma, &st.locate_steps);
                if (!found) continue;
                ++st.located;
                triplets.push_back({static_cast<std::uint32_t>(*found), static_cast<std::uint32_t>(eta), 1});
            }
        }
        results[wi] = {w, PatternMatrix::from_triplets(n, std::move(triplets))};
    });

    NeighbourMap out;
    NeighbourStats total;
    for (std::size_t wi = 0; wi < weights.size(); ++wi) {
        total.candidates += per_weight[wi].candidates;
        total.tested += per_weight[wi].tested;
        total.located += per_weight[wi].located;
        total.locate_steps += per_weight[wi].locate_steps;
        out.insert_or_assign(weights[wi], std::move(results[wi]));
    }
    if (stats) *stats = total;
    return out;
}

NeighbourMatrix brute_force_neighbour(std::span<const MultiIndex> basis, const SignedMultiIndex& w) {
    std::vector<PatternMatrix::Triplet> triplets;
    for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = a; b < basis.size(); ++b)
            if (difference_equals(basis[a].pairs(), basis[b].pairs(), w.pairs(), 1) ||
                difference_equals(basis[a].pairs(), basis[b].pairs(), w.pairs(), -1))
                triplets.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), 1});
    return {w, PatternMatrix::from_triplets(basis.size(), std::move(triplets))};
}

SummedMatrix summed_matrix(const WeightSet& ws, const NeighbourMap& nmats) {
    std::vector<CountMatrix::Triplet> triplets;
    std::size_t dim = 0;
    bool have_dim = false;
    for (const auto& w : ws.elements) {
        const auto it = nmats.find(w);
        if (it == nmats.end()) throw InternalError("missing neighbour matrix for w = " + to_tuple_string(w));
        const PatternMatrix& p = it->second.pattern;
        if (have_dim && p.dim() != dim) throw InternalError("neighbour matrices of different dimensions");
        dim = p.dim();
        have_dim = true;
        p.for_each([&](std::size_t r, std::size_t c, std::uint8_t) {
            triplets.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), 1});
        });
    }
    return {ws.mu, CountMatrix::from_triplets(dim, std::move(triplets))};
}

KMatrixMap build_k_matrices(Family family, std::span<const MultiIndex> xi, std::size_t dim) {
    KMatrixMap out;
    for (const auto& mu : xi)
        for (const auto& e : mu.pairs())
            if (!out.count(e.value)) out.emplace(e.value, build_k_matrix(family, e.value, dim));
    return out;
}

MomentMatrix moment_matrix(const MultiIndex& mu, const IndexSet& set, const SummedMatrix& smat,
                           const KMatrixMap& kmats) {
    if (smat.counts.dim() != set.size()) throw DimensionError("summed matrix does not match the index set");
    check_k_dims(mu, set.max_exponent(), kmats);
    std::vector<RealMatrix::Triplet> triplets;
    triplets.reserve(smat.counts.nnz_stored());
    smat.counts.for_each([&](std::size_t r, std::size_t c, std::int32_t) {
        triplets.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c),
                            product_value(mu, set.index(r), set.index(c), kmats)});
    });
    return {mu, RealMatrix::from_triplets(set.size(), std::move(triplets))};
}

bool moment_entry_nonzero(const MultiIndex& mu, const MultiIndex& a, const MultiIndex& b) {
    const auto pa = a.pairs(), pb = b.pairs(), pm = mu.pairs();
    std::size_t i = 0, j = 0, k = 0;
    for (;;) {
        Position pos = ~Position{0};
        if (i < pa.size()) pos = std::min(pos, pa[i].position);
        if (j < pb.size()) pos = std::min(pos, pb[j].position);
        if (k < pm.size()) pos = std::min(pos, pm[k].position);
        if (pos == ~Position{0}) return true;
        std::int64_t d = 0;
        if (i < pa.size() && pa[i].position == pos) d += pa[i++].value;
        if (j < pb.size() && pb[j].position == pos) d -= pb[j++].value;
        std::int64_t m = 0;
        if (k < pm.size() && pm[k].position == pos) m = pm[k++].value;
        if (d < 0) d = -d;
        if (d > m || (m - d) % 2 != 0) return false;
    }
}

MomentMatrix direct_moment_matrix(const MultiIndex& mu, std::span<const MultiIndex> basis, const KMatrixMap& kmats) {
    check_k_dims(mu, max_exponent_of(basis), kmats);
    const std::size_t n = basis.size();
    std::vector<std::vector<RealMatrix::Triplet>> rows(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b)
            if (moment_entry_nonzero(mu, basis[a], basis[b]))
                rows[a].push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                                   product_value(mu, basis[a], basis[b], kmats)});
    std::vector<RealMatrix::Triplet> triplets;
    for (auto& r : rows) triplets.insert(triplets.end(), r.begin(), r.end());
    return {mu, RealMatrix::from_triplets(n, std::move(triplets))};
}

std::vector<double> quadrature_moment_oracle(const MultiIndex& mu, std::span<const MultiIndex> basis, Family family) {
    const std::size_t n = basis.size();
    if (n > 400) throw SizeError("quadrature oracle limited to 400 basis functions");
    Position dims = mu.length();
    for (const auto& a : basis) dims = std::max(dims, a.length());
    if (dims > 6) throw SizeError("quadrature oracle limited to 6 dimensions");

    std::vector<std::uint32_t> max_deg(dims, 0);
    for (const auto& a : basis)
        for (const auto& e : a.pairs()) max_deg[e.position - 1] = std::max(max_deg[e.position - 1], e.value);
    std::vector<GaussRule<long double>> rules;
    std::vector<std::vector<std::vector<long double>>> phi(dims);  // [dim][node][degree]
    std::vector<std::vector<long double>> power(dims);             // [dim][node] y^mu_m
    double total_nodes = 1.0;
    for (Position m = 0; m < dims; ++m) {
        const std::uint32_t degree = 2 * max_deg[m] + mu[m + 1];
        const std::size_t nodes = degree / 2 + 2;
        total_nodes *= static_cast<double>(nodes);
        if (total_nodes > 2e6) throw SizeError("quadrature oracle limited to 2e6 tensor nodes");
        rules.push_back(gauss_rule<long double>(family, nodes));
        phi[m].assign(nodes, std::vector<long double>(max_deg[m] + 1));
        power[m].resize(nodes);
        for (std::size_t q = 0; q < nodes; ++q) {
            const long double y = rules[m].nodes[q];
            eval_polys<long double>(family, y, std::span<long double>(phi[m][q]));
            power[m][q] = std::pow(y, static_cast<long double>(mu[m + 1]));
        }
    }

    std::vector<long double> acc(n * n, 0.0L);
    std::vector<long double> basis_values(n);
    std::vector<std::size_t> node(dims, 0);
    for (;;) {
        long double weight = 1.0L;
        for (Position m = 0; m < dims; ++m) weight *= rules[m].weights[node[m]] * power[m][node[m]];
        for (std::size_t a = 0; a < n; ++a) {
            long double v = 1.0L;
            for (const auto& e : basis[a].pairs()) v *= phi[e.position - 1][node[e.position - 1]][e.value];
            basis_values[a] = v;
        }
        for (std::size_t a = 0; a < n; ++a) {
            const long double wa = weight * basis_values[a];
            for (std::size_t b = a; b < n; ++b) acc[a * n + b] += wa * basis_values[b];
        }
        Position m = 0;
        for (; m < dims; ++m) {
            if (++node[m] < rules[m].nodes.size()) break;
            node[m] = 0;
        }
        if (m == dims) break;
    }
    std::vector<double> out(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) out[a * n + b] = out[b * n + a] = static_cast<double>(acc[a * n + b]);
    return out;
}

namespace {

void check_bound(std::span<const MultiIndex> xi, const std::vector<WeightSet>& sets, MomentAssembly& result) {
    result.weight_total = 0;
    for (const auto& ws : sets) result.weight_total += ws.elements.size();
    if (!xi.empty() && static_cast<double>(result.weight_total) > weight_count_bound(xi))
        throw InternalError("weight-set sizes exceed the summed-matrix work bound");
}

}  // namespace

MomentAssembly assemble_moment_matrices(const IndexSet& set, std::span<const MultiIndex> xi, Family family,
                                        const MomentOptions& options) {
    if (set.size() < options.dense_threshold) {
        MomentAssembly result = assemble_moment_matrices(std::span<const MultiIndex>(set.indices()), xi, family, options);
        return result;
    }
    MomentAssembly result;
    for (const auto& mu : xi) result.weight_sets.push_back(weight_set(mu));
    check_bound(xi, result.weight_sets, result);
    const auto weights = weight_union(result.weight_sets);
    result.weight_count = weights.size();
    const KMatrixMap kmats = build_k_matrices(family, xi, std::size_t{set.max_exponent()} + 1);
    const NeighbourMap nmats = neighbour_matrices(set, weights, {options.threads}, &result.stats);
    result.matrices.resize(xi.size());
    parallel_for(xi.size(), options.threads, [&](std::size_t i) {
        result.matrices[i] = moment_matrix(xi[i], set, summed_matrix(result.weight_sets[i], nmats), kmats);
    });
    return result;
}

MomentAssembly assemble_moment_matrices(std::span<const MultiIndex> basis, std::span<const MultiIndex> xi,
                                        Family family, const MomentOptions& options) {
    MomentAssembly result;
    result.direct = true;
    for (const auto& mu : xi) result.weight_sets.push_back(weight_set(mu));
    check_bound(xi, result.weight_sets, result);
    result.weight_count = weight_union(result.weight_sets).size();
    const KMatrixMap kmats = build_k_matrices(family, xi, std::size_t{max_exponent_of(basis)} + 1);
    result.matrices.resize(xi.size());
    parallel_for(xi.size(), options.threads, [&](std::size_t i) {
        result.matrices[i] = direct_moment_matrix(xi[i], basis, kmats);
    });
    return result;
}

}  // namespace smm
