/**
 * @file moment.hpp
 * @brief Weight sets W(mu), neighbour matrices N^w, summed matrices S^mu and
 *        the stochastic moment matrices G^mu = E[y^mu Phi_alpha Phi_beta].
 *
 * The fast path visits every eta in the set, forms gamma = eta - w, rejects it
 * with the family's cheap membership test and otherwise locates it by a tree
 * walk. Each unordered pair {alpha, alpha + w} is found exactly once, from the
 * larger side.
 */
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "smm/index_set.hpp"
#include "smm/multi_index.hpp"
#include "smm/orthopoly.hpp"
#include "smm/sparse.hpp"

namespace smm {

struct WeightSet {
    MultiIndex mu;
    /// Sorted, duplicate free, first nonzero coordinate positive.
    std::vector<SignedMultiIndex> elements;
    std::size_t sign_part_size = 1;
    std::size_t magnitude_part_size = 1;
};

WeightSet weight_set(const MultiIndex& mu);

/// Sorted union of the weight sets.
std::vector<SignedMultiIndex> weight_union(std::span<const WeightSet> sets);

/// (|xi| / 2) * (max_mu max(mu) + 2)^M~ with M~ the largest length in xi (at least 1).
double weight_count_bound(std::span<const MultiIndex> xi);

struct NeighbourMatrix {
    SignedMultiIndex w;
    PatternMatrix pattern;
};

using NeighbourMap = std::map<SignedMultiIndex, NeighbourMatrix>;

struct NeighbourOptions {
    unsigned threads = 1;
};

struct NeighbourStats {
    std::size_t candidates = 0;   ///< (eta, w) pairs visited
    std::size_t tested = 0;       ///< candidates passing the cheap test
    std::size_t located = 0;      ///< successful tree walks
    std::size_t locate_steps = 0; ///< tree edges traversed
};

NeighbourMap neighbour_matrices(const IndexSet& set, std::span<const SignedMultiIndex> weights,
                                const NeighbourOptions& options = {}, NeighbourStats* stats = nullptr);

/// Double loop over all pairs of `basis`.
NeighbourMatrix brute_force_neighbour(std::span<const MultiIndex> basis, const SignedMultiIndex& w);
inline NeighbourMatrix brute_force_neighbour(const IndexSet& set, const SignedMultiIndex& w) {
    return brute_force_neighbour(set.indices(), w);
}

struct SummedMatrix {
    MultiIndex mu;
    CountMatrix counts;
};

/// Throws InternalError if a weight of `ws` is missing from `nmats`.
SummedMatrix summed_matrix(const WeightSet& ws, const NeighbourMap& nmats);

struct MomentMatrix {
    MultiIndex mu;
    RealMatrix values;
};

using KMatrixMap = std::map<unsigned, KMatrix>;

/// K^k for every distinct exponent k appearing in `xi`, each of dimension `dim`.
KMatrixMap build_k_matrices(Family family, std::span<const MultiIndex> xi, std::size_t dim);

/// Product formula on the support of `smat`. Throws DimensionError if a K matrix
/// is too small for the set and InternalError if one is missing.
MomentMatrix moment_matrix(const MultiIndex& mu, const IndexSet& set, const SummedMatrix& smat,
                           const KMatrixMap& kmats);

/// True iff E[y^mu Phi_a Phi_b] is structurally nonzero: for every position,
/// |a_m - b_m| <= mu_m with matching parity.
bool moment_entry_nonzero(const MultiIndex& mu, const MultiIndex& a, const MultiIndex& b);

/// Product formula evaluated for every pair of an arbitrary basis (no tree needed).
MomentMatrix direct_moment_matrix(const MultiIndex& mu, std::span<const MultiIndex> basis, const KMatrixMap& kmats);

/// Tensor Gauss quadrature of E[y^mu Phi_a Phi_b], dense row-major, computed in
/// extended precision. Throws SizeError beyond 400 basis functions, 6
/// dimensions or 2e6 tensor nodes.
std::vector<double> quadrature_moment_oracle(const MultiIndex& mu, std::span<const MultiIndex> basis, Family family);

struct MomentOptions {
    unsigned threads = 1;
    /// Sets smaller than this use the direct double loop.
    std::size_t dense_threshold = 64;
};

struct MomentAssembly {
    std::vector<MomentMatrix> matrices;  ///< one per element of xi, same order
    std::vector<WeightSet> weight_sets;
    std::size_t weight_count = 0;        ///< |W_xi|
    std::size_t weight_total = 0;        ///< sum over xi of |W(mu)|
    bool direct = false;
    NeighbourStats stats;
};

/// Full pipeline for a tree-backed set; asserts the summed-matrix work bound.
MomentAssembly assemble_moment_matrices(const IndexSet& set, std::span<const MultiIndex> xi, Family family,
                                        const MomentOptions& options = {});

/// Direct assembly for an arbitrary list of multi-indices.
MomentAssembly assemble_moment_matrices(std::span<const MultiIndex> basis, std::span<const MultiIndex> xi,
                                        Family family, const MomentOptions& options = {});

}  // namespace smm
