/**
 * @file index_set.hpp
 * @brief Hierarchical multi-index sets (TS, isoTD, aTD, isoTP, aTP) with a
 *        parent-to-children tree that locates any member in O(|alpha|) steps.
 *
 * Sets are generated by a stack algorithm: after a multi-index is added, all of
 * its feasible children alpha + e_m (m >= length(alpha)) are pushed in increasing
 * position order, and the top of the stack is added next. The resulting
 * ordinal numbering is canonical and 0-based; ordinal 0 is always the zero
 * multi-index. Each child ordinal is inserted at the front of its parent's
 * child list, so child lists are sorted by increasing position.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "smm/multi_index.hpp"

namespace smm {

/// Threshold sequence set {alpha : prod mu_m^alpha_m >= eps}. Positions past
/// the end of `mu` carry weight zero.
struct TsSpec {
    std::vector<double> mu;
    double eps = 0.5;
};

/// {alpha : |alpha| <= degree, alpha_n = 0 for n > dims}.
struct IsoTdSpec {
    std::uint32_t dims = 1;
    std::uint32_t degree = 0;
};

/// {alpha : sum g_n alpha_n <= g_min * degree}; built through the TS reduction.
struct AtdSpec {
    std::uint32_t dims = 1;
    double degree = 0.0;
    std::vector<double> weights;
};

/// {alpha : max alpha_n <= degree}.
struct IsoTpSpec {
    std::uint32_t dims = 1;
    std::uint32_t degree = 0;
};

/// {alpha : max g_n alpha_n <= g_min * degree}.
struct AtpSpec {
    std::uint32_t dims = 1;
    double degree = 0.0;
    std::vector<double> weights;
};

using IndexSetSpec = std::variant<TsSpec, IsoTdSpec, AtdSpec, IsoTpSpec, AtpSpec>;

enum class SetFamily { TS, IsoTD, ATD, IsoTP, ATP, Loaded };

std::string family_name(SetFamily family);
SetFamily family_of(const IndexSetSpec& spec);

/// Throws ConfigError if the spec violates its invariants.
void validate(const IndexSetSpec& spec);

/// Relative slack applied to floating-point set conditions of the anisotropic
/// families so that exact boundary points (e.g. integer weights) are included.
inline constexpr double kAnisotropicSlack = 1e-12;

class IndexSet {
public:
    using Ordinal = std::uint32_t;
    static constexpr std::int64_t kNoParent = -1;

    struct BuildOptions {
        std::size_t max_size = std::size_t{1} << 26;
    };

    static IndexSet build(const IndexSetSpec& spec) { return build(spec, BuildOptions{}); }
    static IndexSet build(const IndexSetSpec& spec, const BuildOptions& options);

    /// Reassembles a set from serialized records (ordinal order, parent ordinals).
    /// The result has family Loaded; membership is decided by the tree walk alone.
    static IndexSet from_records(std::vector<MultiIndex> indices, std::vector<std::int64_t> parents,
                                 std::vector<double> weights);

    std::size_t size() const noexcept { return indices_.size(); }
    SetFamily family() const noexcept { return family_; }
    const std::optional<IndexSetSpec>& spec() const noexcept { return spec_; }

    const MultiIndex& index(std::size_t ordinal) const { return indices_.at(ordinal); }
    const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    double weight(std::size_t ordinal) const { return weights_.at(ordinal); }
    std::int64_t parent(std::size_t ordinal) const { return parents_.at(ordinal); }
    std::span<const Ordinal> children(std::size_t ordinal) const { return children_.at(ordinal); }

    /// max over the set of |alpha|.
    std::uint32_t max_order() const noexcept { return max_order_; }
    /// max over the set of max_n alpha_n.
    std::uint32_t max_exponent() const noexcept { return max_exponent_; }
    /// max over the set of length(alpha).
    Position max_length() const noexcept { return max_length_; }

    /// Tree walk from the root. `steps`, if given, is incremented once per edge.
    std::optional<std::size_t> try_locate(std::span<const MultiIndex::Entry> pairs,
                                          std::size_t* steps = nullptr) const;
    std::optional<std::size_t> try_locate(const MultiIndex& target, std::size_t* steps = nullptr) const {
        return try_locate(target.pairs(), steps);
    }

    /// Ordinal of `target`; throws NotFoundError if it is not a member.
    std::size_t locate(const MultiIndex& target, std::size_t* steps = nullptr) const;

    /// Weight of an offset w in the family's own arithmetic: mu^w for threshold
    /// sets, sum(w) for isoTD, unused (0) for tensor-product sets.
    double offset_weight(const SignedMultiIndex& w) const;

    /// Weight that eta - w would have, computed from stored weights only.
    double candidate_weight(double eta_weight, double w_offset_weight) const;

    /// Set condition for a nonnegative candidate, using `weight_hint` for the
    /// threshold and total-degree families. Loose by a tiny relative slack;
    /// exact membership is always settled by the tree walk.
    bool admits(std::span<const MultiIndex::Entry> candidate, double weight_hint) const;

    /// Exact membership: no negative exponents, set condition, tree walk succeeds.
    bool contains(const SignedMultiIndex& candidate, double weight_hint) const;
    bool contains(const SignedMultiIndex& candidate) const;

private:
    enum class Engine { Threshold, TotalDegree, TensorProduct, Loaded };

    void add_root(double weight);
    Ordinal add_child(Ordinal parent, Position position, double weight);
    void finalize_statistics();
    std::optional<Ordinal> child_at(Ordinal node, Position position) const;

    Engine engine_ = Engine::Loaded;
    SetFamily family_ = SetFamily::Loaded;
    std::optional<IndexSetSpec> spec_;

    // Normalized engine parameters.
    std::vector<double> mu_;       // threshold: nonincreasing weights per position
    double threshold_ = 0.0;       // threshold: eps (with slack for aTD)
    std::uint32_t dims_ = 0;       // total degree / tensor product
    std::uint32_t degree_ = 0;     // total degree
    std::vector<double> scaled_;   // tensor product: g_n / g_min
    double level_ = 0.0;           // tensor product: degree * (1 + slack)

    std::vector<MultiIndex> indices_;
    std::vector<double> weights_;
    std::vector<std::int64_t> parents_;
    std::vector<std::vector<Ordinal>> children_;
    std::vector<Position> lengths_;
    std::uint32_t max_order_ = 0;
    std::uint32_t max_exponent_ = 0;
    Position max_length_ = 0;
};

/// One line per element: `ordinal<TAB>parent<TAB>pos:exp,...<TAB>weight`,
/// root parent -1, weights with 17 significant digits.
void write_text(std::ostream& os, const IndexSet& set);
IndexSet read_text(std::istream& is);

}  // namespace smm
