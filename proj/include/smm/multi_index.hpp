/**
 * @file multi_index.hpp
 * @brief Finitely supported multi-indices in sparse (position, exponent) form.
 *
 * Positions are 1-based, matching the usual y_1, y_2, ... numbering of the
 * random variables. Only nonzero exponents are stored, sorted by position,
 * so the zero multi-index is the empty pair list.
 */
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "smm/error.hpp"

namespace smm {

using Position = std::uint32_t;

template <typename Exponent>
class SparseIndex {
public:
    using exponent_type = Exponent;

    struct Entry {
        Position position;
        Exponent value;

        friend bool operator==(const Entry&, const Entry&) = default;
        friend auto operator<=>(const Entry&, const Entry&) = default;
    };

    SparseIndex() = default;

    /// Validates canonical form: positions >= 1, strictly increasing, values nonzero.
    static SparseIndex from_pairs(std::vector<Entry> pairs) {
        Position previous = 0;
        for (const Entry& e : pairs) {
            if (e.position == 0 || e.position <= previous)
                throw ConfigError("multi-index positions must be >= 1 and strictly increasing");
            if (e.value == 0)
                throw ConfigError("multi-index pairs must have nonzero exponents");
            previous = e.position;
        }
        SparseIndex out;
        out.pairs_ = std::move(pairs);
        return out;
    }

    /// dense[i] is the exponent at position i + 1.
    static SparseIndex from_dense(std::span<const Exponent> dense) {
        SparseIndex out;
        for (std::size_t i = 0; i < dense.size(); ++i)
            if (dense[i] != 0) out.pairs_.push_back({static_cast<Position>(i + 1), dense[i]});
        return out;
    }

    static SparseIndex from_dense(std::initializer_list<Exponent> dense) {
        return from_dense(std::span<const Exponent>(dense.begin(), dense.size()));
    }

    static SparseIndex unit(Position position, Exponent value = 1) {
        SparseIndex out;
        if (value != 0) out.pairs_.push_back({position, value});
        return out;
    }

    Exponent operator[](Position position) const noexcept {
        for (const Entry& e : pairs_) {
            if (e.position == position) return e.value;
            if (e.position > position) break;
        }
        return 0;
    }

    std::span<const Entry> pairs() const noexcept { return pairs_; }
    bool is_zero() const noexcept { return pairs_.empty(); }
    std::size_t support_size() const noexcept { return pairs_.size(); }

    /// Largest position in the support, 0 for the zero multi-index.
    Position length() const noexcept { return pairs_.empty() ? 0 : pairs_.back().position; }

    /// Sum of the exponents.
    std::int64_t order() const noexcept {
        std::int64_t sum = 0;
        for (const Entry& e : pairs_) sum += static_cast<std::int64_t>(e.value);
        return sum;
    }

    /// Largest absolute exponent, 0 for the zero multi-index.
    std::uint32_t max_exponent() const noexcept {
        std::uint32_t best = 0;
        for (const Entry& e : pairs_) {
            const auto v = static_cast<std::uint32_t>(e.value < 0 ? -static_cast<std::int64_t>(e.value)
                                                                  : static_cast<std::int64_t>(e.value));
            if (v > best) best = v;
        }
        return best;
    }

    std::vector<Exponent> to_dense(std::size_t n) const {
        if (length() > n) throw DimensionError("multi-index does not fit the requested dense length");
        std::vector<Exponent> dense(n, 0);
        for (const Entry& e : pairs_) dense[e.position - 1] = e.value;
        return dense;
    }

    /// Adds one to the exponent at `position`; position must be >= length().
    void increment_tail(Position position) {
        if (!pairs_.empty() && pairs_.back().position == position) {
            ++pairs_.back().value;
        } else if (position > length()) {
            pairs_.push_back({position, 1});
        } else {
            throw InternalError("increment_tail below the multi-index length");
        }
    }

    friend bool operator==(const SparseIndex&, const SparseIndex&) = default;
    friend auto operator<=>(const SparseIndex& a, const SparseIndex& b) { return a.pairs_ <=> b.pairs_; }

private:
    std::vector<Entry> pairs_;
};

using MultiIndex = SparseIndex<std::uint32_t>;
using SignedMultiIndex = SparseIndex<std::int32_t>;

SignedMultiIndex to_signed(const MultiIndex& a);
std::optional<MultiIndex> to_unsigned(const SignedMultiIndex& a);

/// Componentwise a - b in canonical sparse form.
SignedMultiIndex subtract(const MultiIndex& a, const SignedMultiIndex& b);
SignedMultiIndex add(const MultiIndex& a, const SignedMultiIndex& b);

/// True iff a_m <= b_m for every position m.
bool componentwise_le(const MultiIndex& a, const MultiIndex& b);

/// "pos:exp,pos:exp" (empty string for the zero multi-index).
template <typename Exponent>
std::string to_pair_string(const SparseIndex<Exponent>& a);

MultiIndex parse_multi_index(std::string_view text);
SignedMultiIndex parse_signed_multi_index(std::string_view text);

/// Dense tuple notation "(a_1,...,a_n)" padded to at least `min_length` entries.
template <typename Exponent>
std::string to_tuple_string(const SparseIndex<Exponent>& a, std::size_t min_length = 0);

template <typename Exponent>
std::ostream& operator<<(std::ostream& os, const SparseIndex<Exponent>& a) {
    return os << to_tuple_string(a);
}

struct MultiIndexHash {
    template <typename Exponent>
    std::size_t operator()(const SparseIndex<Exponent>& a) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (const auto& e : a.pairs()) {
            h ^= (static_cast<std::size_t>(e.position) << 32) ^ static_cast<std::size_t>(static_cast<std::uint32_t>(e.value));
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace smm
