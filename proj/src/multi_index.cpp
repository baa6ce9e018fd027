#include "smm/multi_index.hpp"

#include <charconv>
#include <sstream>

namespace smm {

SignedMultiIndex to_signed(const MultiIndex& a) {
    std::vector<SignedMultiIndex::Entry> pairs;
    pairs.reserve(a.support_size());
    for (const auto& e : a.pairs()) pairs.push_back({e.position, static_cast<std::int32_t>(e.value)});
    return SignedMultiIndex::from_pairs(std::move(pairs));
}

std::optional<MultiIndex> to_unsigned(const SignedMultiIndex& a) {
    std::vector<MultiIndex::Entry> pairs;
    pairs.reserve(a.support_size());
    for (const auto& e : a.pairs()) {
        if (e.value < 0) return std::nullopt;
        pairs.push_back({e.position, static_cast<std::uint32_t>(e.value)});
    }
    return MultiIndex::from_pairs(std::move(pairs));
}

namespace {

template <int Sign>
SignedMultiIndex combine(const MultiIndex& a, const SignedMultiIndex& b) {
    const auto pa = a.pairs();
    const auto pb = b.pairs();
    std::vector<SignedMultiIndex::Entry> out;
    out.reserve(pa.size() + pb.size());
    std::size_t i = 0, j = 0;
    while (i < pa.size() || j < pb.size()) {
        if (j == pb.size() || (i < pa.size() && pa[i].position < pb[j].position)) {
            out.push_back({pa[i].position, static_cast<std::int32_t>(pa[i].value)});
            ++i;
        } else if (i == pa.size() || pb[j].position < pa[i].position) {
            out.push_back({pb[j].position, Sign * pb[j].value});
            ++j;
        } else {
            const std::int32_t v = static_cast<std::int32_t>(pa[i].value) + Sign * pb[j].value;
            if (v != 0) out.push_back({pa[i].position, v});
            ++i;
            ++j;
        }
    }
    return SignedMultiIndex::from_pairs(std::move(out));
}

template <typename Exponent>
SparseIndex<Exponent> parse_pairs(std::string_view text) {
    std::vector<typename SparseIndex<Exponent>::Entry> pairs;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view item = text.substr(start, end - start);
        const std::size_t colon = item.find(':');
        if (colon == std::string_view::npos) throw ConfigError("malformed multi-index pair '" + std::string(item) + "'");
        Position pos{};
        Exponent val{};
        const auto r1 = std::from_chars(item.data(), item.data() + colon, pos);
        const auto r2 = std::from_chars(item.data() + colon + 1, item.data() + item.size(), val);
        if (r1.ec != std::errc() || r1.ptr != item.data() + colon || r2.ec != std::errc() ||
            r2.ptr != item.data() + item.size())
            throw ConfigError("malformed multi-index pair '" + std::string(item) + "'");
        pairs.push_back({pos, val});
        start = end + 1;
    }
    return SparseIndex<Exponent>::from_pairs(std::move(pairs));
}

}  // namespace

SignedMultiIndex subtract(const MultiIndex& a, const SignedMultiIndex& b) { return combine<-1>(a, b); }
SignedMultiIndex add(const MultiIndex& a, const SignedMultiIndex& b) { return combine<1>(a, b); }

bool componentwise_le(const MultiIndex& a, const MultiIndex& b) {
    for (const auto& e : a.pairs())
        if (e.value > b[e.position]) return false;
    return true;
}

template <typename Exponent>
std::string to_pair_string(const SparseIndex<Exponent>& a) {
    std::ostringstream os;
    bool first = true;
    for (const auto& e : a.pairs()) {
        if (!first) os << ',';
        os << e.position << ':' << e.value;
        first = false;
    }
    return os.str();
}

template <typename Exponent>
std::string to_tuple_string(const SparseIndex<Exponent>& a, std::size_t min_length) {
    const std::size_t n = std::max<std::size_t>({min_length, a.length(), 1});
    std::ostringstream os;
    os << '(';
    for (std::size_t m = 1; m <= n; ++m) {
        if (m > 1) os << ',';
        os << a[static_cast<Position>(m)];
    }
    os << ')';
    return os.str();
}

template std::string to_pair_string(const MultiIndex&);
template std::string to_pair_string(const SignedMultiIndex&);
template std::string to_tuple_string(const MultiIndex&, std::size_t);
template std::string to_tuple_string(const SignedMultiIndex&, std::size_t);

MultiIndex parse_multi_index(std::string_view text) { return parse_pairs<std::uint32_t>(text); }
SignedMultiIndex parse_signed_multi_index(std::string_view text) { return parse_pairs<std::int32_t>(text); }

}  // namespace smm
