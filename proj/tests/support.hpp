#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "smm/index_set.hpp"
#include "smm/multi_index.hpp"

namespace smm::test {

inline std::vector<MultiIndex> sorted_members(const IndexSet& set) {
    std::vector<MultiIndex> v = set.indices();
    std::sort(v.begin(), v.end());
    return v;
}

/// Every multi-index in the box [0, bound]^dims accepted by `keep`, sorted.
inline std::vector<MultiIndex> enumerate_box(std::uint32_t dims, std::uint32_t bound,
                                             const std::function<bool(const std::vector<std::uint32_t>&)>& keep) {
    std::vector<MultiIndex> out;
    std::vector<std::uint32_t> dense(dims, 0);
    for (;;) {
        if (keep(dense)) out.push_back(MultiIndex::from_dense(std::span<const std::uint32_t>(dense)));
        std::uint32_t m = 0;
        for (; m < dims; ++m) {
            if (++dense[m] <= bound) break;
            dense[m] = 0;
        }
        if (m == dims) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Random TS spec: nonincreasing mu in (0, 0.9), eps chosen so the set is modest.
inline TsSpec random_ts(std::mt19937_64& rng, std::size_t length, double eps_lo, double eps_hi) {
    std::uniform_real_distribution<double> u(0.05, 0.9);
    TsSpec spec;
    for (std::size_t i = 0; i < length; ++i) spec.mu.push_back(u(rng));
    std::sort(spec.mu.begin(), spec.mu.end(), std::greater<>());
    spec.eps = std::uniform_real_distribution<double>(eps_lo, eps_hi)(rng);
    return spec;
}

}  // namespace smm::test
