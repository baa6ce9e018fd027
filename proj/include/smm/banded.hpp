#pragma once

#include <cstddef>
#include <vector>

#include "smm/error.hpp"

namespace smm {

/// Symmetric banded matrix holding the diagonal and `half_bandwidth` upper
/// diagonals; entries outside the band read as zero.
class BandedSymmetric {
public:
    BandedSymmetric() = default;
    BandedSymmetric(std::size_t dim, std::size_t half_bandwidth)
        : dim_(dim), half_bandwidth_(half_bandwidth), bands_((half_bandwidth + 1) * dim, 0.0) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t half_bandwidth() const noexcept { return half_bandwidth_; }

    double operator()(std::size_t i, std::size_t j) const {
        if (i >= dim_ || j >= dim_) throw DimensionError("banded matrix index out of range");
        const std::size_t lo = i < j ? i : j;
        const std::size_t off = i < j ? j - i : i - j;
        return off > half_bandwidth_ ? 0.0 : bands_[off * dim_ + lo];
    }

    /// Sets entry (i, j) and its mirror; |i - j| must not exceed the half bandwidth.
    void set(std::size_t i, std::size_t j, double value) {
        const std::size_t lo = i < j ? i : j;
        const std::size_t off = i < j ? j - i : i - j;
        if (i >= dim_ || j >= dim_ || off > half_bandwidth_)
            throw DimensionError("banded matrix entry outside the band");
        bands_[off * dim_ + lo] = value;
    }

    std::vector<double> to_dense() const {
        std::vector<double> dense(dim_ * dim_, 0.0);
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) dense[i * dim_ + j] = (*this)(i, j);
        return dense;
    }

private:
    std::size_t dim_ = 0;
    std::size_t half_bandwidth_ = 0;
    std::vector<double> bands_;
};

}  // namespace smm
