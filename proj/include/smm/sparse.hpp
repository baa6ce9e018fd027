/**
 * @file sparse.hpp
 * @brief Sparse symmetric matrices assembled from coordinate triplets and kept
 *        as a compressed upper triangle (diagonal included), plus Matrix Market
 *        export.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "smm/error.hpp"

namespace smm {

template <typename T>
class SymmetricSparse {
public:
    struct Triplet {
        std::uint32_t row;
        std::uint32_t col;
        T value;
    };

    SymmetricSparse() : row_ptr_(1, 0) {}
    explicit SymmetricSparse(std::size_t dim) : dim_(dim), row_ptr_(dim + 1, 0) {}

    /// Mirrors lower-triangle triplets into the upper triangle and sums duplicates.
    static SymmetricSparse from_triplets(std::size_t dim, std::vector<Triplet> triplets) {
        for (Triplet& t : triplets) {
            if (t.row >= dim || t.col >= dim) throw DimensionError("triplet index out of range");
            if (t.row > t.col) std::swap(t.row, t.col);
        }
        // Bucket by row in linear time, then sort the (short) rows by column.
        std::vector<std::size_t> start(dim + 1, 0);
        for (const Triplet& t : triplets) ++start[t.row + 1];
        for (std::size_t r = 0; r < dim; ++r) start[r + 1] += start[r];
        {
            std::vector<Triplet> bucketed(triplets.size());
            std::vector<std::size_t> next(start.begin(), start.end() - 1);
            for (const Triplet& t : triplets) bucketed[next[t.row]++] = t;
            triplets = std::move(bucketed);
        }
        for (std::size_t r = 0; r < dim; ++r)
            std::sort(triplets.begin() + static_cast<std::ptrdiff_t>(start[r]),
                      triplets.begin() + static_cast<std::ptrdiff_t>(start[r + 1]),
                      [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
        SymmetricSparse out(dim);
        out.cols_.reserve(triplets.size());
        out.values_.reserve(triplets.size());
        std::size_t i = 0;
        while (i < triplets.size()) {
            const Triplet& t = triplets[i];
            T value = t.value;
            std::size_t j = i + 1;
            for (; j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col; ++j)
                value += triplets[j].value;
            out.cols_.push_back(t.col);
            out.values_.push_back(value);
            ++out.row_ptr_[t.row + 1];
            i = j;
        }
        for (std::size_t r = 0; r < dim; ++r) out.row_ptr_[r + 1] += out.row_ptr_[r];
        return out;
    }

    static SymmetricSparse identity(std::size_t dim, T one = T(1)) {
        std::vector<Triplet> t;
        t.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i)
            t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i), one});
        return from_triplets(dim, std::move(t));
    }

    std::size_t dim() const noexcept { return dim_; }
    /// Stored entries (upper triangle including the diagonal).
    std::size_t nnz_stored() const noexcept { return cols_.size(); }
    /// Entries of the full symmetric matrix.
    std::size_t nnz() const noexcept {
        std::size_t diag = 0;
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
                if (cols_[p] == r) ++diag;
        return 2 * cols_.size() - diag;
    }

    std::span<const std::uint32_t> row_cols(std::size_t r) const {
        return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    std::span<const T> row_values(std::size_t r) const {
        return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

    T operator()(std::size_t i, std::size_t j) const {
        if (i >= dim_ || j >= dim_) throw DimensionError("sparse matrix index out of range");
        if (i > j) std::swap(i, j);
        const auto cols = row_cols(i);
        const auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(j));
        if (it == cols.end() || *it != j) return T(0);
        return row_values(i)[static_cast<std::size_t>(it - cols.begin())];
    }

    /// f(row, col, value) over the stored upper triangle, row-major.
    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) f(r, static_cast<std::size_t>(cols_[p]), values_[p]);
    }

    std::vector<T> to_dense() const {
        std::vector<T> dense(dim_ * dim_, T(0));
        for_each([&](std::size_t r, std::size_t c, T v) {
            dense[r * dim_ + c] = v;
            dense[c * dim_ + r] = v;
        });
        return dense;
    }

    bool same_pattern(const SymmetricSparse& other) const {
        return dim_ == other.dim_ && row_ptr_ == other.row_ptr_ && cols_ == other.cols_;
    }

    friend bool operator==(const SymmetricSparse& a, const SymmetricSparse& b) {
        return a.same_pattern(b) && a.values_ == b.values_;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
    std::vector<T> values_;
};

using PatternMatrix = SymmetricSparse<std::uint8_t>;
using CountMatrix = SymmetricSparse<std::int32_t>;
using RealMatrix = SymmetricSparse<double>;

enum class MatrixMarketField { Real, Pattern };

/// Coordinate Matrix Market, symmetric storage (lower triangle, 1-based,
/// column-major entry order), reals printed with 17 significant digits.
template <typename T>
void write_matrix_market(std::ostream& os, const SymmetricSparse<T>& m, MatrixMarketField field) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << (field == MatrixMarketField::Pattern ? "%%MatrixMarket matrix coordinate pattern symmetric\n"
                                                : "%%MatrixMarket matrix coordinate real symmetric\n");
    buf << m.dim() << ' ' << m.dim() << ' ' << m.nnz_stored() << '\n';
    m.for_each([&](std::size_t r, std::size_t c, T v) {
        buf << (c + 1) << ' ' << (r + 1);
        if (field == MatrixMarketField::Real) buf << ' ' << static_cast<double>(v);
        buf << '\n';
    });
    os << buf.str();
}

}  // namespace smm
