#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "mstep/field.hpp"

namespace mstep {

/// Dense GF(2) matrix with bit-packed rows; the workhorse behind Macaulay
/// elimination. Row/column order is caller-defined and preserved.
class Gf2Matrix {
public:
    Gf2Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * words_, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void set(std::size_t r, std::size_t c) { row(r)[c >> 6] |= std::uint64_t(1) << (c & 63); }
    bool get(std::size_t r, std::size_t c) const {
        return (row(r)[c >> 6] >> (c & 63)) & 1u;
    }

    std::uint64_t* row(std::size_t r) { return data_.data() + r * words_; }
    const std::uint64_t* row(std::size_t r) const { return data_.data() + r * words_; }

    /// In-place reduced row echelon form. Pivots are chosen column-major in
    /// ascending column order; ties go to the earliest row. Returns the pivot
    /// column of each echelon row (size = rank).
    std::vector<std::uint32_t> rref() {
        std::vector<std::uint32_t> pivots;
        std::size_t rank = 0;
        for (std::size_t c = 0; c < cols_ && rank < rows_; ++c) {
            std::size_t sel = rows_;
            for (std::size_t r = rank; r < rows_; ++r) {
                if (get(r, c)) {
                    sel = r;
                    break;
                }
            }
            if (sel == rows_) continue;
            if (sel != rank) swap_rows(sel, rank);
            const std::uint64_t* prow = row(rank);
            std::size_t wfrom = c >> 6;
            for (std::size_t r = 0; r < rows_; ++r) {
                if (r == rank || !get(r, c)) continue;
                std::uint64_t* dst = row(r);
                for (std::size_t w = wfrom; w < words_; ++w) dst[w] ^= prow[w];
            }
            pivots.push_back(static_cast<std::uint32_t>(c));
            ++rank;
        }
        return pivots;
    }

private:
    void swap_rows(std::size_t a, std::size_t b) {
        std::uint64_t* pa = row(a);
        std::uint64_t* pb = row(b);
        for (std::size_t w = 0; w < words_; ++w) std::swap(pa[w], pb[w]);
    }

    std::size_t rows_, cols_, words_;
    std::vector<std::uint64_t> data_;
};

/// Dense GF(q) matrix with one byte per entry; correctness-grade path for
/// odd characteristic.
class GfqMatrix {
public:
    GfqMatrix(const Field& f, std::size_t rows, std::size_t cols)
        : field_(f), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Coeff& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    Coeff at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<std::uint32_t> rref() {
        std::vector<std::uint32_t> pivots;
        std::size_t rank = 0;
        for (std::size_t c = 0; c < cols_ && rank < rows_; ++c) {
            std::size_t sel = rows_;
            for (std::size_t r = rank; r < rows_; ++r) {
                if (at(r, c) != 0) {
                    sel = r;
                    break;
                }
            }
            if (sel == rows_) continue;
            if (sel != rank)
                for (std::size_t j = 0; j < cols_; ++j) std::swap(at(sel, j), at(rank, j));
            Coeff s = field_.inv(at(rank, c));
            if (s != 1)
                for (std::size_t j = c; j < cols_; ++j) at(rank, j) = field_.mul(at(rank, j), s);
            for (std::size_t r = 0; r < rows_; ++r) {
                if (r == rank) continue;
                Coeff m = at(r, c);
                if (m == 0) continue;
                for (std::size_t j = c; j < cols_; ++j)
                    at(r, j) = field_.sub(at(r, j), field_.mul(m, at(rank, j)));
            }
            pivots.push_back(static_cast<std::uint32_t>(c));
            ++rank;
        }
        return pivots;
    }

private:
    Field field_;
    std::size_t rows_, cols_;
    std::vector<Coeff> data_;
};

}  // namespace mstep
