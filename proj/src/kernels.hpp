#pragma once

// Internal kernel implementations shared by the problem builders.

#include <span>
#include <utility>
#include <vector>

#include "regshb/operators.hpp"
#include "regshb/vec.hpp"

namespace regshb::detail {

BlockData scalar_block_data(std::vector<double> values);
void verify_ground_truth(const ForwardSystem& sys, const GroundTruth& truth);

// CSR matrix with one scalar block per row.
class SparseRowsKernel : public SystemKernel {
public:
    SparseRowsKernel(std::size_t rows, std::size_t cols, std::vector<std::size_t> indptr,
                     std::vector<std::uint32_t> idx, std::vector<double> val)
        : rows_(rows),
          cols_(cols),
          indptr_(std::move(indptr)),
          idx_(std::move(idx)),
          val_(std::move(val)) {}

    std::size_t block_count() const override { return rows_; }
    std::size_t domain_dim() const override { return cols_; }
    std::size_t residual_dim(std::size_t) const override { return 1; }
    bool linear() const override { return true; }

    void apply(std::size_t i, std::span<const double> x, std::span<double> out) const override;
    void linearize(std::size_t i, std::span<const double>, std::span<const double> h,
                   std::span<double> out) const override {
        apply(i, h, out);
    }
    void adjoint(std::size_t i, std::span<const double>, std::span<const double> w,
                 std::span<double> out) const override;
    void adjoint_accumulate(std::size_t i, std::span<const double>, std::span<const double> w,
                            std::span<double> inout) const override {
        for (std::size_t k = indptr_[i]; k < indptr_[i + 1]; ++k)
            inout[idx_[k]] += w[0] * val_[k];
    }

    std::size_t row_nnz(std::size_t i) const { return indptr_[i + 1] - indptr_[i]; }
    std::span<const std::uint32_t> row_idx(std::size_t i) const {
        return std::span<const std::uint32_t>(idx_).subspan(indptr_[i], row_nnz(i));
    }
    std::span<const double> row_val(std::size_t i) const {
        return std::span<const double>(val_).subspan(indptr_[i], row_nnz(i));
    }

private:
    std::size_t rows_, cols_;
    std::vector<std::size_t> indptr_;
    std::vector<std::uint32_t> idx_;
    std::vector<double> val_;
};

}  // namespace regshb::detail
