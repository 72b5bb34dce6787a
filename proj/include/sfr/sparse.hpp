#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sfr/grid.hpp"

namespace sfr {

// Minimal abstract operator for the matrix-free solvers. apply computes
// y = A x, applyTranspose computes x = Aᵀ y. Implementations must satisfy the
// adjoint identity <Ax, y> = <x, Aᵀy>.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
    virtual void applyTranspose(std::span<const double> y, std::span<double> x) const = 0;
};

// CSR matrix, possibly rectangular. Rows are assembled in index order; the
// transpose apply runs a deterministic sequential scatter.
class SparseOperator : public LinearOperator {
public:
    SparseOperator() = default;
    SparseOperator(std::size_t rows, std::size_t cols, std::vector<std::int64_t> rowPtr,
                   std::vector<std::uint32_t> col, std::vector<double> val);
    // square shorthand
    SparseOperator(std::size_t n, std::vector<std::int64_t> rowPtr, std::vector<std::uint32_t> col,
                   std::vector<double> val)
        : SparseOperator(n, n, std::move(rowPtr), std::move(col), std::move(val)) {}

    std::size_t rows() const override { return nRows_; }
    std::size_t cols() const override { return nCols_; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void applyTranspose(std::span<const double> y, std::span<double> x) const override;

    std::size_t nnz() const { return val_.size(); }
    std::span<const std::int64_t> rowPtr() const { return rowPtr_; }
    std::span<const std::uint32_t> colIdx() const { return col_; }
    std::span<const double> values() const { return val_; }

    // y += s * A x (square operators only)
    void applyAdd(std::span<const double> x, std::span<double> y, double s = 1.0) const;

private:
    std::size_t nRows_ = 0, nCols_ = 0;
    std::vector<std::int64_t> rowPtr_;
    std::vector<std::uint32_t> col_;
    std::vector<double> val_;
};

// Row-major triplet assembler for small/medium operators.
class SparseBuilder {
public:
    explicit SparseBuilder(std::size_t rows, std::size_t cols) : rows_(rows), nCols_(cols) {}
    explicit SparseBuilder(std::size_t n) : SparseBuilder(n, n) {}
    void add(std::size_t r, std::size_t c, double v) { rows_[r].emplace_back(std::uint32_t(c), v); }
    SparseOperator build() const;

private:
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows_;
    std::size_t nCols_;
};

// 7-point Neumann Laplacian (positive semi-definite, -div grad): interior
// diagonal 6/h², off-diagonals -1/h², missing neighbors drop the off-diagonal
// and reduce the diagonal. Row sums are zero.
SparseOperator buildLaplacianStencil(const GridDims& dims);

// Same stencil on an arbitrary lattice (used for the per-component face grids
// of a staggered field).
SparseOperator buildLatticeLaplacian(int n0, int n1, int n2, double h);

// Neumann Laplacian restricted to the cells selected by `mask`: off-diagonals
// to unselected cells are dropped and the diagonal reduced, exactly as at a
// domain boundary. Indices are in the compact unknown space defined by
// cellOf (size = full lattice, -1 where unselected).
SparseOperator buildMaskedLaplacian(const GridDims& dims, const Mask& mask,
                                    const std::vector<std::int32_t>& cellOf);

}  // namespace sfr
