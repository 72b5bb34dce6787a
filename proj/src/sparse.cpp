#include "sfr/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace sfr {

SparseOperator::SparseOperator(std::size_t rows, std::size_t cols,
                               std::vector<std::int64_t> rowPtr, std::vector<std::uint32_t> col,
                               std::vector<double> val)
    : nRows_(rows), nCols_(cols), rowPtr_(std::move(rowPtr)), col_(std::move(col)),
      val_(std::move(val)) {
    if (rowPtr_.size() != nRows_ + 1) throw std::invalid_argument("SparseOperator: bad rowPtr");
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
    assert(x.size() == nCols_ && y.size() == nRows_);
    for (std::size_t r = 0; r < nRows_; ++r) {
        double s = 0;
        for (std::int64_t e = rowPtr_[r]; e < rowPtr_[r + 1]; ++e) s += val_[e] * x[col_[e]];
        y[r] = s;
    }
}

void SparseOperator::applyAdd(std::span<const double> x, std::span<double> y, double s) const {
    assert(x.size() == nCols_ && y.size() == nRows_ && nRows_ == nCols_);
    for (std::size_t r = 0; r < nRows_; ++r) {
        double acc = 0;
        for (std::int64_t e = rowPtr_[r]; e < rowPtr_[r + 1]; ++e) acc += val_[e] * x[col_[e]];
        y[r] += s * acc;
    }
}

void SparseOperator::applyTranspose(std::span<const double> y, std::span<double> x) const {
    assert(x.size() == nCols_ && y.size() == nRows_);
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t r = 0; r < nRows_; ++r) {
        const double v = y[r];
        if (v == 0.0) continue;
        for (std::int64_t e = rowPtr_[r]; e < rowPtr_[r + 1]; ++e) x[col_[e]] += val_[e] * v;
    }
}

SparseOperator SparseBuilder::build() const {
    const std::size_t nRows = rows_.size();
    std::vector<std::int64_t> rowPtr(nRows + 1, 0);
    std::size_t nnz = 0;
    for (std::size_t r = 0; r < nRows; ++r) nnz += rows_[r].size();
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    col.reserve(nnz);
    val.reserve(nnz);
    for (std::size_t r = 0; r < nRows; ++r) {
        auto entries = rows_[r];
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        const std::size_t rowStart = col.size();
        for (const auto& [c, v] : entries) {
            if (col.size() > rowStart && col.back() == c)
                val.back() += v;
            else {
                col.push_back(c);
                val.push_back(v);
            }
        }
        rowPtr[r + 1] = std::int64_t(col.size());
    }
    return SparseOperator(nRows, nCols_, std::move(rowPtr), std::move(col), std::move(val));
}

namespace {

SparseOperator latticeLaplacian(int n0, int n1, int n2, double h) {
    const std::size_t n = std::size_t(n0) * n1 * n2;
    const double w = 1.0 / (h * h);
    std::vector<std::int64_t> rowPtr(n + 1);
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    col.reserve(n * 7);
    val.reserve(n * 7);
    auto id = [&](int i, int j, int k) {
        return std::uint32_t(std::size_t(i) + std::size_t(n0) * (std::size_t(j) + std::size_t(n1) * k));
    };
    std::size_t r = 0;
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n0; ++i, ++r) {
                int nb = 0;
                // columns in ascending index order
                if (k > 0) { col.push_back(id(i, j, k - 1)); val.push_back(-w); ++nb; }
                if (j > 0) { col.push_back(id(i, j - 1, k)); val.push_back(-w); ++nb; }
                if (i > 0) { col.push_back(id(i - 1, j, k)); val.push_back(-w); ++nb; }
                col.push_back(id(i, j, k));
                const std::size_t diag = val.size();
                val.push_back(0);
                if (i + 1 < n0) { col.push_back(id(i + 1, j, k)); val.push_back(-w); ++nb; }
                if (j + 1 < n1) { col.push_back(id(i, j + 1, k)); val.push_back(-w); ++nb; }
                if (k + 1 < n2) { col.push_back(id(i, j, k + 1)); val.push_back(-w); ++nb; }
                val[diag] = nb * w;
                rowPtr[r + 1] = std::int64_t(col.size());
            }
    return SparseOperator(n, std::move(rowPtr), std::move(col), std::move(val));
}

}  // namespace

SparseOperator buildLaplacianStencil(const GridDims& dims) {
    requireValid(dims);
    return latticeLaplacian(dims.nx, dims.ny, dims.nz, dims.h);
}

SparseOperator buildLatticeLaplacian(int n0, int n1, int n2, double h) {
    if (n0 < 2 || n1 < 2 || n2 < 2 || h <= 0)
        throw std::invalid_argument("buildLatticeLaplacian: bad lattice");
    return latticeLaplacian(n0, n1, n2, h);
}

SparseOperator buildMaskedLaplacian(const GridDims& dims, const Mask& mask,
                                    const std::vector<std::int32_t>& cellOf) {
    const double w = 1.0 / (dims.h * dims.h);
    std::size_t nUnknown = 0;
    for (std::size_t c = 0; c < mask.size(); ++c)
        if (mask[c]) ++nUnknown;
    std::vector<std::int64_t> rowPtr(nUnknown + 1);
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    col.reserve(nUnknown * 7);
    val.reserve(nUnknown * 7);
    std::size_t r = 0;
    for (int k = 0; k < dims.nz; ++k)
        for (int j = 0; j < dims.ny; ++j)
            for (int i = 0; i < dims.nx; ++i) {
                const std::size_t c = std::size_t(i) + std::size_t(dims.nx) * (j + std::size_t(dims.ny) * k);
                if (!mask[c]) continue;
                int nb = 0;
                auto tryNb = [&](int ii, int jj, int kk) {
                    if (ii < 0 || jj < 0 || kk < 0 || ii >= dims.nx || jj >= dims.ny || kk >= dims.nz) return;
                    const std::size_t cc =
                        std::size_t(ii) + std::size_t(dims.nx) * (jj + std::size_t(dims.ny) * kk);
                    if (!mask[cc]) return;
                    col.push_back(std::uint32_t(cellOf[cc]));
                    val.push_back(-w);
                    ++nb;
                };
                tryNb(i, j, k - 1);
                tryNb(i, j - 1, k);
                tryNb(i - 1, j, k);
                col.push_back(std::uint32_t(cellOf[c]));
                const std::size_t diag = val.size();
                val.push_back(0);
                tryNb(i + 1, j, k);
                tryNb(i, j + 1, k);
                tryNb(i, j, k + 1);
                val[diag] = nb * w;
                rowPtr[++r] = std::int64_t(col.size());
            }
    return SparseOperator(nUnknown, std::move(rowPtr), std::move(col), std::move(val));
}

}  // namespace sfr
