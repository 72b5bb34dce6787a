#pragma once

#include "sfr/projection.hpp"
#include "sfr/solvers.hpp"

namespace sfr {

// Projection restricted to the solve mask: same pixel rows, columns remapped
// to the compact unknown space, weights scaled by `scale` (the solves use
// cell-unit path lengths, scale = 1/h). Excluded voxels are eliminated from
// the vectors, not merely zero-weighted.
class RestrictedProjection : public LinearOperator {
public:
    RestrictedProjection() = default;
    RestrictedProjection(const ProjectionOperator& P, const std::vector<std::int32_t>& cellToUnknown,
                         std::size_t nUnknowns, double scale = 1.0);

    std::size_t rows() const override { return nPixels_; }
    std::size_t cols() const override { return nUnknowns_; }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void applyTranspose(std::span<const double> y, std::span<double> x) const override;
    std::size_t nnz() const { return wgt_.size(); }

private:
    std::size_t nPixels_ = 0, nUnknowns_ = 0;
    std::vector<std::int64_t> rowPtr_;
    std::vector<std::uint32_t> col_;
    std::vector<float> wgt_;
};

// Immutable per-(frame, level) description of a density solve: projection,
// unknown set from the visual hull, regularizer and PD parameters.
struct TomographyProblem {
    const ProjectionOperator* P = nullptr;
    std::vector<std::int32_t> cellToUnknown;  // -1 outside the solve mask
    std::vector<std::uint32_t> unknownToCell;
    RestrictedProjection subP;
    SparseOperator R;
    PDParams pd;
    double cglsTol = 1e-4;
    int cglsMaxIter = 1000;

    std::size_t unknowns() const { return unknownToCell.size(); }
};

TomographyProblem makeTomographyProblem(const ProjectionOperator& P, const Mask& solveMask,
                                        const RegularizerSpec& reg, const PDParams& pd,
                                        double cglsTol = 1e-4, int cglsMaxIter = 1000);

// PD tomography: compute the residual image i_u = i − P·floor, then alternate
// the regularized CGLS data prox with the non-negativity projection floored by
// `floorField`. Returns the delta z (supported on the solve mask) with
// z + floor >= 0 exactly on the mask.
ScalarField reconDen(const TomographyProblem& prob, const ImageSet& images,
                     const ScalarField& floorField, SolverDiag* diag = nullptr);

// Correction solve: delegate to reconDen with floor = phiP + phiU, so the
// returned phiC keeps phiC + phiU + phiP >= 0.
ScalarField reconCorrection(const TomographyProblem& prob, const ImageSet& images,
                            const ScalarField& phiP, const ScalarField& phiU,
                            SolverDiag* diag = nullptr);

}  // namespace sfr
