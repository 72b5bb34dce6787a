#include "sfr/tomography.hpp"

#include <cassert>
#include <stdexcept>

namespace sfr {

RestrictedProjection::RestrictedProjection(const ProjectionOperator& P,
                                           const std::vector<std::int32_t>& cellToUnknown,
                                           std::size_t nUnknowns, double scale)
    : nPixels_(P.rows()), nUnknowns_(nUnknowns) {
    const auto rowPtr = P.rowPtr();
    const auto col = P.colIdx();
    const auto wgt = P.weights();
    rowPtr_.assign(nPixels_ + 1, 0);
    col_.reserve(wgt.size() / 2);
    wgt_.reserve(wgt.size() / 2);
    for (std::size_t r = 0; r < nPixels_; ++r) {
        for (std::int64_t e = rowPtr[r]; e < rowPtr[r + 1]; ++e) {
            const std::int32_t u = cellToUnknown[col[e]];
            if (u < 0) continue;
            col_.push_back(std::uint32_t(u));
            wgt_.push_back(float(double(wgt[e]) * scale));
        }
        rowPtr_[r + 1] = std::int64_t(col_.size());
    }
}

void RestrictedProjection::apply(std::span<const double> x, std::span<double> y) const {
    assert(x.size() == nUnknowns_ && y.size() == nPixels_);
    for (std::size_t r = 0; r < nPixels_; ++r) {
        double s = 0;
        for (std::int64_t e = rowPtr_[r]; e < rowPtr_[r + 1]; ++e)
            s += double(wgt_[e]) * x[col_[e]];
        y[r] = s;
    }
}

void RestrictedProjection::applyTranspose(std::span<const double> y, std::span<double> x) const {
    assert(x.size() == nUnknowns_ && y.size() == nPixels_);
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t r = 0; r < nPixels_; ++r) {
        const double v = y[r];
        if (v == 0.0) continue;
        for (std::int64_t e = rowPtr_[r]; e < rowPtr_[r + 1]; ++e)
            x[col_[e]] += double(wgt_[e]) * v;
    }
}

TomographyProblem makeTomographyProblem(const ProjectionOperator& P, const Mask& solveMask,
                                        const RegularizerSpec& reg, const PDParams& pd,
                                        double cglsTol, int cglsMaxIter) {
    if (solveMask.size() != P.cols())
        throw std::invalid_argument("makeTomographyProblem: mask size mismatch");
    TomographyProblem prob;
    prob.P = &P;
    prob.pd = pd;
    prob.cglsTol = cglsTol;
    prob.cglsMaxIter = cglsMaxIter;
    prob.cellToUnknown.assign(P.cols(), -1);
    for (std::size_t c = 0; c < solveMask.size(); ++c)
        if (solveMask[c]) {
            prob.cellToUnknown[c] = std::int32_t(prob.unknownToCell.size());
            prob.unknownToCell.push_back(std::uint32_t(c));
        }
    // The solve runs in grid units: cell-length ray weights, unit-spacing
    // smoothness stencil. That is the scale the regularizer weights assume.
    prob.subP = RestrictedProjection(P, prob.cellToUnknown, prob.unknownToCell.size(),
                                     1.0 / P.dims().h);
    GridDims unit = P.dims();
    unit.h = 1.0;
    prob.R = buildMaskedRegularizer(reg, unit, solveMask, prob.cellToUnknown);
    return prob;
}

ScalarField reconDen(const TomographyProblem& prob, const ImageSet& images,
                     const ScalarField& floorField, SolverDiag* diag) {
    const ProjectionOperator& P = *prob.P;
    if (!(floorField.dims == P.dims())) throw std::invalid_argument("reconDen: dims mismatch");
    if (images.totalPixels() != P.rows())
        throw std::invalid_argument("reconDen: image size mismatch");

    ScalarField delta(P.dims());
    const std::size_t n = prob.unknowns();
    if (n == 0) return delta;

    // residual image i_u = i − P * floor, in cell-unit path lengths
    Vec iu = flattenImages(images);
    Vec rendered(P.rows(), 0.0);
    P.apply(floorField.data, rendered);
    const double invH = 1.0 / P.dims().h;
    // The data prox solves (PᵀP + R + σI) w = Pᵀ i_u + v, which maps onto the
    // CGLS interface as b = −i_u, b_PD = v/σ.
    for (std::size_t r = 0; r < iu.size(); ++r) iu[r] = -(iu[r] - rendered[r]) * invH;

    Vec floorU(n);
    for (std::size_t u = 0; u < n; ++u) floorU[u] = floorField.data[prob.unknownToCell[u]];

    const double sigma = prob.pd.sigma;
    Vec warm(n, 0.0);
    auto proxData = [&](const Vec& v) {
        Vec bPd(v);
        for (double& q : bPd) q /= sigma;
        CglsResult res = solveCGLSReg(prob.subP, &prob.R, iu, &bPd, sigma, prob.cglsTol,
                                      prob.cglsMaxIter, &warm, diag);
        warm = res.x;
        return res.x;
    };
    auto proxConstraint = [&](Vec cand) { return projectNonNeg(std::move(cand), floorU); };

    PdResult pd = pdIterate(proxData, proxConstraint, prob.pd, Vec(n, 0.0), Vec(n, 0.0), diag);
    for (std::size_t u = 0; u < n; ++u) delta.data[prob.unknownToCell[u]] = pd.z[u];
    // Outside the solve mask the delta is zero unless the floor itself dips
    // negative; the non-negativity projection applies to the whole grid.
    for (std::size_t c = 0; c < delta.data.size(); ++c)
        if (prob.cellToUnknown[c] < 0 && floorField.data[c] < 0)
            delta.data[c] = -floorField.data[c];
    return delta;
}

ScalarField reconCorrection(const TomographyProblem& prob, const ImageSet& images,
                            const ScalarField& phiP, const ScalarField& phiU, SolverDiag* diag) {
    for (double v : phiP.data)
        if (v < 0) throw std::invalid_argument("reconCorrection: predicted density must be >= 0");
    ScalarField floorField = phiP;
    for (std::size_t c = 0; c < floorField.data.size(); ++c) floorField.data[c] += phiU.data[c];
    return reconDen(prob, images, floorField, diag);
}

}  // namespace sfr
