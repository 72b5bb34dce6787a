#include "sfr/inflow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfr {

namespace {

struct CellTaps {
    int count = 0;
    std::uint32_t cell[8];
    double w[8];
};

// Trilinear taps of the back-traced point of cell (i,j,k); taps outside the
// domain are dropped (densities are zero outside).
CellTaps traceTaps(const StaggeredField& vel, const GridDims& d, double dt, int i, int j, int k) {
    const double px = (i + 0.5) * d.h, py = (j + 0.5) * d.h, pz = (k + 0.5) * d.h;
    double qx, qy, qz;
    traceBack(vel, dt, px, py, pz, qx, qy, qz);
    const double cx = qx / d.h - 0.5, cy = qy / d.h - 0.5, cz = qz / d.h - 0.5;
    const double bx = std::floor(cx), by = std::floor(cy), bz = std::floor(cz);
    const int i0 = int(bx), j0 = int(by), k0 = int(bz);
    const double fx = cx - bx, fy = cy - by, fz = cz - bz;
    CellTaps taps;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const int ii = i0 + di, jj = j0 + dj, kk = k0 + dk;
                if (ii < 0 || jj < 0 || kk < 0 || ii >= d.nx || jj >= d.ny || kk >= d.nz) continue;
                const double w =
                    (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
                if (w <= 0) continue;
                taps.cell[taps.count] =
                    std::uint32_t(std::size_t(ii) + std::size_t(d.nx) * (jj + std::size_t(d.ny) * kk));
                taps.w[taps.count] = w;
                ++taps.count;
            }
    return taps;
}

}  // namespace

TraceResult traceRegions(const StaggeredField& vel, const DomainMasks& masks, double dt) {
    const GridDims& d = vel.dims;
    TraceResult res;
    res.traceTarget.assign(d.cells(), 0);
    res.traceSource.assign(d.cells(), 0);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const std::size_t c = std::size_t(i) + std::size_t(d.nx) * (j + std::size_t(d.ny) * k);
                if (!masks.visible[c]) continue;
                const CellTaps taps = traceTaps(vel, d, dt, i, j, k);
                bool hitsInflow = false;
                for (int t = 0; t < taps.count; ++t)
                    if (masks.inflow[taps.cell[t]]) {
                        hitsInflow = true;
                        if (!res.traceSource[taps.cell[t]]) {
                            res.traceSource[taps.cell[t]] = 1;
                            ++res.sourceCount;
                        }
                    }
                if (hitsInflow) {
                    res.traceTarget[c] = 1;
                    ++res.targetCount;
                }
            }
    return res;
}

ScalarField computeTargetDiscrepancy(const ScalarField& dPhiTar, const DomainMasks& masks,
                                     const TraceResult& regions) {
    if (regions.targetCount == 0)
        throw std::invalid_argument("computeTargetDiscrepancy: empty trace-target region");
    const std::size_t n = dPhiTar.data.size();
    double outsideSum = 0;
    double minTarget = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (masks.visible[c] && !regions.traceTarget[c]) outsideSum += dPhiTar.data[c];
        if (regions.traceTarget[c]) minTarget = std::min(minTarget, dPhiTar.data[c]);
    }
    const double offset = std::abs(std::min(0.0, minTarget));
    double denom = 0;
    for (std::size_t c = 0; c < n; ++c)
        if (regions.traceTarget[c]) denom += dPhiTar.data[c] + offset;

    ScalarField d(dPhiTar.dims);
    if (denom == 0) {
        const double uniform = outsideSum / double(regions.targetCount);
        for (std::size_t c = 0; c < n; ++c)
            if (regions.traceTarget[c]) d.data[c] = uniform;
    } else {
        const double scale = outsideSum / denom;
        for (std::size_t c = 0; c < n; ++c)
            if (regions.traceTarget[c]) d.data[c] = scale * (dPhiTar.data[c] + offset);
    }
    return d;
}

ScalarField estimInfl(const InflowEnv& env, const ImageSet& images, const ScalarField& phiPrev,
                      const StaggeredField& vel, SolverDiag* diag) {
    const DomainMasks& masks = *env.masks;
    const GridDims& d = phiPrev.dims;
    ScalarField phiI(d);

    const TraceResult regions = traceRegions(vel, masks, env.dt);
    if (regions.targetCount == 0 || regions.sourceCount == 0) return phiI;

    // target density and the residual target after pure advection
    ScalarField phiTar = env.cachedTarget ? *env.cachedTarget
                                          : reconDen(*env.tomo, images, ScalarField(d), diag);
    const ScalarField advPrev = advect(phiPrev, vel, env.dt);
    ScalarField dPhiTar(d);
    for (std::size_t c = 0; c < d.cells(); ++c)
        dPhiTar.data[c] = phiTar.data[c] - advPrev.data[c];

    const ScalarField disc = computeTargetDiscrepancy(dPhiTar, masks, regions);

    // unknown numbering over the source region, equation numbering over the
    // target region
    std::vector<std::int32_t> colOf(d.cells(), -1);
    std::vector<std::uint32_t> srcCells;
    srcCells.reserve(regions.sourceCount);
    for (std::size_t c = 0; c < d.cells(); ++c)
        if (regions.traceSource[c]) {
            colOf[c] = std::int32_t(srcCells.size());
            srcCells.push_back(std::uint32_t(c));
        }
    const std::size_t nUnknown = srcCells.size();

    SparseBuilder builder(regions.targetCount, nUnknown);
    Vec bInner;
    bInner.reserve(regions.targetCount);
    std::size_t row = 0;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const std::size_t c = std::size_t(i) + std::size_t(d.nx) * (j + std::size_t(d.ny) * k);
                if (!regions.traceTarget[c]) continue;
                const CellTaps taps = traceTaps(vel, d, env.dt, i, j, k);
                for (int t = 0; t < taps.count; ++t)
                    if (colOf[taps.cell[t]] >= 0)
                        builder.add(row, std::size_t(colOf[taps.cell[t]]), taps.w[t]);
                bInner.push_back(std::max(dPhiTar.data[c] + disc.data[c], -advPrev.data[c]));
                ++row;
            }
    const SparseOperator aI = builder.build();

    // dimensionless system; smoothness stencil on the unit lattice
    GridDims unit = d;
    unit.h = 1.0;
    const SparseOperator reg =
        buildMaskedRegularizer(env.reg, unit, regions.traceSource, colOf);

    Vec floorU(nUnknown);
    for (std::size_t u = 0; u < nUnknown; ++u) floorU[u] = phiPrev.data[srcCells[u]];

    const double sigma = env.pd.sigma;
    Vec iu = bInner;
    for (double& v : iu) v = -v;  // CGLS convention: rhs gets +A_Iᵀ bInner
    Vec warm(nUnknown, 0.0);
    auto proxData = [&](const Vec& v) {
        Vec bPd(v);
        for (double& q : bPd) q /= sigma;
        CglsResult res =
            solveCGLSReg(aI, &reg, iu, &bPd, sigma, env.cglsTol, env.cglsMaxIter, &warm, diag);
        warm = res.x;
        return res.x;
    };
    auto proxConstraint = [&](Vec cand) { return projectNonNeg(std::move(cand), floorU); };
    PdResult pd =
        pdIterate(proxData, proxConstraint, env.pd, Vec(nUnknown, 0.0), Vec(nUnknown, 0.0), diag);

    for (std::size_t u = 0; u < nUnknown; ++u) phiI.data[srcCells[u]] = pd.z[u];

    // Extrapolate one ring into inflow cells left out of the solve so the
    // advection step sees values across the whole active slab boundary.
    auto cellAt = [&](int i, int j, int k) {
        return std::size_t(i) + std::size_t(d.nx) * (j + std::size_t(d.ny) * k);
    };
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const std::size_t c = cellAt(i, j, k);
                if (!masks.inflow[c] || regions.traceSource[c]) continue;
                const int ni[6] = {i - 1, i + 1, i, i, i, i};
                const int nj[6] = {j, j, j - 1, j + 1, j, j};
                const int nk[6] = {k, k, k, k, k - 1, k + 1};
                for (int t = 0; t < 6; ++t) {
                    if (ni[t] < 0 || nj[t] < 0 || nk[t] < 0 || ni[t] >= d.nx || nj[t] >= d.ny ||
                        nk[t] >= d.nz)
                        continue;
                    const std::size_t nc = cellAt(ni[t], nj[t], nk[t]);
                    if (regions.traceSource[nc]) {
                        // keep the non-negativity of the total at this cell too
                        phiI.data[c] = std::max(phiI.data[nc], -phiPrev.data[c]);
                        break;
                    }
                }
            }
    return phiI;
}

}  // namespace sfr
