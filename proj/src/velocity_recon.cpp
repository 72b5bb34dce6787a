#include "sfr/velocity_recon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfr {

namespace {

// Neumann Laplacian (PSD sign, -div grad) applied on a raw lattice.
void latticeLaplacianApply(const double* in, double* out, int n0, int n1, int n2, double h) {
    const double w = 1.0 / (h * h);
    auto id = [&](int i, int j, int k) {
        return std::size_t(i) + std::size_t(n0) * (std::size_t(j) + std::size_t(n1) * k);
    };
    for (int k = 0; k < n2; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n0; ++i) {
                const double c = in[id(i, j, k)];
                double acc = 0;
                int nb = 0;
                if (i > 0) { acc += in[id(i - 1, j, k)]; ++nb; }
                if (i + 1 < n0) { acc += in[id(i + 1, j, k)]; ++nb; }
                if (j > 0) { acc += in[id(i, j - 1, k)]; ++nb; }
                if (j + 1 < n1) { acc += in[id(i, j + 1, k)]; ++nb; }
                if (k > 0) { acc += in[id(i, j, k - 1)]; ++nb; }
                if (k + 1 < n2) { acc += in[id(i, j, k + 1)]; ++nb; }
                out[id(i, j, k)] = w * (nb * c - acc);
            }
}

struct StackedLayout {
    GridDims dims;
    std::size_t nX, nY, nZ, nC, total;

    explicit StackedLayout(const GridDims& d)
        : dims(d), nX(d.facesX()), nY(d.facesY()), nZ(d.facesZ()), nC(d.cells()),
          total(nX + nY + nZ + nC) {}

    void pack(const StaggeredField& u, const ScalarField& s, Vec& out) const {
        out.resize(total);
        std::copy(u.x.begin(), u.x.end(), out.begin());
        std::copy(u.y.begin(), u.y.end(), out.begin() + nX);
        std::copy(u.z.begin(), u.z.end(), out.begin() + nX + nY);
        std::copy(s.data.begin(), s.data.end(), out.begin() + nX + nY + nZ);
    }
    void unpackVel(std::span<const double> v, StaggeredField& u) const {
        std::copy(v.begin(), v.begin() + nX, u.x.begin());
        std::copy(v.begin() + nX, v.begin() + nX + nY, u.y.begin());
        std::copy(v.begin() + nX + nY, v.begin() + nX + nY + nZ, u.z.begin());
    }
    void unpackDen(std::span<const double> v, ScalarField& s) const {
        std::copy(v.begin() + nX + nY + nZ, v.end(), s.data.begin());
    }
};

// The transport coupling D in grid units: faces -> cells, Du|c is the
// cell-difference gradient of phiP dotted with u (cells/frame), averaged from
// the six surrounding faces — the first-order density change one frame of
// advection by u causes. DT scatters cell values back to faces with the same
// weights, so <Du, c> = <u, DTc> exactly.
struct TransportCoupling {
    const GridDims d;
    StaggeredField g;  // cell-unit gradient of the predicted density

    TransportCoupling(const ScalarField& phiP) : d(phiP.dims), g(gradient(phiP)) {
        // gradient() is 1/h-scaled; the grid-unit solve wants plain differences
        for (double& v : g.x) v *= d.h;
        for (double& v : g.y) v *= d.h;
        for (double& v : g.z) v *= d.h;
    }

    std::size_t ix(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(d.nx + 1) * (std::size_t(j) + std::size_t(d.ny) * k);
    }
    std::size_t iy(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(d.nx) * (std::size_t(j) + std::size_t(d.ny + 1) * k);
    }
    std::size_t iz(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(d.nx) * (std::size_t(j) + std::size_t(d.ny) * k);
    }

    void applyD(const double* ux, const double* uy, const double* uz, double* cells) const {
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i < d.nx; ++i) {
                    const std::size_t xl = ix(i, j, k), xh = ix(i + 1, j, k);
                    const std::size_t yl = iy(i, j, k), yh = iy(i, j + 1, k);
                    const std::size_t zl = iz(i, j, k), zh = iz(i, j, k + 1);
                    cells[std::size_t(i) + std::size_t(d.nx) * (j + std::size_t(d.ny) * k)] =
                        0.5 * (g.x[xl] * ux[xl] + g.x[xh] * ux[xh] + g.y[yl] * uy[yl] +
                               g.y[yh] * uy[yh] + g.z[zl] * uz[zl] + g.z[zh] * uz[zh]);
                }
    }

    void applyDT(const double* cells, double* ux, double* uy, double* uz) const {
        std::fill(ux, ux + d.facesX(), 0.0);
        std::fill(uy, uy + d.facesY(), 0.0);
        std::fill(uz, uz + d.facesZ(), 0.0);
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i < d.nx; ++i) {
                    const double c =
                        0.5 * cells[std::size_t(i) + std::size_t(d.nx) * (j + std::size_t(d.ny) * k)];
                    ux[ix(i, j, k)] += g.x[ix(i, j, k)] * c;
                    ux[ix(i + 1, j, k)] += g.x[ix(i + 1, j, k)] * c;
                    uy[iy(i, j, k)] += g.y[iy(i, j, k)] * c;
                    uy[iy(i, j + 1, k)] += g.y[iy(i, j + 1, k)] * c;
                    uz[iz(i, j, k)] += g.z[iz(i, j, k)] * c;
                    uz[iz(i, j, k + 1)] += g.z[iz(i, j, k + 1)] * c;
                }
    }
};

// Prescribe the total inflow velocity (0, c, 0) on every face touching an
// inflow cell: u|_I = c - uP|_I componentwise.
void setInflowFaces(StaggeredField& u, const StaggeredField& uP, const Mask& inflowCells,
                    double c) {
    const GridDims& d = u.dims;
    auto cellAt = [&](int i, int j, int k) {
        return std::size_t(i) + std::size_t(d.nx) * (j + std::size_t(d.ny) * k);
    };
    auto inflow = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= d.nx || j >= d.ny || k >= d.nz) return false;
        return inflowCells[cellAt(i, j, k)] != 0;
    };
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i <= d.nx; ++i)
                if (inflow(i - 1, j, k) || inflow(i, j, k))
                    u.atX(i, j, k) = -uP.atX(i, j, k);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j <= d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                if (inflow(i, j - 1, k) || inflow(i, j, k))
                    u.atY(i, j, k) = c - uP.atY(i, j, k);
    for (int k = 0; k <= d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                if (inflow(i, j, k - 1) || inflow(i, j, k))
                    u.atZ(i, j, k) = -uP.atZ(i, j, k);
}

}  // namespace

StaggeredField predictVelocity(const StaggeredField& uPrev, const PressureSolver& project,
                               double nu, double dt, double pressureTol, int pressureMaxIter,
                               SolverDiag* diag) {
    StaggeredField adv = advect(uPrev, uPrev, dt);
    StaggeredField uP = project.project(adv, pressureTol, pressureMaxIter, diag);
    if (nu > 0) {
        const GridDims& d = uPrev.dims;
        const double coeff = nu * dt;
        if (coeff / (d.h * d.h) >= 0.5)
            throw std::invalid_argument("predictVelocity: viscosity step unstable");
        std::vector<double> lap(std::max({d.facesX(), d.facesY(), d.facesZ()}));
        latticeLaplacianApply(uPrev.x.data(), lap.data(), d.nx + 1, d.ny, d.nz, d.h);
        for (std::size_t f = 0; f < d.facesX(); ++f) uP.x[f] -= coeff * lap[f];
        latticeLaplacianApply(uPrev.y.data(), lap.data(), d.nx, d.ny + 1, d.nz, d.h);
        for (std::size_t f = 0; f < d.facesY(); ++f) uP.y[f] -= coeff * lap[f];
        latticeLaplacianApply(uPrev.z.data(), lap.data(), d.nx, d.ny, d.nz + 1, d.h);
        for (std::size_t f = 0; f < d.facesZ(); ++f) uP.z[f] -= coeff * lap[f];
    }
    return uP;
}

void ReconLevel::prepareFrame(const ImageSet& images, SolverDiag* diag) {
    Mask hull = computeVisualHull(images, P, hullParams);
    // density unknowns live in the visible domain only
    for (std::size_t c = 0; c < hull.size(); ++c) hull[c] = hull[c] && masks.visible[c];
    masks.hull = hull;
    tomo = makeTomographyProblem(P, hull, denReg, pd, cglsTol, cglsMaxIter);
    densityTarget = reconDen(tomo, images, ScalarField(dims), diag);
    frameReady = true;
}

InflowEnv ReconLevel::inflowEnv() const {
    InflowEnv env;
    env.masks = &masks;
    env.tomo = &tomo;
    env.cachedTarget = frameReady ? &densityTarget : nullptr;
    env.reg = inflowReg;
    env.pd = pd;
    env.cglsTol = cglsTol;
    env.cglsMaxIter = cglsMaxIter;
    env.dt = dt;
    return env;
}

ReconStack buildReconStack(const std::vector<CameraView>& cameras, const GridDims& dims,
                           int inflowSlab, double projectionStepScale) {
    ReconStack stack;
    GridDims d = dims;
    int slab = inflowSlab;
    while (true) {
        auto level = std::make_unique<ReconLevel>();
        level->dims = d;
        level->inflowSlab = slab;
        level->masks = makeSlabMasks(d, slab);
        level->P = buildProjection(cameras, d, slab * d.h, projectionStepScale);
        level->freeProject = std::make_unique<PressureSolver>(d);
        level->inflowProject = std::make_unique<PressureSolver>(d, &level->masks.inflow);
        stack.levels.push_back(std::move(level));

        const bool even = d.nx % 2 == 0 && d.ny % 2 == 0 && d.nz % 2 == 0;
        const int minDim = std::min({d.nx, d.ny, d.nz});
        if (!even || minDim < 16 || minDim / 2 < 4 || slab < 2) break;
        d = GridDims{d.nx / 2, d.ny / 2, d.nz / 2, d.h * 2};
        slab = slab / 2;
        if (slab < 1) break;
    }
    return stack;
}

StaggeredField reconVel(ReconLevel& level, const StaggeredField& uP, const ScalarField& phiP,
                        const ImageSet& images, SolverDiag* diag) {
    if (!level.frameReady) throw std::logic_error("reconVel: level frame not prepared");
    const GridDims& d = level.dims;
    const StackedLayout lay(d);
    const TransportCoupling coupling(phiP);
    const double sigma = level.pd.sigma;
    // The velocity unknown lives in cells/frame so the transport term and the
    // regularizer weights act at their intended scale.
    const double toWorld = d.h / level.dt;
    const double toGrid = level.dt / d.h;

    // V_b ablation: one tomography delta up front, velocity-only PD after.
    ScalarField phiUFixed(d);
    if (level.ablationVb) phiUFixed = reconDen(level.tomo, images, phiP, diag);

    const std::size_t nFace = lay.nX + lay.nY + lay.nZ;
    const std::size_t n = level.ablationVb ? nFace : lay.total;

    const double wSv = level.velReg.smoothWeight, wKv = level.velReg.kineticWeight;
    const double wSd = level.denReg.smoothWeight, wKd = level.denReg.kineticWeight;

    Vec cells(lay.nC), lap(std::max({lay.nX, lay.nY, lay.nZ, lay.nC}));
    auto applyBlock = [&](std::span<const double> in, std::span<double> out) {
        const double* ux = in.data();
        const double* uy = in.data() + lay.nX;
        const double* uz = in.data() + lay.nX + lay.nY;
        // t = D u (+ phi term when coupled)
        coupling.applyD(ux, uy, uz, cells.data());
        if (!level.ablationVb) {
            const double* phi = in.data() + nFace;
            for (std::size_t c = 0; c < lay.nC; ++c) cells[c] += phi[c];
        }
        coupling.applyDT(cells.data(), out.data(), out.data() + lay.nX,
                         out.data() + lay.nX + lay.nY);
        // velocity regularizer + sigma (unit lattice)
        latticeLaplacianApply(ux, lap.data(), d.nx + 1, d.ny, d.nz, 1.0);
        for (std::size_t f = 0; f < lay.nX; ++f) out[f] += wSv * lap[f] + (wKv + sigma) * ux[f];
        latticeLaplacianApply(uy, lap.data(), d.nx, d.ny + 1, d.nz, 1.0);
        for (std::size_t f = 0; f < lay.nY; ++f)
            out[lay.nX + f] += wSv * lap[f] + (wKv + sigma) * uy[f];
        latticeLaplacianApply(uz, lap.data(), d.nx, d.ny, d.nz + 1, 1.0);
        for (std::size_t f = 0; f < lay.nZ; ++f)
            out[lay.nX + lay.nY + f] += wSv * lap[f] + (wKv + sigma) * uz[f];
        if (!level.ablationVb) {
            const double* phi = in.data() + nFace;
            double* outPhi = out.data() + nFace;
            latticeLaplacianApply(phi, lap.data(), d.nx, d.ny, d.nz, 1.0);
            for (std::size_t c = 0; c < lay.nC; ++c)
                outPhi[c] = cells[c] + wSd * lap[c] + (wKd + sigma) * phi[c];
        }
    };

    // Fixed-density forcing for the ablation mode: rhs gets -DT phiU.
    Vec vbForcing;
    if (level.ablationVb) {
        vbForcing.assign(nFace, 0.0);
        coupling.applyDT(phiUFixed.data.data(), vbForcing.data(), vbForcing.data() + lay.nX,
                         vbForcing.data() + lay.nX + lay.nY);
    }

    Vec cgWarm(n, 0.0);
    auto proxData = [&](const Vec& v) {
        Vec rhs = v;
        if (level.ablationVb)
            for (std::size_t f = 0; f < nFace; ++f) rhs[f] -= vbForcing[f];
        CgResult res = solveCG(applyBlock, rhs, level.cgTol, level.cgMaxIter, CgStop::RelativeL2,
                               &cgWarm, diag);
        cgWarm = res.x;
        return res.x;
    };

    StaggeredField uTmp(d);
    ScalarField phiTmp(d);
    Vec pressureWarm;
    auto proxConstraint = [&](Vec cand) {
        lay.unpackVel(cand, uTmp);
        for (double& v : uTmp.x) v *= toWorld;
        for (double& v : uTmp.y) v *= toWorld;
        for (double& v : uTmp.z) v *= toWorld;
        setInflowFaces(uTmp, uP, level.masks.inflow, level.inflowSpeed);
        StaggeredField proj = level.inflowProject->project(uTmp, level.pressureTol,
                                                           level.pressureMaxIter, diag,
                                                           &pressureWarm);
        for (std::size_t f = 0; f < lay.nX; ++f) cand[f] = proj.x[f] * toGrid;
        for (std::size_t f = 0; f < lay.nY; ++f) cand[lay.nX + f] = proj.y[f] * toGrid;
        for (std::size_t f = 0; f < lay.nZ; ++f) cand[lay.nX + lay.nY + f] = proj.z[f] * toGrid;
        if (!level.ablationVb) {
            lay.unpackDen(cand, phiTmp);
            ScalarField floorField = phiP;
            for (std::size_t c = 0; c < lay.nC; ++c) floorField.data[c] += phiTmp.data[c];
            const ScalarField corr = reconDen(level.tomo, images, floorField, diag);
            for (std::size_t c = 0; c < lay.nC; ++c) cand[nFace + c] += corr.data[c];
        }
        return cand;
    };

    double firstNorm = -1;
    PdMonitor monitor = [&](int k, const Vec& z) {
        double nz = 0;
        for (double q : z) nz += q * q;
        nz = std::sqrt(nz);
        if (k == 0)
            firstNorm = nz;
        else if (firstNorm > 0 && nz > 1e3 * firstNorm)
            throw std::runtime_error("reconVel: primal-dual iteration diverged");
    };
    PdResult pd =
        pdIterate(proxData, proxConstraint, level.pd, Vec(n, 0.0), Vec(n, 0.0), diag, &monitor);

    StaggeredField uU(d);
    lay.unpackVel(pd.z, uU);
    for (double& v : uU.x) v *= toWorld;
    for (double& v : uU.y) v *= toWorld;
    for (double& v : uU.z) v *= toWorld;
    // the unit round trip costs an ulp; pin the boundary exactly
    setInflowFaces(uU, uP, level.masks.inflow, level.inflowSpeed);
    return uU;
}

StaggeredField reconVelMS(ReconStack& stack, std::size_t levelIdx, const StaggeredField& uP,
                          const ScalarField& phiP, const ScalarField& phiPrev,
                          const ImageSet& images, SolverDiag* diag) {
    ReconLevel& level = *stack.levels[levelIdx];
    if (!level.frameReady) level.prepareFrame(images, diag);
    if (levelIdx + 1 < stack.levels.size()) {
        const StaggeredField uPc = restrictField(uP);
        const ScalarField phiPc = restrictField(phiP);
        const ScalarField phiPrevC = restrictField(phiPrev);
        const StaggeredField uuCoarse =
            reconVelMS(stack, levelIdx + 1, uPc, phiPc, phiPrevC, images, diag);
        StaggeredField uuC = level.freeProject->project(
            prolongField(uuCoarse), level.pressureTol, level.pressureMaxIter, diag);

        StaggeredField uPNew = uP;
        for (std::size_t f = 0; f < uPNew.x.size(); ++f) uPNew.x[f] += uuC.x[f];
        for (std::size_t f = 0; f < uPNew.y.size(); ++f) uPNew.y[f] += uuC.y[f];
        for (std::size_t f = 0; f < uPNew.z.size(); ++f) uPNew.z[f] += uuC.z[f];

        const InflowEnv env = level.inflowEnv();
        const ScalarField phiIpNew = estimInfl(env, images, phiPrev, uPNew, diag);
        ScalarField seeded = phiPrev;
        for (std::size_t c = 0; c < seeded.data.size(); ++c) seeded.data[c] += phiIpNew.data[c];
        const ScalarField phiPNew = advect(seeded, uPNew, level.dt);

        StaggeredField uuFine = reconVel(level, uPNew, phiPNew, images, diag);
        for (std::size_t f = 0; f < uuFine.x.size(); ++f) uuFine.x[f] += uuC.x[f];
        for (std::size_t f = 0; f < uuFine.y.size(); ++f) uuFine.y[f] += uuC.y[f];
        for (std::size_t f = 0; f < uuFine.z.size(); ++f) uuFine.z[f] += uuC.z[f];
        return uuFine;
    }
    return reconVel(level, uP, phiP, images, diag);
}

}  // namespace sfr
