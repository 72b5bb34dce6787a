#include "sfr/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sfr {

ScalarField advect(const ScalarField& q, const StaggeredField& vel, double dt) {
    const GridDims& d = q.dims;
    if (!(vel.dims == d)) throw std::invalid_argument("advect: dims mismatch");
    ScalarField out(d);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const double px = (i + 0.5) * d.h, py = (j + 0.5) * d.h, pz = (k + 0.5) * d.h;
                double qx, qy, qz;
                traceBack(vel, dt, px, py, pz, qx, qy, qz);
                out.at(i, j, k) = sampleScalarZeroPad(q, qx, qy, qz);
            }
    return out;
}

namespace {

double sampleComponentClamped(const StaggeredField& f, int comp, double px, double py, double pz);

}  // namespace

StaggeredField advect(const StaggeredField& q, const StaggeredField& vel, double dt) {
    const GridDims& d = q.dims;
    if (!(vel.dims == d)) throw std::invalid_argument("advect: dims mismatch");
    StaggeredField out(d);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i <= d.nx; ++i) {
                const double px = i * d.h, py = (j + 0.5) * d.h, pz = (k + 0.5) * d.h;
                double qx, qy, qz;
                traceBack(vel, dt, px, py, pz, qx, qy, qz);
                out.atX(i, j, k) = sampleComponentClamped(q, 0, qx, qy, qz);
            }
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j <= d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const double px = (i + 0.5) * d.h, py = j * d.h, pz = (k + 0.5) * d.h;
                double qx, qy, qz;
                traceBack(vel, dt, px, py, pz, qx, qy, qz);
                out.atY(i, j, k) = sampleComponentClamped(q, 1, qx, qy, qz);
            }
    for (int k = 0; k <= d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const double px = (i + 0.5) * d.h, py = (j + 0.5) * d.h, pz = k * d.h;
                double qx, qy, qz;
                traceBack(vel, dt, px, py, pz, qx, qy, qz);
                out.atZ(i, j, k) = sampleComponentClamped(q, 2, qx, qy, qz);
            }
    return out;
}

namespace {

double latticeClampedLocal(const double* data, int n0, int n1, int n2, double c0, double c1,
                           double c2) {
    c0 = std::clamp(c0, 0.0, double(n0 - 1));
    c1 = std::clamp(c1, 0.0, double(n1 - 1));
    c2 = std::clamp(c2, 0.0, double(n2 - 1));
    const double b0 = std::floor(c0), b1 = std::floor(c1), b2 = std::floor(c2);
    const int i = int(b0), j = int(b1), k = int(b2);
    const double fx = c0 - b0, fy = c1 - b1, fz = c2 - b2;
    const int i1 = std::min(i + 1, n0 - 1), j1 = std::min(j + 1, n1 - 1),
              k1 = std::min(k + 1, n2 - 1);
    auto at = [&](int a, int b, int c) {
        return data[std::size_t(a) + std::size_t(n0) * (std::size_t(b) + std::size_t(n1) * c)];
    };
    const double c00 = at(i, j, k) * (1 - fx) + at(i1, j, k) * fx;
    const double c10 = at(i, j1, k) * (1 - fx) + at(i1, j1, k) * fx;
    const double c01 = at(i, j, k1) * (1 - fx) + at(i1, j, k1) * fx;
    const double c11 = at(i, j1, k1) * (1 - fx) + at(i1, j1, k1) * fx;
    const double c0v = c00 * (1 - fy) + c10 * fy;
    const double c1v = c01 * (1 - fy) + c11 * fy;
    return c0v * (1 - fz) + c1v * fz;
}

double sampleComponentClamped(const StaggeredField& f, int comp, double px, double py, double pz) {
    const GridDims& d = f.dims;
    const double inv = 1.0 / d.h;
    switch (comp) {
        case 0:
            return latticeClampedLocal(f.x.data(), d.nx + 1, d.ny, d.nz, px * inv, py * inv - 0.5,
                                       pz * inv - 0.5);
        case 1:
            return latticeClampedLocal(f.y.data(), d.nx, d.ny + 1, d.nz, px * inv - 0.5, py * inv,
                                       pz * inv - 0.5);
        default:
            return latticeClampedLocal(f.z.data(), d.nx, d.ny, d.nz + 1, px * inv - 0.5,
                                       py * inv - 0.5, pz * inv);
    }
}

// Neumann Laplacian applied on a face lattice, written out as a stencil.
void latticeDiffuse(const std::vector<double>& in, std::vector<double>& out, int n0, int n1,
                    int n2, double coeff) {
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
                out[id(i, j, k)] = c + coeff * (acc - nb * c);
            }
}

}  // namespace

StaggeredField addViscosity(const StaggeredField& vel, double nu, double dt) {
    const GridDims& d = vel.dims;
    if (nu < 0) throw std::invalid_argument("addViscosity: nu must be >= 0");
    const double number = nu * dt / (d.h * d.h);
    if (number >= 0.5) {
        std::ostringstream os;
        os << "addViscosity: explicit step unstable, nu*dt/h^2 = " << number << " >= 0.5";
        throw std::invalid_argument(os.str());
    }
    if (nu == 0) return vel;
    StaggeredField out(d);
    latticeDiffuse(vel.x, out.x, d.nx + 1, d.ny, d.nz, number);
    latticeDiffuse(vel.y, out.y, d.nx, d.ny + 1, d.nz, number);
    latticeDiffuse(vel.z, out.z, d.nx, d.ny, d.nz + 1, number);
    return out;
}

StaggeredField addBuoyancy(const StaggeredField& vel, const ScalarField& density, double alpha,
                           double dt) {
    const GridDims& d = vel.dims;
    if (!(density.dims == d)) throw std::invalid_argument("addBuoyancy: dims mismatch");
    for (double v : density.data)
        if (v < 0) throw std::invalid_argument("addBuoyancy: density must be >= 0");
    StaggeredField out = vel;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 1; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                out.atY(i, j, k) += dt * alpha * 0.5 * (density.at(i, j - 1, k) + density.at(i, j, k));
    return out;
}

PressureSolver::PressureSolver(const GridDims& dims, const Mask* inflowCells) : dims_(dims) {
    requireValid(dims);
    fixedX_.assign(dims.facesX(), 0);
    fixedY_.assign(dims.facesY(), 0);
    fixedZ_.assign(dims.facesZ(), 0);
    const int nx = dims.nx, ny = dims.ny, nz = dims.nz;
    auto cellIdx = [&](int i, int j, int k) {
        return std::size_t(i) + std::size_t(nx) * (std::size_t(j) + std::size_t(ny) * k);
    };
    StaggeredField faceIdx(dims);  // reuse the index helpers only

    // Floor faces (y=0) are a wall: always prescribed.
    for (int k = 0; k < nz; ++k)
        for (int i = 0; i < nx; ++i) fixedY_[faceIdx.idxY(i, 0, k)] = 1;

    if (inflowCells) {
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i) {
                    if (!(*inflowCells)[cellIdx(i, j, k)]) continue;
                    fixedX_[faceIdx.idxX(i, j, k)] = 1;
                    fixedX_[faceIdx.idxX(i + 1, j, k)] = 1;
                    fixedY_[faceIdx.idxY(i, j, k)] = 1;
                    fixedY_[faceIdx.idxY(i, j + 1, k)] = 1;
                    fixedZ_[faceIdx.idxZ(i, j, k)] = 1;
                    fixedZ_[faceIdx.idxZ(i, j, k + 1)] = 1;
                }
    }

    // A cell with every face prescribed carries no pressure unknown.
    cellOf_.assign(dims.cells(), -1);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const bool allFixed = fixedX_[faceIdx.idxX(i, j, k)] &&
                                      fixedX_[faceIdx.idxX(i + 1, j, k)] &&
                                      fixedY_[faceIdx.idxY(i, j, k)] &&
                                      fixedY_[faceIdx.idxY(i, j + 1, k)] &&
                                      fixedZ_[faceIdx.idxZ(i, j, k)] &&
                                      fixedZ_[faceIdx.idxZ(i, j, k + 1)];
                if (allFixed) continue;
                cellOf_[cellIdx(i, j, k)] = std::int32_t(nActive_++);
                activeCells_.push_back(std::uint32_t(cellIdx(i, j, k)));
            }

    // Assemble the mixed-boundary Laplacian over active cells.
    const double w = 1.0 / (dims.h * dims.h);
    std::vector<std::int64_t> rowPtr(nActive_ + 1, 0);
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    col.reserve(nActive_ * 7);
    val.reserve(nActive_ * 7);
    std::size_t r = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                if (cellOf_[cellIdx(i, j, k)] < 0) continue;
                double diag = 0;
                struct Entry {
                    std::uint32_t c;
                    double v;
                };
                std::vector<Entry> offs;
                offs.reserve(6);
                // For each of the 6 faces: prescribed -> Neumann (skip);
                // domain boundary (non-floor) -> Dirichlet ghost, diag only;
                // interior, neighbor active -> usual coupling.
                auto face = [&](bool fixed, bool atBoundary, int ni, int nj, int nk) {
                    if (fixed) return;
                    if (atBoundary) {
                        diag += w;  // ghost pressure 0 at distance h
                        return;
                    }
                    const std::int32_t nc = cellOf_[cellIdx(ni, nj, nk)];
                    if (nc < 0) return;  // neighbor fully prescribed: acts as wall
                    diag += w;
                    offs.push_back({std::uint32_t(nc), -w});
                };
                face(fixedX_[faceIdx.idxX(i, j, k)], i == 0, i - 1, j, k);
                face(fixedX_[faceIdx.idxX(i + 1, j, k)], i == nx - 1, i + 1, j, k);
                face(fixedY_[faceIdx.idxY(i, j, k)], j == 0, i, j - 1, k);
                face(fixedY_[faceIdx.idxY(i, j + 1, k)], j == ny - 1, i, j + 1, k);
                face(fixedZ_[faceIdx.idxZ(i, j, k)], k == 0, i, j, k - 1);
                face(fixedZ_[faceIdx.idxZ(i, j, k + 1)], k == nz - 1, i, j, k + 1);

                std::sort(offs.begin(), offs.end(),
                          [](const Entry& a, const Entry& b) { return a.c < b.c; });
                const std::uint32_t self = std::uint32_t(cellOf_[cellIdx(i, j, k)]);
                bool placed = false;
                for (const Entry& e : offs) {
                    if (!placed && e.c > self) {
                        col.push_back(self);
                        val.push_back(diag);
                        placed = true;
                    }
                    col.push_back(e.c);
                    val.push_back(e.v);
                }
                if (!placed) {
                    col.push_back(self);
                    val.push_back(diag);
                }
                rowPtr[++r] = std::int64_t(col.size());
            }
    lap_ = SparseOperator(nActive_, std::move(rowPtr), std::move(col), std::move(val));
}

StaggeredField PressureSolver::project(const StaggeredField& vel, double tolDivMax, int maxIter,
                                       SolverDiag* diag, Vec* warmPressure) const {
    if (!(vel.dims == dims_)) throw std::invalid_argument("pressure solver dims mismatch");
    const GridDims& d = dims_;
    const double invH = 1.0 / d.h;

    Vec b(nActive_, 0.0);
    const ScalarField div = divergence(vel);
    for (std::size_t a = 0; a < nActive_; ++a) b[a] = -div.data[activeCells_[a]];

    const Vec* x0 = (warmPressure && warmPressure->size() == nActive_) ? warmPressure : nullptr;
    CgResult pr = solveCG(lap_, b, tolDivMax, maxIter, CgStop::AbsoluteMax, x0, diag);
    if (diag) diag->pressureSolves++;
    if (!pr.converged) {
        std::ostringstream os;
        os << "pressure solve did not reach tolerance: residual divergence " << pr.residual
           << " > " << tolDivMax << " after " << pr.iterations << " iterations";
        throw std::runtime_error(os.str());
    }
    if (warmPressure) *warmPressure = pr.x;

    // Subtract the pressure gradient on every non-prescribed face.
    auto pAt = [&](int i, int j, int k) -> double {
        const std::int32_t a = cellOf_[std::size_t(i) + std::size_t(d.nx) * (j + std::size_t(d.ny) * k)];
        return a < 0 ? 0.0 : pr.x[a];
    };
    StaggeredField out = vel;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i <= d.nx; ++i) {
                if (fixedX_[out.idxX(i, j, k)]) continue;
                const double lo = (i == 0) ? 0.0 : pAt(i - 1, j, k);     // open side: ghost 0
                const double hi = (i == d.nx) ? 0.0 : pAt(i, j, k);
                out.atX(i, j, k) -= (hi - lo) * invH;
            }
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j <= d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                if (fixedY_[out.idxY(i, j, k)]) continue;
                const double lo = (j == 0) ? 0.0 : pAt(i, j - 1, k);
                const double hi = (j == d.ny) ? 0.0 : pAt(i, j, k);
                out.atY(i, j, k) -= (hi - lo) * invH;
            }
    for (int k = 0; k <= d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                if (fixedZ_[out.idxZ(i, j, k)]) continue;
                const double lo = (k == 0) ? 0.0 : pAt(i, j, k - 1);
                const double hi = (k == d.nz) ? 0.0 : pAt(i, j, k);
                out.atZ(i, j, k) -= (hi - lo) * invH;
            }
    return out;
}

StaggeredField pressureProject(const StaggeredField& vel, double solverTol, int maxIter,
                               SolverDiag* diag) {
    PressureSolver solver(vel.dims);
    return solver.project(vel, solverTol, maxIter, diag);
}

void injectSource(ScalarField& density, const SimParams& p, int frame) {
    const GridDims& d = density.dims;
    const double cx = p.sourceCenterX > 0 ? p.sourceCenterX : d.nx * 0.5;
    const double cz = p.sourceCenterZ > 0 ? p.sourceCenterZ : d.nz * 0.5;
    const double r2 = p.sourceRadius * p.sourceRadius;
    std::mt19937_64 rng(p.inflowNoiseSeed * 0x9E3779B97F4A7C15ull + std::uint64_t(frame) + 1);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int jmax = std::min(p.sourceHeight, d.ny);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < jmax; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const double dx = (i + 0.5) - cx, dz = (k + 0.5) - cz;
                if (dx * dx + dz * dz > r2) continue;
                const double xi = uni(rng);
                density.at(i, j, k) = std::max(0.0, p.sourceDensity * (1.0 + p.inflowNoiseAmp * xi));
            }
}

SimState stepForward(const SimState& state, const SimParams& params, int frame,
                     const PressureSolver& pressure, SolverDiag* diag) {
    SimState next;
    StaggeredField v = advect(state.vel, state.vel, params.dt);
    v = pressure.project(v, params.pressureTol, params.pressureMaxIter, diag);
    v = addViscosity(v, params.viscosity, params.dt);
    v = addBuoyancy(v, state.density, params.buoyancyAlpha, params.dt);
    ScalarField den = state.density;
    injectSource(den, params, frame);
    next.density = advect(den, v, params.dt);
    next.vel = std::move(v);
    return next;
}

}  // namespace sfr
