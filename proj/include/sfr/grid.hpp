#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sfr {

using Vec = std::vector<double>;

// Uniform cell-centered grid. y is the vertical axis; h is the edge length of
// a cell in world units (same along all axes).
struct GridDims {
    int nx = 0, ny = 0, nz = 0;
    double h = 0.0;

    std::size_t cells() const { return std::size_t(nx) * ny * nz; }
    // Face counts per component of a MAC grid.
    std::size_t facesX() const { return std::size_t(nx + 1) * ny * nz; }
    std::size_t facesY() const { return std::size_t(nx) * (ny + 1) * nz; }
    std::size_t facesZ() const { return std::size_t(nx) * ny * (nz + 1); }

    bool valid() const { return nx >= 4 && ny >= 4 && nz >= 4 && h > 0.0; }
    bool operator==(const GridDims& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && h == o.h;
    }
};

inline void requireValid(const GridDims& d) {
    if (!d.valid()) throw std::invalid_argument("grid dims must be >= 4 per axis with h > 0");
}

// Cell-centered scalar field, x-fastest storage order.
struct ScalarField {
    GridDims dims;
    std::vector<double> data;

    ScalarField() = default;
    explicit ScalarField(const GridDims& d) : dims(d), data(d.cells(), 0.0) {}

    std::size_t idx(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(dims.nx) * (std::size_t(j) + std::size_t(dims.ny) * k);
    }
    double& at(int i, int j, int k) { return data[idx(i, j, k)]; }
    double at(int i, int j, int k) const { return data[idx(i, j, k)]; }
    std::size_t size() const { return data.size(); }
    void fill(double v) { data.assign(data.size(), v); }
};

// Face-centered (MAC) vector field. Component c lives on faces normal to c:
// x on (nx+1)*ny*nz faces, y on nx*(ny+1)*nz, z on nx*ny*(nz+1).
struct StaggeredField {
    GridDims dims;
    std::vector<double> x, y, z;

    StaggeredField() = default;
    explicit StaggeredField(const GridDims& d)
        : dims(d), x(d.facesX(), 0.0), y(d.facesY(), 0.0), z(d.facesZ(), 0.0) {}

    std::size_t idxX(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(dims.nx + 1) * (std::size_t(j) + std::size_t(dims.ny) * k);
    }
    std::size_t idxY(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(dims.nx) * (std::size_t(j) + std::size_t(dims.ny + 1) * k);
    }
    std::size_t idxZ(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(dims.nx) * (std::size_t(j) + std::size_t(dims.ny) * k);
    }
    double& atX(int i, int j, int k) { return x[idxX(i, j, k)]; }
    double& atY(int i, int j, int k) { return y[idxY(i, j, k)]; }
    double& atZ(int i, int j, int k) { return z[idxZ(i, j, k)]; }
    double atX(int i, int j, int k) const { return x[idxX(i, j, k)]; }
    double atY(int i, int j, int k) const { return y[idxY(i, j, k)]; }
    double atZ(int i, int j, int k) const { return z[idxZ(i, j, k)]; }

    std::size_t totalFaces() const { return x.size() + y.size() + z.size(); }
    void fill(double v) {
        x.assign(x.size(), v);
        y.assign(y.size(), v);
        z.assign(z.size(), v);
    }
};

using Mask = std::vector<std::uint8_t>;

// Voxel classification shared by the solvers. `visible` and `inflow` partition
// the domain statically (inflow = bottom slab); `hull` restricts density
// unknowns per frame; traceTarget/traceSource are the per-frame back-trace
// regions of the inflow estimation.
struct DomainMasks {
    GridDims dims;
    Mask visible;      // cells the cameras constrain
    Mask inflow;       // unseen source slab
    Mask hull;         // per-frame visual hull, subset of visible
    Mask traceTarget;  // visible cells back-tracing into the inflow slab
    Mask traceSource;  // inflow cells those traces sample

    DomainMasks() = default;
    explicit DomainMasks(const GridDims& d)
        : dims(d), visible(d.cells(), 0), inflow(d.cells(), 0), hull(d.cells(), 0),
          traceTarget(d.cells(), 0), traceSource(d.cells(), 0) {}
};

// visible = everything at or above the slab, inflow = the slab below it.
inline DomainMasks makeSlabMasks(const GridDims& dims, int inflowSlab) {
    requireValid(dims);
    if (inflowSlab < 1 || inflowSlab >= dims.ny)
        throw std::invalid_argument("inflow slab must be in [1, ny)");
    DomainMasks m(dims);
    for (int k = 0; k < dims.nz; ++k)
        for (int j = 0; j < dims.ny; ++j)
            for (int i = 0; i < dims.nx; ++i) {
                const std::size_t c = std::size_t(i) + std::size_t(dims.nx) * (j + std::size_t(dims.ny) * k);
                if (j < inflowSlab)
                    m.inflow[c] = 1;
                else
                    m.visible[c] = 1;
            }
    return m;
}

inline bool masksConsistent(const DomainMasks& m) {
    for (std::size_t c = 0; c < m.visible.size(); ++c) {
        if (m.visible[c] && m.inflow[c]) return false;
        if (m.traceSource[c] && !m.inflow[c]) return false;
        if (m.traceTarget[c] && !m.visible[c]) return false;
    }
    return true;
}

}  // namespace sfr
