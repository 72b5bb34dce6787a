#include "sfr/field_ops.hpp"

#include <algorithm>
#include <cmath>

namespace sfr {

ScalarField divergence(const StaggeredField& vel) {
    const GridDims& d = vel.dims;
    ScalarField out(d);
    const double inv = 1.0 / d.h;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const double dx = vel.atX(i + 1, j, k) - vel.atX(i, j, k);
                const double dy = vel.atY(i, j + 1, k) - vel.atY(i, j, k);
                const double dz = vel.atZ(i, j, k + 1) - vel.atZ(i, j, k);
                out.at(i, j, k) = (dx + dy + dz) * inv;
            }
    return out;
}

StaggeredField gradient(const ScalarField& s) {
    const GridDims& d = s.dims;
    StaggeredField g(d);
    const double inv = 1.0 / d.h;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 1; i < d.nx; ++i)
                g.atX(i, j, k) = (s.at(i, j, k) - s.at(i - 1, j, k)) * inv;
    for (int k = 0; k < d.nz; ++k)
        for (int j = 1; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                g.atY(i, j, k) = (s.at(i, j, k) - s.at(i, j - 1, k)) * inv;
    for (int k = 1; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                g.atZ(i, j, k) = (s.at(i, j, k) - s.at(i, j, k - 1)) * inv;
    return g;
}

namespace {

struct Tap {
    int i0, j0, k0;
    double fx, fy, fz;
};

// Convert a world point to cell-center lattice coordinates and split into
// base index + fraction. No clamping here.
inline Tap cellTap(const GridDims& d, double px, double py, double pz) {
    const double cx = px / d.h - 0.5;
    const double cy = py / d.h - 0.5;
    const double cz = pz / d.h - 0.5;
    Tap t;
    const double bx = std::floor(cx), by = std::floor(cy), bz = std::floor(cz);
    t.i0 = int(bx);
    t.j0 = int(by);
    t.k0 = int(bz);
    t.fx = cx - bx;
    t.fy = cy - by;
    t.fz = cz - bz;
    return t;
}

inline double lerp3(const double v[8], double fx, double fy, double fz) {
    const double c00 = v[0] * (1 - fx) + v[1] * fx;
    const double c10 = v[2] * (1 - fx) + v[3] * fx;
    const double c01 = v[4] * (1 - fx) + v[5] * fx;
    const double c11 = v[6] * (1 - fx) + v[7] * fx;
    const double c0 = c00 * (1 - fy) + c10 * fy;
    const double c1 = c01 * (1 - fy) + c11 * fy;
    return c0 * (1 - fz) + c1 * fz;
}

// Trilinear interpolation on a raw lattice (n0,n1,n2) with clamped indices.
inline double latticeClamped(const double* data, int n0, int n1, int n2,
                             double c0, double c1, double c2) {
    c0 = std::clamp(c0, 0.0, double(n0 - 1));
    c1 = std::clamp(c1, 0.0, double(n1 - 1));
    c2 = std::clamp(c2, 0.0, double(n2 - 1));
    const double b0 = std::floor(c0), b1 = std::floor(c1), b2 = std::floor(c2);
    int i = int(b0), j = int(b1), k = int(b2);
    const double fx = c0 - b0, fy = c1 - b1, fz = c2 - b2;
    const int i1 = std::min(i + 1, n0 - 1), j1 = std::min(j + 1, n1 - 1), k1 = std::min(k + 1, n2 - 1);
    auto at = [&](int a, int b, int c) {
        return data[std::size_t(a) + std::size_t(n0) * (std::size_t(b) + std::size_t(n1) * c)];
    };
    const double v[8] = {at(i, j, k),  at(i1, j, k),  at(i, j1, k),  at(i1, j1, k),
                         at(i, j, k1), at(i1, j, k1), at(i, j1, k1), at(i1, j1, k1)};
    return lerp3(v, fx, fy, fz);
}

}  // namespace

double sampleScalarZeroPad(const ScalarField& f, double px, double py, double pz) {
    const GridDims& d = f.dims;
    const Tap t = cellTap(d, px, py, pz);
    double acc = 0.0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) {
                const int i = t.i0 + di, j = t.j0 + dj, k = t.k0 + dk;
                if (i < 0 || j < 0 || k < 0 || i >= d.nx || j >= d.ny || k >= d.nz) continue;
                const double w = (di ? t.fx : 1 - t.fx) * (dj ? t.fy : 1 - t.fy) * (dk ? t.fz : 1 - t.fz);
                acc += w * f.at(i, j, k);
            }
    return acc;
}

double sampleScalarClamped(const ScalarField& f, double px, double py, double pz) {
    const GridDims& d = f.dims;
    return latticeClamped(f.data.data(), d.nx, d.ny, d.nz,
                          px / d.h - 0.5, py / d.h - 0.5, pz / d.h - 0.5);
}

void sampleMac(const StaggeredField& vel, double px, double py, double pz,
               double& ux, double& uy, double& uz) {
    const GridDims& d = vel.dims;
    const double inv = 1.0 / d.h;
    // x faces sit at (i*h, (j+.5)h, (k+.5)h), similarly for y/z.
    ux = latticeClamped(vel.x.data(), d.nx + 1, d.ny, d.nz,
                        px * inv, py * inv - 0.5, pz * inv - 0.5);
    uy = latticeClamped(vel.y.data(), d.nx, d.ny + 1, d.nz,
                        px * inv - 0.5, py * inv, pz * inv - 0.5);
    uz = latticeClamped(vel.z.data(), d.nx, d.ny, d.nz + 1,
                        px * inv - 0.5, py * inv - 0.5, pz * inv);
}

void traceBack(const StaggeredField& vel, double dt, double px, double py, double pz,
               double& qx, double& qy, double& qz) {
    double ux, uy, uz;
    sampleMac(vel, px, py, pz, ux, uy, uz);
    const double mx = px - 0.5 * dt * ux;
    const double my = py - 0.5 * dt * uy;
    const double mz = pz - 0.5 * dt * uz;
    sampleMac(vel, mx, my, mz, ux, uy, uz);
    qx = px - dt * ux;
    qy = py - dt * uy;
    qz = pz - dt * uz;
}

ScalarField restrictField(const ScalarField& f) {
    const GridDims& d = f.dims;
    if (d.nx % 2 || d.ny % 2 || d.nz % 2)
        throw std::invalid_argument("restrictField: dims must be even");
    GridDims c{d.nx / 2, d.ny / 2, d.nz / 2, d.h * 2};
    ScalarField out(c);
    for (int k = 0; k < c.nz; ++k)
        for (int j = 0; j < c.ny; ++j)
            for (int i = 0; i < c.nx; ++i) {
                double s = 0;
                for (int dk = 0; dk < 2; ++dk)
                    for (int dj = 0; dj < 2; ++dj)
                        for (int di = 0; di < 2; ++di)
                            s += f.at(2 * i + di, 2 * j + dj, 2 * k + dk);
                out.at(i, j, k) = s * 0.125;
            }
    return out;
}

StaggeredField restrictField(const StaggeredField& f) {
    const GridDims& d = f.dims;
    if (d.nx % 2 || d.ny % 2 || d.nz % 2)
        throw std::invalid_argument("restrictField: dims must be even");
    GridDims c{d.nx / 2, d.ny / 2, d.nz / 2, d.h * 2};
    StaggeredField out(c);
    // A coarse face averages the 4 fine faces on the matching plane.
    for (int k = 0; k < c.nz; ++k)
        for (int j = 0; j < c.ny; ++j)
            for (int i = 0; i <= c.nx; ++i)
                out.atX(i, j, k) = 0.25 * (f.atX(2 * i, 2 * j, 2 * k) + f.atX(2 * i, 2 * j + 1, 2 * k) +
                                           f.atX(2 * i, 2 * j, 2 * k + 1) + f.atX(2 * i, 2 * j + 1, 2 * k + 1));
    for (int k = 0; k < c.nz; ++k)
        for (int j = 0; j <= c.ny; ++j)
            for (int i = 0; i < c.nx; ++i)
                out.atY(i, j, k) = 0.25 * (f.atY(2 * i, 2 * j, 2 * k) + f.atY(2 * i + 1, 2 * j, 2 * k) +
                                           f.atY(2 * i, 2 * j, 2 * k + 1) + f.atY(2 * i + 1, 2 * j, 2 * k + 1));
    for (int k = 0; k <= c.nz; ++k)
        for (int j = 0; j < c.ny; ++j)
            for (int i = 0; i < c.nx; ++i)
                out.atZ(i, j, k) = 0.25 * (f.atZ(2 * i, 2 * j, 2 * k) + f.atZ(2 * i + 1, 2 * j, 2 * k) +
                                           f.atZ(2 * i, 2 * j + 1, 2 * k) + f.atZ(2 * i + 1, 2 * j + 1, 2 * k));
    return out;
}

namespace {

// Per-axis prolongation weights for cell-centered data: fine cell i' samples
// coarse coordinate (i'+0.5)/2 - 0.5. Boundary pairs extrapolate linearly
// (weights outside [0,1]) so linear fields prolong exactly.
inline void cellWeights(int fi, int nCoarse, int& a, int& b, double& wa, double& wb) {
    const double c = (fi + 0.5) * 0.5 - 0.5;
    double base = std::floor(c);
    a = int(base);
    double f = c - base;
    if (a < 0) {
        a = 0;
        f = c;  // extrapolate below: weights (1-c, c) on cells 0,1 with c = -0.25
    } else if (a >= nCoarse - 1) {
        f = c - (nCoarse - 2);
        a = nCoarse - 2;
    }
    b = a + 1;
    wa = 1.0 - f;
    wb = f;
}

// For face-normal axes: fine plane p' maps to coarse plane p'/2 exactly
// (integer planes interpolate linearly, no extrapolation needed).
inline void planeWeights(int fp, int nCoarsePlanes, int& a, int& b, double& wa, double& wb) {
    const double c = fp * 0.5;
    double base = std::floor(c);
    a = int(base);
    double f = c - base;
    if (a >= nCoarsePlanes - 1) {
        a = nCoarsePlanes - 2;
        f = c - a;
    }
    b = a + 1;
    wa = 1.0 - f;
    wb = f;
}

}  // namespace

ScalarField prolongField(const ScalarField& f) {
    const GridDims& d = f.dims;
    GridDims fd{d.nx * 2, d.ny * 2, d.nz * 2, d.h * 0.5};
    ScalarField out(fd);
    for (int k = 0; k < fd.nz; ++k) {
        int ka, kb;
        double wka, wkb;
        cellWeights(k, d.nz, ka, kb, wka, wkb);
        for (int j = 0; j < fd.ny; ++j) {
            int ja, jb;
            double wja, wjb;
            cellWeights(j, d.ny, ja, jb, wja, wjb);
            for (int i = 0; i < fd.nx; ++i) {
                int ia, ib;
                double wia, wib;
                cellWeights(i, d.nx, ia, ib, wia, wib);
                out.at(i, j, k) =
                    wka * (wja * (wia * f.at(ia, ja, ka) + wib * f.at(ib, ja, ka)) +
                           wjb * (wia * f.at(ia, jb, ka) + wib * f.at(ib, jb, ka))) +
                    wkb * (wja * (wia * f.at(ia, ja, kb) + wib * f.at(ib, ja, kb)) +
                           wjb * (wia * f.at(ia, jb, kb) + wib * f.at(ib, jb, kb)));
            }
        }
    }
    return out;
}

StaggeredField prolongField(const StaggeredField& f) {
    const GridDims& d = f.dims;
    GridDims fd{d.nx * 2, d.ny * 2, d.nz * 2, d.h * 0.5};
    StaggeredField out(fd);
    for (int k = 0; k < fd.nz; ++k) {
        int ka, kb;
        double wka, wkb;
        cellWeights(k, d.nz, ka, kb, wka, wkb);
        for (int j = 0; j < fd.ny; ++j) {
            int ja, jb;
            double wja, wjb;
            cellWeights(j, d.ny, ja, jb, wja, wjb);
            for (int i = 0; i <= fd.nx; ++i) {
                int ia, ib;
                double wia, wib;
                planeWeights(i, d.nx + 1, ia, ib, wia, wib);
                out.atX(i, j, k) =
                    wka * (wja * (wia * f.atX(ia, ja, ka) + wib * f.atX(ib, ja, ka)) +
                           wjb * (wia * f.atX(ia, jb, ka) + wib * f.atX(ib, jb, ka))) +
                    wkb * (wja * (wia * f.atX(ia, ja, kb) + wib * f.atX(ib, ja, kb)) +
                           wjb * (wia * f.atX(ia, jb, kb) + wib * f.atX(ib, jb, kb)));
            }
        }
    }
    for (int k = 0; k < fd.nz; ++k) {
        int ka, kb;
        double wka, wkb;
        cellWeights(k, d.nz, ka, kb, wka, wkb);
        for (int j = 0; j <= fd.ny; ++j) {
            int ja, jb;
            double wja, wjb;
            planeWeights(j, d.ny + 1, ja, jb, wja, wjb);
            for (int i = 0; i < fd.nx; ++i) {
                int ia, ib;
                double wia, wib;
                cellWeights(i, d.nx, ia, ib, wia, wib);
                out.atY(i, j, k) =
                    wka * (wja * (wia * f.atY(ia, ja, ka) + wib * f.atY(ib, ja, ka)) +
                           wjb * (wia * f.atY(ia, jb, ka) + wib * f.atY(ib, jb, ka))) +
                    wkb * (wja * (wia * f.atY(ia, ja, kb) + wib * f.atY(ib, ja, kb)) +
                           wjb * (wia * f.atY(ia, jb, kb) + wib * f.atY(ib, jb, kb)));
            }
        }
    }
    for (int k = 0; k <= fd.nz; ++k) {
        int ka, kb;
        double wka, wkb;
        planeWeights(k, d.nz + 1, ka, kb, wka, wkb);
        for (int j = 0; j < fd.ny; ++j) {
            int ja, jb;
            double wja, wjb;
            cellWeights(j, d.ny, ja, jb, wja, wjb);
            for (int i = 0; i < fd.nx; ++i) {
                int ia, ib;
                double wia, wib;
                cellWeights(i, d.nx, ia, ib, wia, wib);
                out.atZ(i, j, k) =
                    wka * (wja * (wia * f.atZ(ia, ja, ka) + wib * f.atZ(ib, ja, ka)) +
                           wjb * (wia * f.atZ(ia, jb, ka) + wib * f.atZ(ib, jb, ka))) +
                    wkb * (wja * (wia * f.atZ(ia, ja, kb) + wib * f.atZ(ib, ja, kb)) +
                           wjb * (wia * f.atZ(ia, jb, kb) + wib * f.atZ(ib, jb, kb)));
            }
        }
    }
    return out;
}

double fieldSum(const ScalarField& f) {
    double s = 0;
    for (double v : f.data) s += v;
    return s;
}

double fieldMaxAbs(const ScalarField& f) {
    double m = 0;
    for (double v : f.data) m = std::max(m, std::abs(v));
    return m;
}

double fieldMaxAbs(const StaggeredField& f) {
    double m = 0;
    for (double v : f.x) m = std::max(m, std::abs(v));
    for (double v : f.y) m = std::max(m, std::abs(v));
    for (double v : f.z) m = std::max(m, std::abs(v));
    return m;
}

double fieldDot(const ScalarField& a, const ScalarField& b) {
    double s = 0;
    for (std::size_t c = 0; c < a.data.size(); ++c) s += a.data[c] * b.data[c];
    return s;
}

double fieldDot(const StaggeredField& a, const StaggeredField& b) {
    double s = 0;
    for (std::size_t c = 0; c < a.x.size(); ++c) s += a.x[c] * b.x[c];
    for (std::size_t c = 0; c < a.y.size(); ++c) s += a.y[c] * b.y[c];
    for (std::size_t c = 0; c < a.z.size(); ++c) s += a.z[c] * b.z[c];
    return s;
}

bool fieldFinite(const ScalarField& f) {
    for (double v : f.data)
        if (!std::isfinite(v)) return false;
    return true;
}

bool fieldFinite(const StaggeredField& f) {
    for (double v : f.x)
        if (!std::isfinite(v)) return false;
    for (double v : f.y)
        if (!std::isfinite(v)) return false;
    for (double v : f.z)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace sfr
