#include "sfr/solvers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sfr {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double maxAbs(std::span<const double> a) {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

void axpy(double s, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

}  // namespace

SparseOperator buildRegularizer(const RegularizerSpec& spec, const GridDims& dims) {
    return buildLatticeRegularizer(spec, dims.nx, dims.ny, dims.nz, dims.h);
}

SparseOperator buildLatticeRegularizer(const RegularizerSpec& spec, int n0, int n1, int n2,
                                       double h) {
    if (spec.smoothWeight < 0 || spec.kineticWeight < 0)
        throw std::invalid_argument("regularizer weights must be >= 0");
    SparseOperator L = buildLatticeLaplacian(n0, n1, n2, h);
    // Scale the Laplacian rows and bump the diagonal.
    std::vector<std::int64_t> rowPtr(L.rowPtr().begin(), L.rowPtr().end());
    std::vector<std::uint32_t> col(L.colIdx().begin(), L.colIdx().end());
    std::vector<double> val(L.values().begin(), L.values().end());
    for (double& v : val) v *= spec.smoothWeight;
    for (std::size_t r = 0; r < L.rows(); ++r)
        for (std::int64_t e = rowPtr[r]; e < rowPtr[r + 1]; ++e)
            if (col[e] == r) val[e] += spec.kineticWeight;
    return SparseOperator(L.rows(), std::move(rowPtr), std::move(col), std::move(val));
}

SparseOperator buildMaskedRegularizer(const RegularizerSpec& spec, const GridDims& dims,
                                      const Mask& mask, const std::vector<std::int32_t>& cellOf) {
    SparseOperator L = buildMaskedLaplacian(dims, mask, cellOf);
    std::vector<std::int64_t> rowPtr(L.rowPtr().begin(), L.rowPtr().end());
    std::vector<std::uint32_t> col(L.colIdx().begin(), L.colIdx().end());
    std::vector<double> val(L.values().begin(), L.values().end());
    for (double& v : val) v *= spec.smoothWeight;
    for (std::size_t r = 0; r < L.rows(); ++r)
        for (std::int64_t e = rowPtr[r]; e < rowPtr[r + 1]; ++e)
            if (col[e] == r) val[e] += spec.kineticWeight;
    return SparseOperator(L.rows(), std::move(rowPtr), std::move(col), std::move(val));
}

CglsResult solveCGLSReg(const LinearOperator& P, const SparseOperator* R, std::span<const double> b,
                        const Vec* bPd, double sigma, double tol, int maxIter, const Vec* x0,
                        SolverDiag* diag) {
    const std::size_t n = P.cols();
    const std::size_t m = P.rows();
    if (b.size() != m) throw std::invalid_argument("solveCGLSReg: b size mismatch");
    if (R && (R->rows() != n)) throw std::invalid_argument("solveCGLSReg: R size mismatch");
    if (bPd && bPd->size() != n) throw std::invalid_argument("solveCGLSReg: b_PD size mismatch");
    if (sigma < 0) throw std::invalid_argument("solveCGLSReg: sigma must be >= 0");

    CglsResult res;
    res.x = x0 ? *x0 : Vec(n, 0.0);
    Vec r(n, 0.0);
    Vec img(m, 0.0);
    Vec tmp(n, 0.0);

    // r0 = sigma*b_PD − Pᵀb − PᵀP x0 − (R + sigma I) x0
    if (bPd) axpy(sigma, *bPd, r);
    P.applyTranspose(b, tmp);
    axpy(-1.0, tmp, r);
    bool x0nonzero = false;
    for (double v : res.x)
        if (v != 0.0) {
            x0nonzero = true;
            break;
        }
    if (x0nonzero) {
        P.apply(res.x, img);
        P.applyTranspose(img, tmp);
        axpy(-1.0, tmp, r);
        if (R) R->applyAdd(res.x, r, -1.0);
        if (sigma > 0) axpy(-sigma, res.x, r);
    }

    Vec p = r;
    Vec s(n, 0.0);
    double rr = dot(r, r);
    const double rr0 = rr;
    res.residualNorms.push_back(std::sqrt(rr));
    if (rr0 == 0.0) {
        res.iterations = 0;
        res.relResidual = 0;
        if (diag) diag->cglsCalls++;
        return res;
    }

    int k = 0;
    while (k < maxIter) {
        // s = (PᵀP + R + sigma I) p, without forming PᵀP
        P.apply(p, img);
        P.applyTranspose(img, s);
        if (R) R->applyAdd(p, s, 1.0);
        if (sigma > 0) axpy(sigma, p, s);
        const double denom = dot(p, s);
        if (denom <= 0.0) {
            if (std::sqrt(rr / rr0) <= tol) break;
            throw std::runtime_error("solveCGLSReg: step breakdown (non-positive curvature)");
        }
        const double alpha = rr / denom;
        axpy(alpha, p, res.x);
        axpy(-alpha, s, r);
        const double rrNew = dot(r, r);
        const double beta = rrNew / rr;
        rr = rrNew;
        ++k;
        res.residualNorms.push_back(std::sqrt(rr));
        if (std::sqrt(rr / rr0) <= tol) break;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    res.iterations = k;
    res.relResidual = std::sqrt(rr / rr0);
    res.converged = res.relResidual <= tol;
    if (diag) {
        diag->cglsCalls++;
        diag->cglsIterations += k;
    }
    return res;
}

CgResult solveCG(const std::function<void(std::span<const double>, std::span<double>)>& applyA,
                 std::span<const double> b, double tol, int maxIter, CgStop stop, const Vec* x0,
                 SolverDiag* diag) {
    const std::size_t n = b.size();
    CgResult res;
    res.x = x0 ? *x0 : Vec(n, 0.0);
    Vec r(b.begin(), b.end());
    Vec ax(n, 0.0);
    bool x0nonzero = false;
    if (x0)
        for (double v : res.x)
            if (v != 0.0) {
                x0nonzero = true;
                break;
            }
    if (x0nonzero) {
        applyA(res.x, ax);
        for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
    }
    const double bNorm = norm2(b);
    auto measure = [&]() { return stop == CgStop::RelativeL2
                                      ? (bNorm > 0 ? norm2(r) / bNorm : norm2(r))
                                      : maxAbs(r); };
    double m = measure();
    if (m <= tol) {
        res.residual = m;
        if (diag) diag->cgCalls++;
        return res;
    }
    Vec p = r;
    Vec s(n, 0.0);
    double rr = dot(r, r);
    int k = 0;
    while (k < maxIter) {
        applyA(p, s);
        const double denom = dot(p, s);
        if (denom <= 0.0) break;  // semi-definite breakdown; return best so far
        const double alpha = rr / denom;
        axpy(alpha, p, res.x);
        axpy(-alpha, s, r);
        const double rrNew = dot(r, r);
        const double beta = rrNew / rr;
        rr = rrNew;
        ++k;
        m = measure();
        if (m <= tol) break;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    res.iterations = k;
    res.residual = m;
    res.converged = m <= tol;
    if (diag) {
        diag->cgCalls++;
        diag->cgIterations += k;
    }
    return res;
}

CgResult solveCG(const LinearOperator& A, std::span<const double> b, double tol, int maxIter,
                 CgStop stop, const Vec* x0, SolverDiag* diag) {
    return solveCG([&A](std::span<const double> x, std::span<double> y) { A.apply(x, y); }, b, tol,
                   maxIter, stop, x0, diag);
}

double estimateOperatorNorm(const LinearOperator& A, int iterations, unsigned seed) {
    const std::size_t n = A.cols();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec v(n);
    for (double& x : v) x = uni(rng);
    Vec av(A.rows());
    Vec atv(n);
    double lambda = 0;
    for (int it = 0; it < iterations; ++it) {
        const double nv = norm2(v);
        if (nv == 0) return 0;
        for (double& x : v) x /= nv;
        A.apply(v, av);
        A.applyTranspose(av, atv);
        lambda = dot(v, atv);  // Rayleigh quotient for AᵀA
        v = atv;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

PDParams PDParams::fromOperatorNorm(double norm, int iterations) {
    // A weak prox (small sigma) paired with a long primal step keeps
    // sigma*tau*|K|^2 = 1 and converges in the ten-iteration budget; symmetric
    // steps need far more iterations.
    PDParams p;
    const double n = std::max(norm, 1e-12);
    p.sigma = 0.1 / n;
    p.tau = 10.0 / n;
    p.theta = 1.0;
    p.iterations = iterations;
    return p;
}

Vec projectNonNeg(Vec x, std::span<const double> floor) {
    if (x.size() != floor.size()) throw std::invalid_argument("projectNonNeg: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(x[i], -floor[i]);
    return x;
}

PdResult pdIterate(const std::function<Vec(const Vec&)>& proxData,
                   const std::function<Vec(Vec)>& proxConstraint, const PDParams& params, Vec x0,
                   Vec z0, SolverDiag* diag, const PdMonitor* monitor) {
    const std::size_t n = z0.size();
    assert(x0.size() == n);
    Vec x = std::move(x0);
    Vec z = std::move(z0);
    Vec y = z;
    Vec v(n);
    for (int k = 0; k < params.iterations; ++k) {
        for (std::size_t i = 0; i < n; ++i) v[i] = x[i] + params.sigma * y[i];
        const Vec w = proxData(v);
        for (std::size_t i = 0; i < n; ++i) x[i] = v[i] - params.sigma * w[i];
        Vec cand(n);
        for (std::size_t i = 0; i < n; ++i) cand[i] = z[i] - params.tau * x[i];
        Vec zNew = proxConstraint(std::move(cand));
        for (std::size_t i = 0; i < n; ++i) y[i] = zNew[i] + params.theta * (zNew[i] - z[i]);
        z = std::move(zNew);
        if (monitor && *monitor) (*monitor)(k, z);
    }
    if (diag) diag->pdLoops++;
    return PdResult{std::move(z), std::move(x)};
}

}  // namespace sfr
