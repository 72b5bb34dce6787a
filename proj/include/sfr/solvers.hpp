#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sfr/sparse.hpp"

namespace sfr {

// Running tallies the pipeline reports per frame.
struct SolverDiag {
    long cglsCalls = 0;
    long cglsIterations = 0;
    long cgCalls = 0;
    long cgIterations = 0;
    long pressureSolves = 0;
    long pdLoops = 0;
};

// Smoothness (Laplacian) and kinetic (identity) weights of a regularizer.
struct RegularizerSpec {
    double smoothWeight = 0;
    double kineticWeight = 0;
};

// Per-unknown-class weights.
inline constexpr RegularizerSpec kVelocityReg{1e-1, 5e-4};
inline constexpr RegularizerSpec kDensityReg{6e-1, 5e-2};
inline constexpr RegularizerSpec kInflowReg{5e-3, 1e-2};

// R = smoothWeight * L + kineticWeight * I with L the 7-point Neumann
// Laplacian; symmetric positive semi-definite.
SparseOperator buildRegularizer(const RegularizerSpec& spec, const GridDims& dims);
SparseOperator buildLatticeRegularizer(const RegularizerSpec& spec, int n0, int n1, int n2, double h);
// Regularizer restricted to masked cells (Neumann at the mask boundary).
SparseOperator buildMaskedRegularizer(const RegularizerSpec& spec, const GridDims& dims,
                                      const Mask& mask, const std::vector<std::int32_t>& cellOf);

struct CglsResult {
    Vec x;
    int iterations = 0;
    double relResidual = 0;  // |r_k| / |r_0|
    bool converged = true;
    std::vector<double> residualNorms;  // |r_k| per iteration, starting at |r_0|
};

// Regularized CGLS on the normal equations
//   (PᵀP + R + σI) x = σ b_PD − Pᵀ b,
// applying P and Pᵀ separately each iteration; PᵀP is never formed. R may be
// null (treated as 0), b_PD may be null (treated as 0). Stops when
// |r_k|/|r_0| <= tol or maxIter. A non-positive step denominator with a
// non-negligible residual throws; running out of iterations flags the result.
CglsResult solveCGLSReg(const LinearOperator& P, const SparseOperator* R, std::span<const double> b,
                        const Vec* bPd, double sigma, double tol, int maxIter,
                        const Vec* x0 = nullptr, SolverDiag* diag = nullptr);

enum class CgStop {
    RelativeL2,   // |Ax-b| / |b| <= tol
    AbsoluteMax,  // max|Ax-b| <= tol
};

struct CgResult {
    Vec x;
    int iterations = 0;
    double residual = 0;
    bool converged = true;
};

// Plain conjugate gradient for symmetric positive (semi-)definite A.
// `applyA` computes y = A x. Non-convergence is flagged, not thrown.
CgResult solveCG(const std::function<void(std::span<const double>, std::span<double>)>& applyA,
                 std::span<const double> b, double tol, int maxIter,
                 CgStop stop = CgStop::RelativeL2, const Vec* x0 = nullptr,
                 SolverDiag* diag = nullptr);
CgResult solveCG(const LinearOperator& A, std::span<const double> b, double tol, int maxIter,
                 CgStop stop = CgStop::RelativeL2, const Vec* x0 = nullptr,
                 SolverDiag* diag = nullptr);

// Largest-singular-value estimate of an operator by power iteration on AᵀA.
double estimateOperatorNorm(const LinearOperator& A, int iterations = 20, unsigned seed = 1234);

// First-order primal-dual parameters; convergence needs sigma*tau*|K|^2 <= 1.
struct PDParams {
    double sigma = 0.1;
    double tau = 10.0;
    double theta = 1.0;
    int iterations = 10;

    static PDParams fromOperatorNorm(double norm, int iterations = 10);
};

// Componentwise max(x, -floor), so that x + floor >= 0.
Vec projectNonNeg(Vec x, std::span<const double> floor);

// The shared PD loop of the reconstruction solvers:
//   v    = x^{k-1} + sigma*y^{k-1}
//   x^k  = v − sigma * proxData(v)
//   z^k  = proxConstraint(z^{k-1} − tau*x^k)
//   y^k  = z^k + theta*(z^k − z^{k-1})
// Returns the primal z after params.iterations. `monitor`, when given, sees
// every primal iterate (iteration index, z) and may throw to abort.
struct PdResult {
    Vec z;
    Vec x;
};
using PdMonitor = std::function<void(int, const Vec&)>;
PdResult pdIterate(const std::function<Vec(const Vec&)>& proxData,
                   const std::function<Vec(Vec)>& proxConstraint, const PDParams& params,
                   Vec x0, Vec z0, SolverDiag* diag = nullptr, const PdMonitor* monitor = nullptr);

}  // namespace sfr
