#pragma once

#include "sfr/field_ops.hpp"
#include "sfr/solvers.hpp"

namespace sfr {

// Forward-simulation parameters. Source geometry is in cell units; the disc
// sits at the domain bottom inside the inflow slab.
struct SimParams {
    double dt = 1.0 / 60.0;
    double viscosity = 1.516e-5;      // m^2/s
    double buoyancyAlpha = 0.11;      // m/s^2 per unit density
    std::uint64_t inflowNoiseSeed = 0;
    double inflowNoiseAmp = 0.3;      // multiplicative, (1 + amp*xi), xi in [-1,1]
    double sourceCenterX = 0;         // cells; <=0 means domain center
    double sourceCenterZ = 0;
    double sourceRadius = 7.0;        // cells
    int sourceHeight = 4;             // rows filled by the source (inflow slab)
    double sourceDensity = 1.0;
    double pressureTol = 1e-4;        // max-norm of post-projection divergence
    int pressureMaxIter = 4000;
};

struct SimState {
    ScalarField density;
    StaggeredField vel;
};

// Semi-Lagrangian advection, second-order midpoint back-trace, trilinear
// interpolation. Scalars treat the outside as 0 (outflow); velocity samples
// clamp to the boundary values.
ScalarField advect(const ScalarField& q, const StaggeredField& vel, double dt);
StaggeredField advect(const StaggeredField& q, const StaggeredField& vel, double dt);

// Explicit diffusion step v + nu*dt*Lap(v) per component, Neumann boundaries.
// Rejects nu*dt/h^2 >= 0.5.
StaggeredField addViscosity(const StaggeredField& vel, double nu, double dt);

// Boussinesq buoyancy: interior y-faces += dt*alpha*(face-averaged density).
StaggeredField addBuoyancy(const StaggeredField& vel, const ScalarField& density, double alpha,
                           double dt);

// Poisson-based projection onto divergence-free fields. Boundary conditions:
// Neumann at the floor (y=0), free outflow (p=0 ghost) at the sides and top.
// Faces touching a cell of `inflowCells` (when given) are treated as
// prescribed: they keep their velocity and get Neumann rows, which is how the
// residual-velocity solve pins the inflow boundary.
class PressureSolver {
public:
    explicit PressureSolver(const GridDims& dims, const Mask* inflowCells = nullptr);

    StaggeredField project(const StaggeredField& vel, double tolDivMax, int maxIter,
                           SolverDiag* diag = nullptr, Vec* warmPressure = nullptr) const;

    const GridDims& dims() const { return dims_; }
    std::size_t unknowns() const { return nActive_; }

private:
    GridDims dims_;
    Mask fixedX_, fixedY_, fixedZ_;       // prescribed faces per component
    std::vector<std::int32_t> cellOf_;    // cell -> active index, -1 excluded
    std::vector<std::uint32_t> activeCells_;
    std::size_t nActive_ = 0;
    SparseOperator lap_;
};

// One-shot projection with default boundary handling (floor wall, open sides
// and top). Throws if the divergence target is not reached.
StaggeredField pressureProject(const StaggeredField& vel, double solverTol,
                               int maxIter = 4000, SolverDiag* diag = nullptr);

// Overwrite the source disc with seeded noisy density. Deterministic in
// (seed, frame) regardless of call order.
void injectSource(ScalarField& density, const SimParams& p, int frame);

// One simulator step: advect velocity, project, viscosity, buoyancy, inject
// source density, advect density.
SimState stepForward(const SimState& state, const SimParams& params, int frame,
                     const PressureSolver& pressure, SolverDiag* diag = nullptr);

}  // namespace sfr
