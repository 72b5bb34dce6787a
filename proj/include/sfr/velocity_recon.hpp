#pragma once

#include <memory>

#include "sfr/inflow.hpp"

namespace sfr {

// Velocity prediction: self-advect, make divergence-free, then add the
// explicit viscosity increment nu*dt*Lap(uPrev) (the increment comes after the
// projection).
StaggeredField predictVelocity(const StaggeredField& uPrev, const PressureSolver& project,
                               double nu, double dt, double pressureTol, int pressureMaxIter,
                               SolverDiag* diag = nullptr);

// Per-level solver context. Static pieces (projection operator, pressure
// solvers, masks, regularizer weights) persist across a sequence; the
// tomography problem and cached density target are per frame.
struct ReconLevel {
    GridDims dims;
    int inflowSlab = 0;
    DomainMasks masks;
    ProjectionOperator P;
    std::unique_ptr<PressureSolver> freeProject;
    std::unique_ptr<PressureSolver> inflowProject;

    RegularizerSpec velReg = kVelocityReg;
    RegularizerSpec denReg = kDensityReg;
    RegularizerSpec inflowReg = kInflowReg;
    PDParams pd;
    double cglsTol = 1e-4;
    int cglsMaxIter = 1000;
    double cgTol = 1e-4;
    int cgMaxIter = 1000;
    double pressureTol = 5e-5;
    int pressureMaxIter = 4000;
    double dt = 1.0 / 60.0;
    double inflowSpeed = 0.3;
    bool ablationVb = false;
    HullParams hullParams;

    // per-frame state
    TomographyProblem tomo;
    ScalarField densityTarget;
    bool frameReady = false;

    void prepareFrame(const ImageSet& images, SolverDiag* diag = nullptr);
    InflowEnv inflowEnv() const;
};

// Coarse-to-fine stack; level 0 is the finest. Descends by factor 2 while the
// dims stay even and at least 16 cells on the smallest axis.
struct ReconStack {
    std::vector<std::unique_ptr<ReconLevel>> levels;
};

ReconStack buildReconStack(const std::vector<CameraView>& cameras, const GridDims& dims,
                           int inflowSlab, double projectionStepScale = 0.5);

// Single-scale residual velocity: ten PD iterations coupling the linearized
// transport system on (u, phi) with the inflow/divergence-free projection on
// the velocity and the tomographic correction on the density.
StaggeredField reconVel(ReconLevel& level, const StaggeredField& uP, const ScalarField& phiP,
                        const ImageSet& images, SolverDiag* diag = nullptr);

// Multi-scale driver: solve the restricted problem, lift its residual
// velocity, refresh inflow and density prediction, then solve the fine scale.
StaggeredField reconVelMS(ReconStack& stack, std::size_t levelIdx, const StaggeredField& uP,
                          const ScalarField& phiP, const ScalarField& phiPrev,
                          const ImageSet& images, SolverDiag* diag = nullptr);

}  // namespace sfr
