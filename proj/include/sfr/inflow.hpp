#pragma once

#include "sfr/sim.hpp"
#include "sfr/tomography.hpp"

namespace sfr {

struct TraceResult {
    Mask traceTarget;  // visible cells whose back-trace samples the inflow slab
    Mask traceSource;  // inflow cells those traces touch
    std::size_t targetCount = 0;
    std::size_t sourceCount = 0;
};

// Back-trace every visible cell center with the advection trace; cells whose
// interpolation stencil touches the inflow slab with positive weight form the
// target region, the touched inflow cells form the source region.
TraceResult traceRegions(const StaggeredField& vel, const DomainMasks& masks, double dt);

// Per-cell share d_e of the density discrepancy outside the trace-target
// region, proportional to the (offset-shifted) residual target there. Falls
// back to an equal split when the shifted sum vanishes. Values on traceTarget
// cells, zero elsewhere.
ScalarField computeTargetDiscrepancy(const ScalarField& dPhiTar, const DomainMasks& masks,
                                     const TraceResult& regions);

// Everything estimInfl needs besides its algorithmic inputs. `cachedTarget`
// short-circuits the density-target tomography when the caller already solved
// it for this frame (the target does not depend on the velocity).
struct InflowEnv {
    const DomainMasks* masks = nullptr;
    const TomographyProblem* tomo = nullptr;
    const ScalarField* cachedTarget = nullptr;
    RegularizerSpec reg = kInflowReg;
    PDParams pd;
    double cglsTol = 1e-4;
    int cglsMaxIter = 1000;
    double dt = 1.0 / 60.0;
};

// Estimate the unseen inflow density so that advecting previous + inflow
// density matches the image-prescribed target mass. Returns a field supported
// on the inflow slab with phiPrev + result >= 0 there; zero when no visible
// cell back-traces into the slab.
ScalarField estimInfl(const InflowEnv& env, const ImageSet& images, const ScalarField& phiPrev,
                      const StaggeredField& vel, SolverDiag* diag = nullptr);

}  // namespace sfr
