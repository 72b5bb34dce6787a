#pragma once

#include "sfr/grid.hpp"

namespace sfr {

// Discrete differential operators on the MAC layout. Conventions:
//  - divergence: central differences of face values, 1/h, defined on every cell.
//  - gradient: difference of the two adjacent cell values on interior faces,
//    zero on domain-boundary faces (mirror ghost). With that convention
//    divergence(gradient(s)) reproduces the 7-point Neumann Laplacian exactly.
ScalarField divergence(const StaggeredField& vel);
StaggeredField gradient(const ScalarField& s);

// Trilinear samplers. World coordinates; cell centers sit at ((i+0.5)h, ...).
// The ZeroPad variant treats cells outside the grid as 0 (outflow for
// densities); the Clamped variant clamps coordinates to the data range.
double sampleScalarZeroPad(const ScalarField& f, double px, double py, double pz);
double sampleScalarClamped(const ScalarField& f, double px, double py, double pz);

// MAC velocity at an arbitrary world point, each component interpolated on its
// own face grid with clamped coordinates.
void sampleMac(const StaggeredField& vel, double px, double py, double pz,
               double& ux, double& uy, double& uz);

// Second-order (midpoint) back-trace of a point by dt along vel.
void traceBack(const StaggeredField& vel, double dt, double px, double py, double pz,
               double& qx, double& qy, double& qz);

// Multi-scale transfer operators, factor 2 per level.
// restrictField: 8-cell (scalar) / 4-face (per component) averaging; rejects
// odd dims. prolongField: trilinear interpolation with linearly extrapolating
// boundary weights, so restrict(prolong(x)) = x for constant and linear x.
ScalarField restrictField(const ScalarField& f);
StaggeredField restrictField(const StaggeredField& f);
ScalarField prolongField(const ScalarField& f);
StaggeredField prolongField(const StaggeredField& f);

// Reductions with a fixed (sequential, index-increasing) summation order so
// results are reproducible run to run.
double fieldSum(const ScalarField& f);
double fieldMaxAbs(const ScalarField& f);
double fieldMaxAbs(const StaggeredField& f);
double fieldDot(const ScalarField& a, const ScalarField& b);
double fieldDot(const StaggeredField& a, const StaggeredField& b);
bool fieldFinite(const ScalarField& f);
bool fieldFinite(const StaggeredField& f);

}  // namespace sfr
