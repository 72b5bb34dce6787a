#pragma once

#include <cstdint>
#include <string>

#include "sfr/grid.hpp"

namespace sfr {

// All tunables of the pipeline, mapped 1:1 onto the sectioned key=value config
// file. Unknown keys are rejected at parse time.
struct ReconConfig {
    // [grid]
    int nx = 50, ny = 88, nz = 50;
    double h = 0.9 / 88.0;
    int inflowSlab = 4;

    // [time]
    double dt = 1.0 / 60.0;
    int frames = 60;

    // [cameras] (file wins over the generated arc when set)
    std::string cameraFile;
    int views = 5;
    int imageWidth = 48;
    int imageHeight = 84;
    double arcDegrees = 120.0;
    double cameraDistance = 1.6;  // m from domain center
    double fovYDegrees = 38.0;

    // [sim] forward ground-truth scene
    double viscosity = 1.516e-5;
    double buoyancy = 0.11;
    double sourceRadius = 7.0;  // cells
    double sourceDensity = 1.0;
    double noiseAmp = 0.3;
    std::uint64_t seed = 1;

    // [recon]
    double inflowSpeed = 0.0;  // m/s; 0 = estimate from the image sequence
    int pdIterations = 10;
    double cglsTol = 1e-4;
    int cglsMaxIter = 1000;
    double cgTol = 1e-4;
    int cgMaxIter = 1000;
    double pressureTol = 1e-4;
    int pressureMaxIter = 4000;
    double projectionStep = 0.5;  // in cells, <= 0.5
    std::string ablation = "full";  // full | vb
    double hullPixelFloor = 1e-3;
    double hullWeightKeep = 1e-4;
    double hullWeightExclude = 1e-2;

    // [reg]
    double velocitySmooth = 1e-1, velocityKinetic = 5e-4;
    double densitySmooth = 6e-1, densityKinetic = 5e-2;
    double inflowSmooth = 5e-3, inflowKinetic = 1e-2;

    // [bench]
    int instances = 5;
    std::string variant = "base";  // base | wide-inflow | buoyant-1.5x | double-res-truth

    // [output]
    std::string outDir = "out";

    GridDims gridDims() const { return GridDims{nx, ny, nz, h}; }
    void validate() const;
    // Canonical text rendering; also the basis of the checkpoint hash.
    std::string canonicalText() const;
    std::uint64_t hash() const;
};

ReconConfig loadConfig(const std::string& path);
void saveConfig(const std::string& path, const ReconConfig& cfg);

// "section.key=value" override, same key set as the file.
void applyOverride(ReconConfig& cfg, const std::string& assignment);

}  // namespace sfr
