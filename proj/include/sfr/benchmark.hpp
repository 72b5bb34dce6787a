#pragma once

#include "sfr/pipeline.hpp"

namespace sfr {

// Pinhole views on a frontal arc at domain-center height, all aimed at the
// domain center.
std::vector<PinholeCamera> makeArcCameras(const ReconConfig& cfg);

// SimParams for a benchmark instance; `variant` perturbs the scene and
// `gtScale` (1 or 2) switches to a finer ground-truth grid.
struct SceneSetup {
    GridDims dims;
    int inflowSlab = 0;
    SimParams params;
};
SceneSetup makeScene(const ReconConfig& cfg, const std::string& variant, int instance);

// Forward-simulate the scene and write density/velocity volumes per frame.
void simulateScene(const SceneSetup& scene, int frames, const std::string& dir);

// Render stored volumes to per-view images (visible window from cfg).
void renderScene(const ReconConfig& cfg, const std::vector<CameraView>& cameras,
                 const std::string& dir, int frames);

// Highest cell row carrying density above `threshold`, -1 if none.
int plumeTopRow(const ScalarField& density, double threshold);

struct BenchInstance {
    EvalTables tables;
    double meanDensity = 0, meanVelocity = 0, meanImage = 0;
};

struct BenchResult {
    std::vector<BenchInstance> instances;
    double meanDensity = 0, meanVelocity = 0, meanImage = 0;
    double stdDensity = 0, stdVelocity = 0, stdImage = 0;
    double wallSeconds = 0;
};

// The synthetic evaluation harness: simulate `instances` noise instances of
// the variant scene, render, reconstruct from the images alone, and emit
// per-frame PSNR tables plus a merged mean/std summary under cfg.outDir.
BenchResult runSyntheticBenchmark(const ReconConfig& cfg);

void writeBenchSummary(const std::string& dir, const BenchResult& res);

}  // namespace sfr
