#pragma once

#include <limits>
#include <optional>

#include "sfr/config.hpp"
#include "sfr/velocity_recon.hpp"
#include "sfr/volume_io.hpp"

namespace sfr {

// 10*log10(peak^2 / MSE); +inf for identical inputs.
double psnr(std::span<const double> a, std::span<const double> b, double peak);
double psnr(const ScalarField& a, const ScalarField& b, double peak);
double psnr(const StaggeredField& a, const StaggeredField& b, double peak);
double psnr(const ImageSet& a, const ImageSet& b, double peak);

// File naming shared by all subcommands.
std::string densityPath(const std::string& dir, int frame);
std::string velocityPath(const std::string& dir, int frame);
std::string inflowPath(const std::string& dir, int frame);
std::string imagePath(const std::string& dir, int view, int frame);

struct FrameDiag {
    int index = 0;
    double wallMs = 0;
    double divMax = 0;        // of the stored velocity
    double minDensity = 0;    // of the stored density
    double imageResidual = 0; // |P phi - i|_2 / |i|_2
    SolverDiag solver;
};

struct FrameState {
    int index = 0;
    ScalarField density;
    ScalarField inflowDensity;
    StaggeredField vel;
    ImageSet rendered;
    FrameDiag diag;
};

// Sequential image source: frame index -> per-view images.
using ImageSequence = std::function<ImageSet(int)>;

// Estimate the constant upward inflow speed from the plume-top rise in the
// first view over frames 10..30 (or what the sequence has), using the view's
// angular resolution at the domain-center depth.
double estimateInflowSpeed(const ImageSequence& images, int frameCount, const CameraView& view0,
                           const GridDims& dims, double dt);

struct ReconResult {
    int framesDone = 0;
    std::vector<FrameDiag> diags;
    double inflowSpeed = 0;
};

// Full reconstruction: u0 = 0, phi0 from plain tomography, then per frame
// predict / estimate inflow / residual velocity / align / re-estimate inflow /
// advect. Frames are written to outDir incrementally with a manifest so an
// interrupted run resumes bit-identically.
ReconResult reconVelDen(const ImageSequence& images, int frameCount,
                        const std::vector<CameraView>& cameras, const ReconConfig& cfg,
                        const std::string& outDir, bool resume = false);

// Load a stored frame back (for evaluation and resuming).
FrameState loadFrame(const std::string& dir, int frame, int views);

struct EvalTables {
    std::vector<double> densityPsnr;
    std::vector<double> velocityPsnr;
    std::vector<double> imagePsnr;
    double densityPeak = 0, velocityPeak = 0, imagePeak = 0;
};

// PSNR curves of a reconstruction against ground truth directories. Peaks are
// taken from the ground-truth sequence. Missing velocity volumes on either
// side skip the velocity table. When the ground-truth grid is finer by a
// factor 2^k, it is restricted to the reconstruction grid first.
EvalTables evaluateSequences(const std::string& truthDir, const std::string& reconDir, int frames,
                             int views);

void writePsnrTable(const std::string& path, const std::string& metric,
                    const std::vector<double>& values);

}  // namespace sfr
