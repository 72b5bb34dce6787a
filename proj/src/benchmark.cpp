#include "sfr/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sfr {

namespace fs = std::filesystem;

std::vector<PinholeCamera> makeArcCameras(const ReconConfig& cfg) {
    const GridDims d = cfg.gridDims();
    const double target[3] = {0.5 * d.nx * d.h, 0.5 * d.ny * d.h, 0.5 * d.nz * d.h};
    std::vector<PinholeCamera> cams;
    cams.reserve(cfg.views);
    for (int v = 0; v < cfg.views; ++v) {
        const double frac = cfg.views == 1 ? 0.5 : double(v) / double(cfg.views - 1);
        const double angle = (frac - 0.5) * cfg.arcDegrees * M_PI / 180.0;
        const double eye[3] = {target[0] + cfg.cameraDistance * std::sin(angle), target[1],
                               target[2] - cfg.cameraDistance * std::cos(angle)};
        cams.push_back(
            lookAtCamera(cfg.imageWidth, cfg.imageHeight, cfg.fovYDegrees, eye, target));
    }
    return cams;
}

SceneSetup makeScene(const ReconConfig& cfg, const std::string& variant, int instance) {
    SceneSetup scene;
    scene.dims = cfg.gridDims();
    scene.inflowSlab = cfg.inflowSlab;
    SimParams& p = scene.params;
    p.dt = cfg.dt;
    p.viscosity = cfg.viscosity;
    p.buoyancyAlpha = cfg.buoyancy;
    p.inflowNoiseSeed = cfg.seed + std::uint64_t(instance);
    p.inflowNoiseAmp = cfg.noiseAmp;
    p.sourceRadius = cfg.sourceRadius;
    p.sourceHeight = cfg.inflowSlab;
    p.sourceDensity = cfg.sourceDensity;
    p.pressureTol = cfg.pressureTol;
    p.pressureMaxIter = cfg.pressureMaxIter;

    if (variant == "wide-inflow") {
        p.sourceRadius *= 1.6;
    } else if (variant == "buoyant-1.5x") {
        p.buoyancyAlpha *= 1.5;
    } else if (variant == "double-res-truth") {
        scene.dims = GridDims{cfg.nx * 2, cfg.ny * 2, cfg.nz * 2, cfg.h * 0.5};
        scene.inflowSlab = cfg.inflowSlab * 2;
        p.sourceRadius *= 2;
        p.sourceHeight *= 2;
    } else if (variant != "base") {
        throw std::invalid_argument("unknown benchmark variant: " + variant);
    }
    return scene;
}

void simulateScene(const SceneSetup& scene, int frames, const std::string& dir) {
    fs::create_directories(dir);
    PressureSolver pressure(scene.dims);
    SimState state{ScalarField(scene.dims), StaggeredField(scene.dims)};
    for (int t = 0; t < frames; ++t) {
        state = stepForward(state, scene.params, t, pressure);
        ScalarField den = state.density;
        StaggeredField vel = state.vel;
        quantizeToStorage(den);
        quantizeToStorage(vel);
        writeVolume(densityPath(dir, t), den);
        writeVolume(velocityPath(dir, t), vel);
    }
}

void renderScene(const ReconConfig& cfg, const std::vector<CameraView>& cameras,
                 const std::string& dir, int frames) {
    const double visibleYMin = cfg.inflowSlab * cfg.h;
    ScalarField first = readScalarVolume(densityPath(dir, 0));
    const ProjectionOperator P =
        buildProjection(cameras, first.dims, visibleYMin, cfg.projectionStep);
    for (int t = 0; t < frames; ++t) {
        ScalarField den = t == 0 ? std::move(first) : readScalarVolume(densityPath(dir, t));
        const ImageSet imgs = render(P, den);
        for (std::size_t v = 0; v < imgs.views.size(); ++v)
            writePfm(imagePath(dir, int(v), t), imgs.views[v]);
    }
}

int plumeTopRow(const ScalarField& density, double threshold) {
    const GridDims& d = density.dims;
    for (int j = d.ny - 1; j >= 0; --j)
        for (int k = 0; k < d.nz; ++k)
            for (int i = 0; i < d.nx; ++i)
                if (density.at(i, j, k) > threshold) return j;
    return -1;
}

namespace {

double meanOf(const std::vector<double>& v) {
    if (v.empty()) return 0;
    double s = 0;
    for (double x : v) s += x;
    return s / double(v.size());
}

void writeInstanceTables(const std::string& dir, const EvalTables& t) {
    writePsnrTable(dir + "/psnr_density.tsv", "density", t.densityPsnr);
    if (!t.velocityPsnr.empty())
        writePsnrTable(dir + "/psnr_velocity.tsv", "velocity", t.velocityPsnr);
    writePsnrTable(dir + "/psnr_image.tsv", "image", t.imagePsnr);
}

void fmtCell(std::ofstream& out, double v) {
    if (std::isinf(v)) {
        out << "inf";
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", v);
        out << buf;
    }
}

}  // namespace

void writeBenchSummary(const std::string& dir, const BenchResult& res) {
    if (res.instances.empty()) return;
    const std::size_t frames = res.instances[0].tables.densityPsnr.size();
    std::ofstream out(dir + "/summary.tsv");
    out << "frame\tdensity_mean\tdensity_std\tvelocity_mean\tvelocity_std\timage_mean\timage_std\n";
    auto frameStats = [&](auto pick, std::size_t f, double& mean, double& sd) {
        std::vector<double> vals;
        for (const auto& inst : res.instances) {
            const std::vector<double>& v = pick(inst.tables);
            if (f < v.size()) vals.push_back(v[f]);
        }
        mean = meanOf(vals);
        double s = 0;
        for (double x : vals) s += (x - mean) * (x - mean);
        sd = vals.size() > 1 ? std::sqrt(s / double(vals.size() - 1)) : 0;
    };
    for (std::size_t f = 0; f < frames; ++f) {
        double dm, ds, vm, vs, im, is;
        frameStats([](const EvalTables& t) -> const std::vector<double>& { return t.densityPsnr; },
                   f, dm, ds);
        frameStats([](const EvalTables& t) -> const std::vector<double>& { return t.velocityPsnr; },
                   f, vm, vs);
        frameStats([](const EvalTables& t) -> const std::vector<double>& { return t.imagePsnr; },
                   f, im, is);
        out << f << "\t";
        fmtCell(out, dm); out << "\t";
        fmtCell(out, ds); out << "\t";
        fmtCell(out, vm); out << "\t";
        fmtCell(out, vs); out << "\t";
        fmtCell(out, im); out << "\t";
        fmtCell(out, is); out << "\n";
    }
    std::ofstream overall(dir + "/overall.tsv");
    overall << "metric\tmean\tstd\n";
    overall << "density\t";
    fmtCell(overall, res.meanDensity); overall << "\t";
    fmtCell(overall, res.stdDensity); overall << "\n";
    overall << "velocity\t";
    fmtCell(overall, res.meanVelocity); overall << "\t";
    fmtCell(overall, res.stdVelocity); overall << "\n";
    overall << "image\t";
    fmtCell(overall, res.meanImage); overall << "\t";
    fmtCell(overall, res.stdImage); overall << "\n";
}

BenchResult runSyntheticBenchmark(const ReconConfig& cfg) {
    cfg.validate();
    const auto tic = std::chrono::steady_clock::now();
    fs::create_directories(cfg.outDir);

    std::vector<PinholeCamera> cams =
        cfg.cameraFile.empty() ? makeArcCameras(cfg) : loadPinholeFile(cfg.cameraFile);
    savePinholeFile(cfg.outDir + "/cameras.txt", cams);
    const std::vector<CameraView> views = expandAll(cams);

    BenchResult res;
    for (int inst = 0; inst < cfg.instances; ++inst) {
        const std::string instDir = cfg.outDir + "/inst" + std::to_string(inst);
        const std::string gtDir = instDir + "/gt";
        const std::string reconDir = instDir + "/recon";
        fs::create_directories(gtDir);
        fs::create_directories(reconDir);

        const SceneSetup scene = makeScene(cfg, cfg.variant, inst);
        simulateScene(scene, cfg.frames, gtDir);
        renderScene(cfg, views, gtDir, cfg.frames);

        ImageSequence seq = [gtDir, &cfg](int frame) {
            ImageSet set;
            for (int v = 0; v < cfg.views; ++v)
                set.views.push_back(readPfm(imagePath(gtDir, v, frame)));
            return set;
        };
        reconVelDen(seq, cfg.frames, views, cfg, reconDir, false);

        BenchInstance bi;
        bi.tables = evaluateSequences(gtDir, reconDir, cfg.frames, cfg.views);
        bi.meanDensity = meanOf(bi.tables.densityPsnr);
        bi.meanVelocity = meanOf(bi.tables.velocityPsnr);
        bi.meanImage = meanOf(bi.tables.imagePsnr);
        writeInstanceTables(instDir, bi.tables);
        std::fprintf(stderr, "bench_instance=%d psnr_density=%.2f psnr_velocity=%.2f psnr_image=%.2f\n",
                     inst, bi.meanDensity, bi.meanVelocity, bi.meanImage);
        res.instances.push_back(std::move(bi));
    }

    std::vector<double> md, mv, mi;
    for (const auto& b : res.instances) {
        md.push_back(b.meanDensity);
        mv.push_back(b.meanVelocity);
        mi.push_back(b.meanImage);
    }
    auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = meanOf(v);
        double s = 0;
        for (double x : v) s += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(s / double(v.size() - 1)) : 0;
    };
    stats(md, res.meanDensity, res.stdDensity);
    stats(mv, res.meanVelocity, res.stdVelocity);
    stats(mi, res.meanImage, res.stdImage);
    writeBenchSummary(cfg.outDir, res);
    res.wallSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    std::fprintf(stderr,
                 "bench_done variant=%s density=%.2f±%.2f velocity=%.2f±%.2f image=%.2f±%.2f "
                 "wall_s=%.0f\n",
                 cfg.variant.c_str(), res.meanDensity, res.stdDensity, res.meanVelocity,
                 res.stdVelocity, res.meanImage, res.stdImage, res.wallSeconds);
    return res;
}

}  // namespace sfr
