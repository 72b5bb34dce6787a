#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>

#include "sfr/benchmark.hpp"

namespace fs = std::filesystem;
using namespace sfr;

namespace {

struct CommonOpts {
    std::string configPath;
    std::string outDir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int threads = 1;
};

void addCommon(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.configPath, "config file (key = value with [sections])");
    cmd->add_option("--out", o.outDir, "output directory (overrides output.dir)");
    cmd->add_option("--set", o.overrides, "override a config key, section.key=value")
        ->take_all();
    cmd->add_option("--seed", o.seed, "override sim.seed")->each([&o](const std::string&) {
        o.seedSet = true;
    });
    cmd->add_option("--threads", o.threads, "worker threads (recorded; solvers are sequential)")
        ->check(CLI::PositiveNumber);
}

ReconConfig makeConfig(const CommonOpts& o) {
    ReconConfig cfg;
    if (!o.configPath.empty()) cfg = loadConfig(o.configPath);
    for (const auto& ov : o.overrides) applyOverride(cfg, ov);
    if (o.seedSet) cfg.seed = o.seed;
    if (!o.outDir.empty()) cfg.outDir = o.outDir;
    cfg.validate();
    return cfg;
}

std::vector<CameraView> camerasFor(const ReconConfig& cfg) {
    if (!cfg.cameraFile.empty()) return expandAll(loadPinholeFile(cfg.cameraFile));
    return expandAll(makeArcCameras(cfg));
}

ImageSequence imageDirSequence(const std::string& dir, int views) {
    return [dir, views](int frame) {
        ImageSet set;
        for (int v = 0; v < views; ++v) set.views.push_back(readPfm(imagePath(dir, v, frame)));
        return set;
    };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volumetric smoke reconstruction from sparse views"};
    app.require_subcommand(1);

    CommonOpts simO, renO, recO, tomoO, evalO, benchO, regO;

    auto* sim = app.add_subcommand("simulate", "forward-simulate a ground-truth plume");
    addCommon(sim, simO);
    int simInstance = 0;
    sim->add_option("--instance", simInstance, "noise instance index");

    auto* ren = app.add_subcommand("render", "render stored volumes to images");
    addCommon(ren, renO);
    std::string renDir;
    ren->add_option("--dir", renDir, "directory with density volumes (images written there)")
        ->required();
    int renFrames = 0;
    ren->add_option("--frames", renFrames, "frame count")->required();

    auto* rec = app.add_subcommand("reconstruct", "reconstruct density+velocity from images");
    addCommon(rec, recO);
    std::string recImages;
    rec->add_option("--images", recImages, "directory with per-view images")->required();
    bool recResume = false;
    rec->add_flag("--resume", recResume, "continue from the last checkpoint");

    auto* tomo = app.add_subcommand("tomo", "one-shot tomography of a single frame");
    addCommon(tomo, tomoO);
    std::string tomoImages, tomoOut = "tomo.vol";
    int tomoFrame = 0;
    tomo->add_option("--images", tomoImages, "directory with per-view images")->required();
    tomo->add_option("--frame", tomoFrame, "frame index");
    tomo->add_option("--volume", tomoOut, "output volume path");

    auto* eval = app.add_subcommand("evaluate", "PSNR tables of recon vs truth");
    addCommon(eval, evalO);
    std::string evalTruth, evalRecon;
    int evalFrames = 0;
    eval->add_option("--truth", evalTruth)->required();
    eval->add_option("--recon", evalRecon)->required();
    eval->add_option("--frames", evalFrames)->required();

    auto* bench = app.add_subcommand("bench", "synthetic end-to-end benchmark");
    addCommon(bench, benchO);

    auto* reg = app.add_subcommand("regions", "dump inflow back-trace masks for a frame");
    addCommon(reg, regO);
    std::string regImages, regVel;
    int regFrame = 0;
    reg->add_option("--images", regImages)->required();
    reg->add_option("--velocity", regVel, "velocity volume to trace with")->required();
    reg->add_option("--frame", regFrame);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sim) {
            ReconConfig cfg = makeConfig(simO);
            const SceneSetup scene = makeScene(cfg, cfg.variant, simInstance);
            fs::create_directories(cfg.outDir);
            simulateScene(scene, cfg.frames, cfg.outDir);
            std::fprintf(stderr, "simulated frames=%d dir=%s\n", cfg.frames, cfg.outDir.c_str());
        } else if (*ren) {
            ReconConfig cfg = makeConfig(renO);
            renderScene(cfg, camerasFor(cfg), renDir, renFrames);
            std::fprintf(stderr, "rendered frames=%d dir=%s\n", renFrames, renDir.c_str());
        } else if (*rec) {
            ReconConfig cfg = makeConfig(recO);
            const auto views = camerasFor(cfg);
            reconVelDen(imageDirSequence(recImages, cfg.views), cfg.frames, views, cfg, cfg.outDir,
                        recResume);
        } else if (*tomo) {
            ReconConfig cfg = makeConfig(tomoO);
            const auto views = camerasFor(cfg);
            const ProjectionOperator P = buildProjection(views, cfg.gridDims(),
                                                         cfg.inflowSlab * cfg.h, cfg.projectionStep);
            const ImageSet imgs = imageDirSequence(tomoImages, cfg.views)(tomoFrame);
            Mask hull = computeVisualHull(
                imgs, P, {cfg.hullWeightKeep, cfg.hullWeightExclude, cfg.hullPixelFloor});
            const DomainMasks masks = makeSlabMasks(cfg.gridDims(), cfg.inflowSlab);
            for (std::size_t c = 0; c < hull.size(); ++c) hull[c] = hull[c] && masks.visible[c];
            const TomographyProblem prob = makeTomographyProblem(
                P, hull, {cfg.densitySmooth, cfg.densityKinetic},
                PDParams::fromOperatorNorm(1.0, cfg.pdIterations), cfg.cglsTol, cfg.cglsMaxIter);
            const ScalarField den = reconDen(prob, imgs, ScalarField(cfg.gridDims()));
            writeVolume(tomoOut, den);
            std::fprintf(stderr, "tomo frame=%d unknowns=%zu out=%s\n", tomoFrame, prob.unknowns(),
                         tomoOut.c_str());
        } else if (*eval) {
            ReconConfig cfg = makeConfig(evalO);
            const EvalTables t = evaluateSequences(evalTruth, evalRecon, evalFrames, cfg.views);
            const std::string dir = cfg.outDir;
            fs::create_directories(dir);
            writePsnrTable(dir + "/psnr_density.tsv", "density", t.densityPsnr);
            if (!t.velocityPsnr.empty())
                writePsnrTable(dir + "/psnr_velocity.tsv", "velocity", t.velocityPsnr);
            writePsnrTable(dir + "/psnr_image.tsv", "image", t.imagePsnr);
            auto mean = [](const std::vector<double>& v) {
                double s = 0;
                for (double x : v) s += x;
                return v.empty() ? 0.0 : s / double(v.size());
            };
            std::printf("psnr_density_mean=%.4f\npsnr_velocity_mean=%.4f\npsnr_image_mean=%.4f\n",
                        mean(t.densityPsnr), mean(t.velocityPsnr), mean(t.imagePsnr));
        } else if (*bench) {
            ReconConfig cfg = makeConfig(benchO);
            runSyntheticBenchmark(cfg);
        } else if (*reg) {
            ReconConfig cfg = makeConfig(regO);
            const ImageSet imgs = imageDirSequence(regImages, cfg.views)(regFrame);
            (void)imgs;
            const StaggeredField vel = readStaggeredVolume(regVel);
            const DomainMasks masks = makeSlabMasks(vel.dims, cfg.inflowSlab);
            const TraceResult tr = traceRegions(vel, masks, cfg.dt);
            ScalarField target(vel.dims), source(vel.dims);
            for (std::size_t c = 0; c < tr.traceTarget.size(); ++c) {
                target.data[c] = tr.traceTarget[c];
                source.data[c] = tr.traceSource[c];
            }
            fs::create_directories(cfg.outDir);
            writeVolume(cfg.outDir + "/trace_target.vol", target);
            writeVolume(cfg.outDir + "/trace_source.vol", source);
            std::fprintf(stderr, "regions target=%zu source=%zu\n", tr.targetCount,
                         tr.sourceCount);
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error=%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error=%s\n", e.what());
        return 2;
    }
    return 0;
}
