#include "sfr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sfr {

namespace fs = std::filesystem;

namespace {

double mse(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / double(a.size());
}

}  // namespace

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
    if (a.size() != b.size()) throw std::invalid_argument("psnr: size mismatch");
    if (peak <= 0) throw std::invalid_argument("psnr: peak must be > 0");
    const double m = mse(a, b);
    if (m == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / m);
}

double psnr(const ScalarField& a, const ScalarField& b, double peak) {
    if (!(a.dims == b.dims)) throw std::invalid_argument("psnr: dims mismatch");
    return psnr(std::span<const double>(a.data), std::span<const double>(b.data), peak);
}

double psnr(const StaggeredField& a, const StaggeredField& b, double peak) {
    if (!(a.dims == b.dims)) throw std::invalid_argument("psnr: dims mismatch");
    const double na = double(a.x.size() + a.y.size() + a.z.size());
    double s = mse(a.x, b.x) * double(a.x.size()) + mse(a.y, b.y) * double(a.y.size()) +
               mse(a.z, b.z) * double(a.z.size());
    s /= na;
    if (s == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / s);
}

double psnr(const ImageSet& a, const ImageSet& b, double peak) {
    if (a.views.size() != b.views.size()) throw std::invalid_argument("psnr: view count mismatch");
    double s = 0;
    std::size_t n = 0;
    for (std::size_t v = 0; v < a.views.size(); ++v) {
        if (a.views[v].pixels.size() != b.views[v].pixels.size())
            throw std::invalid_argument("psnr: image dims mismatch");
        s += mse(a.views[v].pixels, b.views[v].pixels) * double(a.views[v].pixels.size());
        n += a.views[v].pixels.size();
    }
    s /= double(n);
    if (peak <= 0) throw std::invalid_argument("psnr: peak must be > 0");
    if (s == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / s);
}

namespace {

std::string frameName(const char* stem, int frame, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.%s", stem, frame, ext);
    return buf;
}

}  // namespace

std::string densityPath(const std::string& dir, int frame) {
    return dir + "/" + frameName("density", frame, "vol");
}
std::string velocityPath(const std::string& dir, int frame) {
    return dir + "/" + frameName("velocity", frame, "vol");
}
std::string inflowPath(const std::string& dir, int frame) {
    return dir + "/" + frameName("inflow", frame, "vol");
}
std::string imagePath(const std::string& dir, int view, int frame) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "img_v%d_f%04d.pfm", view, frame);
    return dir + "/" + buf;
}

double estimateInflowSpeed(const ImageSequence& images, int frameCount, const CameraView& view0,
                           const GridDims& dims, double dt) {
    const int f0 = std::min(10, std::max(1, frameCount - 2));
    const int f1 = std::min(30, frameCount - 1);
    if (f1 <= f0) return 0.3;

    // angular height of one pixel row at the image center
    const Ray& mid = view0.rays[std::size_t(view0.height / 2) * view0.width + view0.width / 2];
    const Ray& midBelow =
        view0.rays[std::size_t(view0.height / 2 + 1) * view0.width + view0.width / 2];
    const double cosA = mid.dx * midBelow.dx + mid.dy * midBelow.dy + mid.dz * midBelow.dz;
    const double rowAngle = std::acos(std::clamp(cosA, -1.0, 1.0));
    const double cx = 0.5 * dims.nx * dims.h, cy = 0.5 * dims.ny * dims.h,
                 cz = 0.5 * dims.nz * dims.h;
    const double depth = std::sqrt((cx - mid.ox) * (cx - mid.ox) + (cy - mid.oy) * (cy - mid.oy) +
                                   (cz - mid.oz) * (cz - mid.oz));
    const double metersPerRow = rowAngle * depth;

    // plume-top row per frame (first row from the top exceeding 5% of max)
    std::vector<double> t, y;
    double seqMax = 0;
    std::vector<ImageSet> cached;
    for (int f = f0; f <= f1; ++f) {
        cached.push_back(images(f));
        seqMax = std::max(seqMax, cached.back().views[0].pixels.empty()
                                      ? 0.0
                                      : *std::max_element(cached.back().views[0].pixels.begin(),
                                                          cached.back().views[0].pixels.end()));
    }
    if (seqMax <= 0) return 0.0;  // nothing moves in a black sequence
    const double thr = 0.05 * seqMax;
    for (int f = f0; f <= f1; ++f) {
        const Image& img = cached[f - f0].views[0];
        int top = -1;
        for (int r = 0; r < img.height && top < 0; ++r)
            for (int x = 0; x < img.width; ++x)
                if (img.at(x, r) > thr) {
                    top = r;
                    break;
                }
        if (top <= 0) continue;  // empty or clipped at the image top
        t.push_back(f * dt);
        y.push_back(-double(top) * metersPerRow);  // rows count downward
    }
    if (t.size() < 3) return 0.3;
    // least-squares slope
    double mt = 0, my = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= double(t.size());
    my /= double(t.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        num += (t[i] - mt) * (y[i] - my);
        den += (t[i] - mt) * (t[i] - mt);
    }
    if (den <= 0) return 0.3;
    return std::clamp(num / den, 0.05, 2.0);
}

namespace {

struct Manifest {
    std::uint64_t configHash = 0;
    int lastFrame = -1;
    double inflowSpeed = 0;
};

std::string manifestPath(const std::string& dir) { return dir + "/manifest.txt"; }

void writeManifest(const std::string& dir, const Manifest& m) {
    std::ofstream out(manifestPath(dir) + ".tmp");
    out.precision(17);
    out << "config_hash = " << m.configHash << "\n";
    out << "last_frame = " << m.lastFrame << "\n";
    out << "inflow_speed = " << m.inflowSpeed << "\n";
    out.close();
    fs::rename(manifestPath(dir) + ".tmp", manifestPath(dir));
}

std::optional<Manifest> readManifest(const std::string& dir) {
    std::ifstream in(manifestPath(dir));
    if (!in) return std::nullopt;
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string key, eq;
        is >> key >> eq;
        if (key == "config_hash")
            is >> m.configHash;
        else if (key == "last_frame")
            is >> m.lastFrame;
        else if (key == "inflow_speed")
            is >> m.inflowSpeed;
    }
    return m;
}

void appendFrameDiag(const std::string& dir, const FrameDiag& d, bool writeHeader) {
    std::ofstream out(dir + "/frames.tsv", writeHeader ? std::ios::trunc : std::ios::app);
    if (writeHeader)
        out << "frame\twall_ms\tdiv_max\tmin_density\timage_residual\tcgls_calls\tcgls_iters\t"
               "cg_calls\tcg_iters\tpressure_solves\tpd_loops\n";
    out << d.index << "\t" << std::fixed << d.wallMs << "\t" << std::scientific << d.divMax << "\t"
        << d.minDensity << "\t" << d.imageResidual << "\t" << d.solver.cglsCalls << "\t"
        << d.solver.cglsIterations << "\t" << d.solver.cgCalls << "\t" << d.solver.cgIterations
        << "\t" << d.solver.pressureSolves << "\t" << d.solver.pdLoops << "\n";
}

void logLine(const FrameDiag& d) {
    std::fprintf(stderr,
                 "frame=%d wall_ms=%.0f div_max=%.3e min_density=%.3e image_residual=%.4f "
                 "cgls_iters=%ld cg_iters=%ld pressure_solves=%ld\n",
                 d.index, d.wallMs, d.divMax, d.minDensity, d.imageResidual,
                 d.solver.cglsIterations, d.solver.cgIterations, d.solver.pressureSolves);
}

void writeFrameFiles(const std::string& dir, int frame, const ScalarField& density,
                     const StaggeredField& vel, const ScalarField& inflowDen,
                     const ImageSet& rendered) {
    writeVolume(densityPath(dir, frame), density);
    writeVolume(velocityPath(dir, frame), vel);
    writeVolume(inflowPath(dir, frame), inflowDen);
    for (std::size_t v = 0; v < rendered.views.size(); ++v)
        writePfm(imagePath(dir, int(v), frame), rendered.views[v]);
}

}  // namespace

ReconResult reconVelDen(const ImageSequence& images, int frameCount,
                        const std::vector<CameraView>& cameras, const ReconConfig& cfg,
                        const std::string& outDir, bool resume) {
    if (frameCount < 2) throw std::invalid_argument("reconVelDen: need at least 2 frames");
    cfg.validate();
    fs::create_directories(outDir);

    const GridDims dims = cfg.gridDims();
    ReconStack stack = buildReconStack(cameras, dims, cfg.inflowSlab, cfg.projectionStep);
    for (auto& level : stack.levels) {
        level->velReg = {cfg.velocitySmooth, cfg.velocityKinetic};
        level->denReg = {cfg.densitySmooth, cfg.densityKinetic};
        level->inflowReg = {cfg.inflowSmooth, cfg.inflowKinetic};
        level->pd = PDParams::fromOperatorNorm(1.0, cfg.pdIterations);
        level->cglsTol = cfg.cglsTol;
        level->cglsMaxIter = cfg.cglsMaxIter;
        level->cgTol = cfg.cgTol;
        level->cgMaxIter = cfg.cgMaxIter;
        // internal projections run at half the contract tolerance so sums of
        // two projected fields still meet it
        level->pressureTol = 0.5 * cfg.pressureTol;
        level->pressureMaxIter = cfg.pressureMaxIter;
        level->dt = cfg.dt;
        level->ablationVb = cfg.ablation == "vb";
        level->hullParams = {cfg.hullWeightKeep, cfg.hullWeightExclude, cfg.hullPixelFloor};
    }

    ReconResult result;
    Manifest manifest;
    manifest.configHash = cfg.hash();

    int startFrame = 0;
    ScalarField phiPrev(dims);
    StaggeredField uPrev(dims);

    if (resume) {
        auto existing = readManifest(outDir);
        if (!existing) throw std::runtime_error("resume requested but no manifest in " + outDir);
        if (existing->configHash != manifest.configHash)
            throw std::runtime_error("resume rejected: config hash mismatch");
        if (existing->lastFrame >= 0) {
            phiPrev = readScalarVolume(densityPath(outDir, existing->lastFrame));
            uPrev = readStaggeredVolume(velocityPath(outDir, existing->lastFrame));
            startFrame = existing->lastFrame + 1;
            manifest = *existing;
        }
    }

    // c is a per-sequence constant
    double c = cfg.inflowSpeed;
    if (c <= 0 && resume && manifest.lastFrame >= 0) c = manifest.inflowSpeed;
    if (c <= 0) c = estimateInflowSpeed(images, frameCount, cameras[0], dims, cfg.dt);
    manifest.inflowSpeed = c;
    result.inflowSpeed = c;
    for (auto& level : stack.levels) level->inflowSpeed = c;
    std::fprintf(stderr, "recon_start frames=%d inflow_speed=%.4f levels=%zu\n", frameCount, c,
                 stack.levels.size());

    ReconLevel& fine = *stack.levels[0];

    for (int t = startFrame; t < frameCount; ++t) {
        const auto tic = std::chrono::steady_clock::now();
        SolverDiag solv;
        const ImageSet imgs = images(t);
        if (imgs.totalPixels() != fine.P.rows())
            throw std::runtime_error("image dims do not match the calibration");
        for (auto& level : stack.levels) level->frameReady = false;
        fine.prepareFrame(imgs, &solv);

        ScalarField density(dims);
        StaggeredField vel(dims);
        ScalarField inflowDen(dims);

        if (t == 0) {
            density = fine.densityTarget;  // reconDen(i0, 0)
        } else {
            StaggeredField uP = predictVelocity(uPrev, *fine.freeProject, cfg.viscosity, cfg.dt,
                                                fine.pressureTol, fine.pressureMaxIter, &solv);
            const InflowEnv env = fine.inflowEnv();
            const ScalarField phiIp = estimInfl(env, imgs, phiPrev, uP, &solv);
            ScalarField seeded = phiPrev;
            for (std::size_t i = 0; i < seeded.data.size(); ++i) seeded.data[i] += phiIp.data[i];
            const ScalarField phiP = advect(seeded, uP, cfg.dt);

            const StaggeredField uU = reconVelMS(stack, 0, uP, phiP, phiPrev, imgs, &solv);
            vel = uP;
            for (std::size_t f = 0; f < vel.x.size(); ++f) vel.x[f] += uU.x[f];
            for (std::size_t f = 0; f < vel.y.size(); ++f) vel.y[f] += uU.y[f];
            for (std::size_t f = 0; f < vel.z.size(); ++f) vel.z[f] += uU.z[f];
            quantizeToStorage(vel);

            inflowDen = estimInfl(env, imgs, phiPrev, vel, &solv);
            quantizeToStorage(inflowDen);
            ScalarField total = phiPrev;
            for (std::size_t i = 0; i < total.data.size(); ++i) total.data[i] += inflowDen.data[i];
            density = advect(total, vel, cfg.dt);
        }
        quantizeToStorage(density);

        ImageSet rendered = render(fine.P, density);

        FrameDiag diag;
        diag.index = t;
        diag.solver = solv;
        diag.divMax = fieldMaxAbs(divergence(vel));
        double minDen = 0;
        for (double v : density.data) minDen = std::min(minDen, v);
        diag.minDensity = minDen;
        {
            const Vec got = flattenImages(rendered);
            const Vec want = flattenImages(imgs);
            double num = 0, den = 0;
            for (std::size_t i = 0; i < got.size(); ++i) {
                num += (got[i] - want[i]) * (got[i] - want[i]);
                den += want[i] * want[i];
            }
            diag.imageResidual = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
        }
        diag.wallMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                tic)
                          .count();

        writeFrameFiles(outDir, t, density, vel, inflowDen, rendered);
        manifest.lastFrame = t;
        writeManifest(outDir, manifest);
        appendFrameDiag(outDir, diag, t == 0);
        logLine(diag);
        result.diags.push_back(diag);
        result.framesDone = t + 1;

        phiPrev = std::move(density);
        uPrev = std::move(vel);
    }
    return result;
}

FrameState loadFrame(const std::string& dir, int frame, int views) {
    FrameState st;
    st.index = frame;
    st.density = readScalarVolume(densityPath(dir, frame));
    st.vel = readStaggeredVolume(velocityPath(dir, frame));
    if (fs::exists(inflowPath(dir, frame))) st.inflowDensity = readScalarVolume(inflowPath(dir, frame));
    for (int v = 0; v < views; ++v) {
        const std::string p = imagePath(dir, v, frame);
        if (!fs::exists(p)) break;
        st.rendered.views.push_back(readPfm(p));
    }
    return st;
}

EvalTables evaluateSequences(const std::string& truthDir, const std::string& reconDir, int frames,
                             int views) {
    EvalTables tables;
    // peaks from ground truth
    bool hasVel = true;
    for (int f = 0; f < frames; ++f) {
        const ScalarField gt = readScalarVolume(densityPath(truthDir, f));
        tables.densityPeak = std::max(tables.densityPeak, fieldMaxAbs(gt));
        if (fs::exists(velocityPath(truthDir, f)) && fs::exists(velocityPath(reconDir, f))) {
            const StaggeredField gtv = readStaggeredVolume(velocityPath(truthDir, f));
            tables.velocityPeak = std::max(tables.velocityPeak, fieldMaxAbs(gtv));
        } else {
            hasVel = false;
        }
        for (int v = 0; v < views; ++v) {
            if (!fs::exists(imagePath(truthDir, v, f))) continue;
            const Image img = readPfm(imagePath(truthDir, v, f));
            for (double p : img.pixels) tables.imagePeak = std::max(tables.imagePeak, p);
        }
    }
    if (tables.densityPeak <= 0) tables.densityPeak = 1.0;
    if (tables.velocityPeak <= 0) tables.velocityPeak = 1.0;
    if (tables.imagePeak <= 0) tables.imagePeak = 1.0;

    for (int f = 0; f < frames; ++f) {
        ScalarField gt = readScalarVolume(densityPath(truthDir, f));
        const ScalarField rec = readScalarVolume(densityPath(reconDir, f));
        while (gt.dims.nx > rec.dims.nx && gt.dims.nx % 2 == 0) gt = restrictField(gt);
        if (!(gt.dims.nx == rec.dims.nx && gt.dims.ny == rec.dims.ny && gt.dims.nz == rec.dims.nz))
            throw std::runtime_error("evaluate: density grids do not match");
        tables.densityPsnr.push_back(
            psnr(std::span<const double>(gt.data), std::span<const double>(rec.data),
                 tables.densityPeak));

        if (hasVel) {
            StaggeredField gtv = readStaggeredVolume(velocityPath(truthDir, f));
            const StaggeredField recv = readStaggeredVolume(velocityPath(reconDir, f));
            while (gtv.dims.nx > recv.dims.nx && gtv.dims.nx % 2 == 0) gtv = restrictField(gtv);
            tables.velocityPsnr.push_back(psnr(gtv, recv, tables.velocityPeak));
        }

        ImageSet gti, reci;
        for (int v = 0; v < views; ++v) {
            gti.views.push_back(readPfm(imagePath(truthDir, v, f)));
            reci.views.push_back(readPfm(imagePath(reconDir, v, f)));
        }
        tables.imagePsnr.push_back(psnr(gti, reci, tables.imagePeak));
    }
    return tables;
}

void writePsnrTable(const std::string& path, const std::string& metric,
                    const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write table: " + path);
    out << "frame\tpsnr_" << metric << "\n";
    for (std::size_t f = 0; f < values.size(); ++f) {
        out << f << "\t";
        if (std::isinf(values[f]))
            out << "inf";
        else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", values[f]);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace sfr
