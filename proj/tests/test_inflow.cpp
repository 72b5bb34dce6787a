#include <doctest.h>

#include <random>

#include "sfr/benchmark.hpp"
#include "sfr/inflow.hpp"

using namespace sfr;

namespace {

struct InflowRig {
    GridDims d;
    int slab;
    DomainMasks masks;
    std::vector<CameraView> cams;
    ProjectionOperator P;

    InflowRig(GridDims dims, int slabRows, int views = 4, int w = 12, int h = 18)
        : d(dims), slab(slabRows), masks(makeSlabMasks(dims, slabRows)) {
        ReconConfig cfg;
        cfg.nx = d.nx;
        cfg.ny = d.ny;
        cfg.nz = d.nz;
        cfg.h = d.h;
        cfg.views = views;
        cfg.imageWidth = w;
        cfg.imageHeight = h;
        cfg.cameraDistance = 3.0 * d.ny * d.h;
        cfg.fovYDegrees = 32.0;
        cams = expandAll(makeArcCameras(cfg));
        P = buildProjection(cams, d, slabRows * d.h);
    }

    TomographyProblem problem(const ImageSet& imgs) const {
        Mask hull = computeVisualHull(imgs, P);
        for (std::size_t c = 0; c < hull.size(); ++c) hull[c] = hull[c] && masks.visible[c];
        return makeTomographyProblem(P, hull, kDensityReg, PDParams::fromOperatorNorm(1.0, 10));
    }

    InflowEnv env(const TomographyProblem& tomo, double dt) const {
        InflowEnv e;
        e.masks = &masks;
        e.tomo = &tomo;
        e.pd = PDParams::fromOperatorNorm(1.0, 10);
        e.dt = dt;
        return e;
    }
};

ScalarField blob(const GridDims& d, double cx, double cy, double cz, double rad, double amp) {
    ScalarField f(d);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const double dx = i + 0.5 - cx, dy = j + 0.5 - cy, dz = k + 0.5 - cz;
                const double r2 = (dx * dx + dy * dy + dz * dz) / (rad * rad);
                if (r2 < 1) f.at(i, j, k) = amp * (1 - r2);
            }
    return f;
}

}  // namespace

TEST_SUITE("inflow") {

TEST_CASE("zero velocity traces nowhere") {
    GridDims d{8, 8, 8, 0.25};
    const DomainMasks masks = makeSlabMasks(d, 2);
    const TraceResult tr = traceRegions(StaggeredField(d), masks, 0.1);
    CHECK(tr.targetCount == 0);
    CHECK(tr.sourceCount == 0);
}

TEST_CASE("one-cell upward flow maps the first visible row onto the slab top") {
    GridDims d{8, 8, 8, 0.25};
    const int slab = 2;
    const DomainMasks masks = makeSlabMasks(d, slab);
    const double dt = 0.5;
    StaggeredField vel(d);
    for (double& v : vel.y) v = d.h / dt;  // exactly one cell per step
    const TraceResult tr = traceRegions(vel, masks, dt);
    // target = first visible row, source = top slab row
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) {
                const std::size_t c = std::size_t(i) + d.nx * (j + std::size_t(d.ny) * k);
                CHECK(int(tr.traceTarget[c]) == (j == slab ? 1 : 0));
                CHECK(int(tr.traceSource[c]) == (j == slab - 1 ? 1 : 0));
            }
}

TEST_CASE("trace source always stays inside the inflow slab") {
    GridDims d{10, 12, 10, 0.2};
    const DomainMasks masks = makeSlabMasks(d, 3);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        StaggeredField vel(d);
        for (double& v : vel.x) v = uni(rng);
        for (double& v : vel.y) v = uni(rng);
        for (double& v : vel.z) v = uni(rng);
        const TraceResult tr = traceRegions(vel, masks, 0.13);
        for (std::size_t c = 0; c < d.cells(); ++c) {
            if (tr.traceSource[c]) CHECK(masks.inflow[c] == 1);
            if (tr.traceTarget[c]) CHECK(masks.visible[c] == 1);
        }
    }
}

TEST_CASE("target discrepancy splits proportionally") {
    GridDims d{4, 4, 4, 0.5};
    DomainMasks masks = makeSlabMasks(d, 1);
    TraceResult tr;
    tr.traceTarget.assign(d.cells(), 0);
    tr.traceSource.assign(d.cells(), 0);

    ScalarField dPhi(d);
    // two target cells in the visible region with values 1 and 3
    ScalarField probe(d);
    const std::size_t e1 = probe.idx(1, 2, 1), e2 = probe.idx(2, 2, 1);
    tr.traceTarget[e1] = tr.traceTarget[e2] = 1;
    tr.targetCount = 2;
    dPhi.data[e1] = 1.0;
    dPhi.data[e2] = 3.0;
    // outside (visible, non-target) discrepancy sums to 4
    dPhi.data[probe.idx(0, 3, 0)] = 2.5;
    dPhi.data[probe.idx(3, 3, 3)] = 1.5;

    SUBCASE("proportional rule, offset zero") {
        const ScalarField disc = computeTargetDiscrepancy(dPhi, masks, tr);
        CHECK(disc.data[e1] == doctest::Approx(1.0));
        CHECK(disc.data[e2] == doctest::Approx(3.0));
        double other = 0;
        for (std::size_t c = 0; c < d.cells(); ++c)
            if (c != e1 && c != e2) other += std::abs(disc.data[c]);
        CHECK(other == 0.0);
    }
    SUBCASE("zero target values fall back to the uniform split") {
        dPhi.data[e1] = 0.0;
        dPhi.data[e2] = 0.0;
        const ScalarField disc = computeTargetDiscrepancy(dPhi, masks, tr);
        CHECK(disc.data[e1] == doctest::Approx(2.0));
        CHECK(disc.data[e2] == doctest::Approx(2.0));
    }
    SUBCASE("all-equal positive targets degrade to the uniform split") {
        dPhi.data[e1] = 2.0;
        dPhi.data[e2] = 2.0;
        const ScalarField disc = computeTargetDiscrepancy(dPhi, masks, tr);
        CHECK(disc.data[e1] == doctest::Approx(2.0));
        CHECK(disc.data[e2] == doctest::Approx(2.0));
    }
    SUBCASE("negative entries shift the weights by the offset") {
        dPhi.data[e1] = -1.0;
        dPhi.data[e2] = 3.0;  // offset 1, weights (0, 4), denom 4
        const ScalarField disc = computeTargetDiscrepancy(dPhi, masks, tr);
        CHECK(disc.data[e1] == doctest::Approx(0.0));
        CHECK(disc.data[e2] == doctest::Approx(4.0));
    }
}

TEST_CASE("consistent images need almost no inflow") {
    // dense pixel coverage keeps the target tomography mass-accurate
    InflowRig rig({12, 16, 12, 0.08}, 2, 5, 26, 40);
    const double dt = 0.05;
    const ScalarField phiPrev = blob(rig.d, 6, 8, 6, 4, 1.0);
    StaggeredField vel(rig.d);
    for (double& v : vel.y) v = 0.4 * rig.d.h / dt;  // moderate rise
    const ImageSet imgs = render(rig.P, advect(phiPrev, vel, dt));
    const TomographyProblem tomo = rig.problem(imgs);
    const ScalarField phiI = estimInfl(rig.env(tomo, dt), imgs, phiPrev, vel);
    double l1 = 0, l1prev = 0;
    for (double v : phiI.data) l1 += std::abs(v);
    for (double v : phiPrev.data) l1prev += std::abs(v);
    CHECK(l1 <= 0.01 * l1prev);
}

TEST_CASE("estimated inflow keeps advected totals non-negative") {
    InflowRig rig({12, 16, 12, 0.08}, 2);
    const double dt = 0.05;
    // previous density also fills the slab, so negative inflow is tempting
    ScalarField phiPrev = blob(rig.d, 6, 6, 6, 5, 1.0);
    for (int k = 0; k < rig.d.nz; ++k)
        for (int j = 0; j < rig.slab; ++j)
            for (int i = 0; i < rig.d.nx; ++i) phiPrev.at(i, j, k) = 0.8;
    StaggeredField vel(rig.d);
    for (double& v : vel.y) v = 0.6 * rig.d.h / dt;
    // images much dimmer than the prediction: the solver wants negative inflow
    ScalarField dimmer = advect(phiPrev, vel, dt);
    for (double& v : dimmer.data) v *= 0.25;
    const ImageSet imgs = render(rig.P, dimmer);
    const TomographyProblem tomo = rig.problem(imgs);
    const ScalarField phiI = estimInfl(rig.env(tomo, dt), imgs, phiPrev, vel);

    ScalarField total = phiPrev;
    for (std::size_t c = 0; c < total.data.size(); ++c) total.data[c] += phiI.data[c];
    for (double v : total.data) CHECK(v >= -1e-12);
    const ScalarField advected = advect(total, vel, dt);
    for (double v : advected.data) CHECK(v >= -1e-12);
    // support: inflow estimate lives in the slab only
    for (int k = 0; k < rig.d.nz; ++k)
        for (int j = rig.slab; j < rig.d.ny; ++j)
            for (int i = 0; i < rig.d.nx; ++i) CHECK(phiI.at(i, j, k) == 0.0);
}

TEST_CASE("empty trace region returns zero inflow") {
    InflowRig rig({12, 16, 12, 0.08}, 2);
    const ScalarField phiPrev = blob(rig.d, 6, 10, 6, 3, 1.0);
    const StaggeredField vel(rig.d);  // nothing moves
    const ImageSet imgs = render(rig.P, phiPrev);
    const TomographyProblem tomo = rig.problem(imgs);
    const ScalarField phiI = estimInfl(rig.env(tomo, 0.05), imgs, phiPrev, vel);
    CHECK(fieldMaxAbs(phiI) == 0.0);
}

}  // TEST_SUITE
