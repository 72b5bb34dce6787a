#include <doctest.h>

#include <random>

#include "sfr/field_ops.hpp"
#include "sfr/sparse.hpp"
#include "sfr/volume_io.hpp"

using namespace sfr;

namespace {

ScalarField randomScalar(const GridDims& d, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ScalarField f(d);
    for (double& v : f.data) v = uni(rng);
    return f;
}

StaggeredField randomStaggered(const GridDims& d, unsigned seed, bool zeroBoundary = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    StaggeredField f(d);
    for (double& v : f.x) v = uni(rng);
    for (double& v : f.y) v = uni(rng);
    for (double& v : f.z) v = uni(rng);
    if (zeroBoundary) {
        // kill faces within one cell of the domain boundary so the adjoint
        // identity carries no boundary terms
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i <= d.nx; ++i)
                    if (i <= 1 || i >= d.nx - 1 || j <= 0 || j >= d.ny - 1 || k <= 0 ||
                        k >= d.nz - 1)
                        f.atX(i, j, k) = 0;
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j <= d.ny; ++j)
                for (int i = 0; i < d.nx; ++i)
                    if (j <= 1 || j >= d.ny - 1 || i <= 0 || i >= d.nx - 1 || k <= 0 ||
                        k >= d.nz - 1)
                        f.atY(i, j, k) = 0;
        for (int k = 0; k <= d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i < d.nx; ++i)
                    if (k <= 1 || k >= d.nz - 1 || i <= 0 || i >= d.nx - 1 || j <= 0 ||
                        j >= d.ny - 1)
                        f.atZ(i, j, k) = 0;
    }
    return f;
}

}  // namespace

TEST_SUITE("field") {

TEST_CASE("divergence of constant flow is zero") {
    GridDims d{6, 6, 6, 0.25};
    StaggeredField v(d);
    for (double& x : v.x) x = 1.0;
    const ScalarField div = divergence(v);
    CHECK(fieldMaxAbs(div) == 0.0);
}

TEST_CASE("divergence of a linear x ramp is one") {
    GridDims d{4, 4, 4, 0.5};
    StaggeredField v(d);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i <= d.nx; ++i) v.atX(i, j, k) = i * d.h;
    const ScalarField div = divergence(v);
    for (double q : div.data) CHECK(q == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("divergence of the zero field is zero") {
    GridDims d{4, 5, 6, 0.1};
    CHECK(fieldMaxAbs(divergence(StaggeredField(d))) == 0.0);
}

TEST_CASE("gradient of a constant field is zero") {
    GridDims d{5, 5, 5, 0.2};
    ScalarField s(d);
    s.fill(3.25);
    CHECK(fieldMaxAbs(gradient(s)) == 0.0);
}

TEST_CASE("gradient of a z ramp is one on interior z faces") {
    GridDims d{4, 4, 4, 0.5};
    ScalarField s(d);
    for (int k = 0; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i) s.at(i, j, k) = k * d.h;
    const StaggeredField g = gradient(s);
    for (int k = 1; k < d.nz; ++k)
        for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
                CHECK(g.atZ(i, j, k) == doctest::Approx(1.0).epsilon(1e-13));
    for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
            CHECK(g.atZ(i, j, 0) == 0.0);
            CHECK(g.atZ(i, j, d.nz) == 0.0);
        }
}

TEST_CASE("divergence of gradient equals the explicit 7-point stencil") {
    GridDims d{8, 8, 8, 0.37};
    const ScalarField s = randomScalar(d, 42);
    const ScalarField divGrad = divergence(gradient(s));
    const SparseOperator L = buildLaplacianStencil(d);
    Vec ls(d.cells());
    L.apply(s.data, ls);
    double maxDiff = 0, scale = 0;
    for (std::size_t c = 0; c < d.cells(); ++c) {
        maxDiff = std::max(maxDiff, std::abs(divGrad.data[c] + ls[c]));  // L is -div grad
        scale = std::max(scale, std::abs(ls[c]));
    }
    CHECK(maxDiff <= 1e-12 * scale);
}

TEST_CASE("laplacian stencil rows") {
    GridDims d{5, 6, 7, 0.5};
    const SparseOperator L = buildLaplacianStencil(d);
    const double w = 1.0 / (d.h * d.h);

    const std::size_t interior = 2 + d.nx * (3 + std::size_t(d.ny) * 4);
    const auto rowPtr = L.rowPtr();
    const auto col = L.colIdx();
    const auto val = L.values();
    int offs = 0;
    double diag = 0;
    for (std::int64_t e = rowPtr[interior]; e < rowPtr[interior + 1]; ++e) {
        if (col[e] == interior)
            diag = val[e];
        else {
            CHECK(val[e] == doctest::Approx(-w));
            ++offs;
        }
    }
    CHECK(offs == 6);
    CHECK(diag == doctest::Approx(6 * w));

    for (std::size_t r = 0; r < L.rows(); ++r) {
        double s = 0;
        for (std::int64_t e = rowPtr[r]; e < rowPtr[r + 1]; ++e) s += val[e];
        CHECK(std::abs(s) <= 1e-12 * 6 * w);
    }

    Vec ones(d.cells(), 1.0), out(d.cells());
    L.apply(ones, out);
    for (double q : out) CHECK(std::abs(q) <= 1e-12 * 6 * w);
}

TEST_CASE("restrict and prolong preserve constants") {
    GridDims d{8, 8, 8, 0.25};
    ScalarField s(d);
    s.fill(3.0);
    const ScalarField c = restrictField(s);
    for (double q : c.data) CHECK(q == doctest::Approx(3.0).epsilon(1e-15));
    const ScalarField f = prolongField(c);
    for (double q : f.data) CHECK(q == doctest::Approx(3.0).epsilon(1e-15));

    StaggeredField v(d);
    v.fill(2.5);
    const StaggeredField cv = restrictField(v);
    CHECK(cv.atX(1, 1, 1) == doctest::Approx(2.5));
    const StaggeredField fv = prolongField(cv);
    CHECK(fieldMaxAbs(fv) == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("restrict rejects odd dims") {
    GridDims d{5, 6, 6, 0.25};
    CHECK_THROWS_AS(restrictField(ScalarField(d)), std::invalid_argument);
}

TEST_CASE("prolong of a 2^3 delta reproduces the tent weights") {
    GridDims d{2, 2, 2, 0.5};
    ScalarField c(d);
    c.at(0, 0, 0) = 1.0;
    const ScalarField f = prolongField(c);
    // per-axis weights of coarse cell 0 at fine positions 0..3: the tent
    // 0.75, 0.25 with both ends extrapolated to 1.25 and -0.25
    const double w[4] = {1.25, 0.75, 0.25, -0.25};
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i)
                CHECK(f.at(i, j, k) ==
                      doctest::Approx(w[i] * w[j] * w[k]).epsilon(1e-12).scale(1.0));
    // each axis fans a coarse cell onto 2 fine cells, so the sum scales by 8
    CHECK(fieldSum(f) == doctest::Approx(8.0 * fieldSum(c)).epsilon(1e-12));
}

TEST_CASE("restrict(prolong(x)) = x for constant and linear fields") {
    GridDims d{4, 4, 4, 0.5};
    SUBCASE("scalar linear in x") {
        ScalarField s(d);
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i < d.nx; ++i) s.at(i, j, k) = 2.0 * i + 1.0;
        const ScalarField rt = restrictField(prolongField(s));
        for (std::size_t c = 0; c < s.data.size(); ++c)
            CHECK(rt.data[c] == doctest::Approx(s.data[c]).epsilon(1e-12));
    }
    SUBCASE("staggered linear in its own axis") {
        StaggeredField v(d);
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i <= d.nx; ++i) v.atX(i, j, k) = 0.5 * i - 2.0;
        const StaggeredField rt = restrictField(prolongField(v));
        for (int k = 0; k < d.nz; ++k)
            for (int j = 0; j < d.ny; ++j)
                for (int i = 0; i <= d.nx; ++i)
                    CHECK(rt.atX(i, j, k) == doctest::Approx(v.atX(i, j, k)).epsilon(1e-12));
    }
}

TEST_CASE("gradient/divergence adjointness on interior-supported fields") {
    GridDims d{12, 12, 12, 0.13};
    for (unsigned seed : {1u, 2u, 3u}) {
        const ScalarField s = randomScalar(d, seed);
        const StaggeredField v = randomStaggered(d, seed + 100, true);
        const double lhs = fieldDot(gradient(s), v);
        const double rhs = -fieldDot(s, divergence(v));
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1.0));
    }
}

TEST_CASE("laplacian symmetry") {
    GridDims d{8, 8, 8, 0.21};
    const SparseOperator L = buildLaplacianStencil(d);
    for (unsigned seed : {7u, 8u}) {
        const ScalarField x = randomScalar(d, seed);
        const ScalarField y = randomScalar(d, seed + 50);
        Vec lx(d.cells()), ly(d.cells());
        L.apply(x.data, lx);
        L.apply(y.data, ly);
        double lxy = 0, xly = 0;
        for (std::size_t c = 0; c < d.cells(); ++c) {
            lxy += lx[c] * y.data[c];
            xly += x.data[c] * ly[c];
        }
        CHECK(std::abs(lxy - xly) <= 1e-12 * std::max(std::abs(lxy), 1.0));
    }
}

TEST_CASE("slab masks partition the domain") {
    GridDims d{8, 10, 8, 0.1};
    DomainMasks m = makeSlabMasks(d, 3);
    CHECK(masksConsistent(m));
    std::size_t inflow = 0;
    for (std::size_t c = 0; c < d.cells(); ++c) {
        CHECK((m.inflow[c] ^ m.visible[c]) == 1);
        inflow += m.inflow[c];
    }
    CHECK(inflow == std::size_t(8 * 3 * 8));
}

}  // TEST_SUITE
