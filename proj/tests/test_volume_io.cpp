#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "sfr/image.hpp"
#include "sfr/volume_io.hpp"

using namespace sfr;

namespace {

std::string tmpPath(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("volume") {

TEST_CASE("scalar volume round trip is exact for f32 data") {
    GridDims d{5, 7, 4, 0.125};
    ScalarField f(d);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (double& v : f.data) v = uni(rng);
    quantizeToStorage(f);
    const std::string path = tmpPath("sfr_vol_test.vol");
    writeVolume(path, f);
    const ScalarField g = readScalarVolume(path);
    CHECK(g.dims.nx == d.nx);
    CHECK(g.dims.ny == d.ny);
    CHECK(g.dims.nz == d.nz);
    CHECK(g.dims.h == doctest::Approx(d.h));
    CHECK(g.data == f.data);
    std::remove(path.c_str());
}

TEST_CASE("volume header layout is exactly 32 bytes + payload") {
    GridDims d{4, 4, 4, 0.5};
    ScalarField f(d);
    const std::string path = tmpPath("sfr_vol_hdr.vol");
    writeVolume(path, f);
    CHECK(std::filesystem::file_size(path) == 32 + 4 * d.cells());
    std::ifstream in(path, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    CHECK(std::string(magic, 8) == std::string("SFVOL01\0", 8));
    std::uint32_t nx, ny, nz, ch;
    in.read(reinterpret_cast<char*>(&nx), 4);
    in.read(reinterpret_cast<char*>(&ny), 4);
    in.read(reinterpret_cast<char*>(&nz), 4);
    in.read(reinterpret_cast<char*>(&ch), 4);
    CHECK(nx == 4);
    CHECK(ny == 4);
    CHECK(nz == 4);
    CHECK(ch == 1);
    std::remove(path.c_str());
}

TEST_CASE("staggered volume round trip") {
    GridDims d{4, 6, 5, 0.25};
    StaggeredField f(d);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (double& v : f.x) v = uni(rng);
    for (double& v : f.y) v = uni(rng);
    for (double& v : f.z) v = uni(rng);
    quantizeToStorage(f);
    const std::string path = tmpPath("sfr_vol_stag.vol");
    writeVolume(path, f);
    const StaggeredField g = readStaggeredVolume(path);
    CHECK(g.x == f.x);
    CHECK(g.y == f.y);
    CHECK(g.z == f.z);
    CHECK(std::filesystem::file_size(path) == 32 + 4 * f.totalFaces());
    // scalar reader must refuse the 3-channel file
    CHECK_THROWS(readScalarVolume(path));
    std::remove(path.c_str());
}

TEST_CASE("pfm image round trip") {
    Image img(7, 5);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> uni(0.0, 2.0);
    for (double& p : img.pixels) p = double(float(uni(rng)));
    const std::string path = tmpPath("sfr_img.pfm");
    writePfm(path, img);
    const Image back = readPfm(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
    std::remove(path.c_str());
}

TEST_CASE("pgm image round trip quantizes to 8 bits") {
    Image img(4, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) img.at(x, y) = (x + 4 * y) / 11.0;
    const std::string path = tmpPath("sfr_img.pgm");
    writePgm(path, img);
    const Image back = readPgm(path);
    for (std::size_t p = 0; p < img.pixels.size(); ++p)
        CHECK(back.pixels[p] == doctest::Approx(img.pixels[p]).epsilon(0.01).scale(1.0));
    std::remove(path.c_str());
}

}  // TEST_SUITE
