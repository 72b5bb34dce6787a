#include "sfr/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace sfr {

double ImageSet::maxValue() const {
    double m = 0;
    for (const auto& v : views)
        for (double p : v.pixels) m = std::max(m, p);
    return m;
}

namespace {

using FileGuard = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FileGuard openFile(const std::string& path, const char* mode) {
    std::FILE* f = std::fopen(path.c_str(), mode);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return FileGuard(f, std::fclose);
}

}  // namespace

void writePfm(const std::string& path, const Image& img) {
    auto f = openFile(path, "wb");
    std::fprintf(f.get(), "Pf\n%d %d\n-1.0\n", img.width, img.height);
    // PFM stores the bottom row first.
    std::vector<float> row(img.width);
    for (int y = img.height - 1; y >= 0; --y) {
        for (int x = 0; x < img.width; ++x) row[x] = float(img.at(x, y));
        if (std::fwrite(row.data(), 4, row.size(), f.get()) != row.size())
            throw std::runtime_error("pfm write failed: " + path);
    }
}

Image readPfm(const std::string& path) {
    auto f = openFile(path, "rb");
    char tag[3] = {};
    if (std::fscanf(f.get(), "%2s", tag) != 1 || std::strcmp(tag, "Pf") != 0)
        throw std::runtime_error("not a grayscale PFM: " + path);
    int w = 0, h = 0;
    double scale = 0;
    if (std::fscanf(f.get(), "%d %d %lf", &w, &h, &scale) != 3 || w <= 0 || h <= 0)
        throw std::runtime_error("bad PFM header: " + path);
    std::fgetc(f.get());  // single whitespace after scale
    if (scale >= 0) throw std::runtime_error("big-endian PFM unsupported: " + path);
    Image img(w, h);
    std::vector<float> row(w);
    for (int y = h - 1; y >= 0; --y) {
        if (std::fread(row.data(), 4, row.size(), f.get()) != row.size())
            throw std::runtime_error("truncated PFM: " + path);
        for (int x = 0; x < w; ++x) img.at(x, y) = double(row[x]);
    }
    return img;
}

void writePgm(const std::string& path, const Image& img, double scale) {
    auto f = openFile(path, "wb");
    std::fprintf(f.get(), "P5\n%d %d\n255\n", img.width, img.height);
    std::vector<unsigned char> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double v = std::clamp(img.at(x, y) * scale, 0.0, 255.0);
            row[x] = (unsigned char)std::lround(v);
        }
        if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size())
            throw std::runtime_error("pgm write failed: " + path);
    }
}

Image readPgm(const std::string& path, double scale) {
    auto f = openFile(path, "rb");
    char tag[3] = {};
    if (std::fscanf(f.get(), "%2s", tag) != 1 || std::strcmp(tag, "P5") != 0)
        throw std::runtime_error("not a binary PGM: " + path);
    int w = 0, h = 0, maxv = 0;
    if (std::fscanf(f.get(), "%d %d %d", &w, &h, &maxv) != 3 || w <= 0 || h <= 0 || maxv != 255)
        throw std::runtime_error("bad PGM header: " + path);
    std::fgetc(f.get());
    Image img(w, h);
    std::vector<unsigned char> row(w);
    for (int y = 0; y < h; ++y) {
        if (std::fread(row.data(), 1, row.size(), f.get()) != row.size())
            throw std::runtime_error("truncated PGM: " + path);
        for (int x = 0; x < w; ++x) img.at(x, y) = row[x] * scale;
    }
    return img;
}

Image readImageAuto(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pfm") == 0) return readPfm(path);
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0) return readPgm(path);
    throw std::runtime_error("unsupported image extension: " + path);
}

}  // namespace sfr
