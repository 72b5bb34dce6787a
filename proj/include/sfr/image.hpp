#pragma once

#include <string>
#include <vector>

namespace sfr {

// Grayscale float image, row-major, row 0 at the top.
struct Image {
    int width = 0, height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(std::size_t(w) * h, 0.0) {}
    double& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
    double at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
};

struct ImageSet {
    std::vector<Image> views;

    std::size_t totalPixels() const {
        std::size_t n = 0;
        for (const auto& v : views) n += v.pixels.size();
        return n;
    }
    double maxValue() const;
};

// PFM, grayscale ("Pf"), little-endian, bottom row first per convention.
void writePfm(const std::string& path, const Image& img);
Image readPfm(const std::string& path);

// 8-bit binary PGM (P5); values are scaled by `scale` and clamped to [0,255].
void writePgm(const std::string& path, const Image& img, double scale = 255.0);
Image readPgm(const std::string& path, double scale = 1.0 / 255.0);

Image readImageAuto(const std::string& path);  // dispatch on extension

}  // namespace sfr
