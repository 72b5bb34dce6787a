#include "sfr/projection.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sfr {

void ProjectionOperator::apply(std::span<const double> x, std::span<double> y) const {
    assert(x.size() == cols() && y.size() == rows());
    for (std::size_t r = 0; r < pixelCount_; ++r) {
        double s = 0;
        for (std::int64_t e = rowPtr_[r]; e < rowPtr_[r + 1]; ++e)
            s += double(wgt_[e]) * x[col_[e]];
        y[r] = s;
    }
}

void ProjectionOperator::applyTranspose(std::span<const double> y, std::span<double> x) const {
    assert(x.size() == cols() && y.size() == rows());
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t r = 0; r < pixelCount_; ++r) {
        const double v = y[r];
        if (v == 0.0) continue;
        for (std::int64_t e = rowPtr_[r]; e < rowPtr_[r + 1]; ++e)
            x[col_[e]] += double(wgt_[e]) * v;
    }
}

namespace {

bool rayBox(const Ray& r, const double lo[3], const double hi[3], double& t0, double& t1) {
    t0 = 0;
    t1 = 1e30;
    const double o[3] = {r.ox, r.oy, r.oz};
    const double d[3] = {r.dx, r.dy, r.dz};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-14) {
            if (o[a] < lo[a] || o[a] > hi[a]) return false;
            continue;
        }
        double ta = (lo[a] - o[a]) / d[a];
        double tb = (hi[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t1 > t0;
}

}  // namespace

ProjectionOperator buildProjection(const std::vector<CameraView>& cams, const GridDims& dims,
                                   double visibleYMin, double stepScale) {
    requireValid(dims);
    if (cams.empty()) throw std::invalid_argument("buildProjection: no views");
    if (stepScale <= 0 || stepScale > 0.5)
        throw std::invalid_argument("buildProjection: step must be <= h/2");
    ProjectionOperator P;
    P.dims_ = dims;
    P.visibleYMin_ = visibleYMin;
    std::size_t pixels = 0;
    for (const auto& v : cams) {
        P.views_.push_back({v.width, v.height, pixels});
        pixels += v.rays.size();
    }
    P.pixelCount_ = pixels;
    P.rowPtr_.assign(pixels + 1, 0);

    const double lo[3] = {0.0, std::max(0.0, visibleYMin), 0.0};
    const double hi[3] = {dims.nx * dims.h, dims.ny * dims.h, dims.nz * dims.h};
    const double step = stepScale * dims.h;
    const double invH = 1.0 / dims.h;

    std::vector<std::pair<std::uint32_t, double>> taps;
    std::size_t row = 0;
    for (const auto& view : cams) {
        for (const Ray& ray : view.rays) {
            taps.clear();
            double t0, t1;
            if (rayBox(ray, lo, hi, t0, t1)) {
                const double chord = t1 - t0;
                const int n = std::max(1, int(std::ceil(chord / step)));
                const double ds = chord / n;
                for (int m = 0; m < n; ++m) {
                    const double t = t0 + (m + 0.5) * ds;
                    double cx = (ray.ox + t * ray.dx) * invH - 0.5;
                    double cy = (ray.oy + t * ray.dy) * invH - 0.5;
                    double cz = (ray.oz + t * ray.dz) * invH - 0.5;
                    cx = std::clamp(cx, 0.0, double(dims.nx - 1));
                    cy = std::clamp(cy, 0.0, double(dims.ny - 1));
                    cz = std::clamp(cz, 0.0, double(dims.nz - 1));
                    const double bx = std::floor(cx), by = std::floor(cy), bz = std::floor(cz);
                    const int i = int(bx), j = int(by), k = int(bz);
                    const double fx = cx - bx, fy = cy - by, fz = cz - bz;
                    const int i1 = std::min(i + 1, dims.nx - 1);
                    const int j1 = std::min(j + 1, dims.ny - 1);
                    const int k1 = std::min(k + 1, dims.nz - 1);
                    auto idx = [&](int a, int b, int c) {
                        return std::uint32_t(std::size_t(a) +
                                             std::size_t(dims.nx) * (std::size_t(b) + std::size_t(dims.ny) * c));
                    };
                    const double w000 = (1 - fx) * (1 - fy) * (1 - fz) * ds;
                    const double w100 = fx * (1 - fy) * (1 - fz) * ds;
                    const double w010 = (1 - fx) * fy * (1 - fz) * ds;
                    const double w110 = fx * fy * (1 - fz) * ds;
                    const double w001 = (1 - fx) * (1 - fy) * fz * ds;
                    const double w101 = fx * (1 - fy) * fz * ds;
                    const double w011 = (1 - fx) * fy * fz * ds;
                    const double w111 = fx * fy * fz * ds;
                    if (w000 > 0) taps.emplace_back(idx(i, j, k), w000);
                    if (w100 > 0) taps.emplace_back(idx(i1, j, k), w100);
                    if (w010 > 0) taps.emplace_back(idx(i, j1, k), w010);
                    if (w110 > 0) taps.emplace_back(idx(i1, j1, k), w110);
                    if (w001 > 0) taps.emplace_back(idx(i, j, k1), w001);
                    if (w101 > 0) taps.emplace_back(idx(i1, j, k1), w101);
                    if (w011 > 0) taps.emplace_back(idx(i, j1, k1), w011);
                    if (w111 > 0) taps.emplace_back(idx(i1, j1, k1), w111);
                }
                std::sort(taps.begin(), taps.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                std::size_t out = 0;
                for (std::size_t e = 0; e < taps.size(); ++e) {
                    if (out > 0 && taps[out - 1].first == taps[e].first)
                        taps[out - 1].second += taps[e].second;
                    else
                        taps[out++] = taps[e];
                }
                taps.resize(out);
            }
            for (const auto& [c, w] : taps) {
                P.col_.push_back(c);
                P.wgt_.push_back(float(w));
            }
            P.rowPtr_[row + 1] = std::int64_t(P.col_.size());
            ++row;
        }
    }
    if (P.wgt_.empty())
        throw std::runtime_error("buildProjection: no ray intersects the domain");
    return P;
}

ImageSet render(const ProjectionOperator& P, const ScalarField& density) {
    if (!(density.dims == P.dims())) throw std::invalid_argument("render: dims mismatch");
    for (double v : density.data)
        if (v < 0) throw std::invalid_argument("render: density must be >= 0");
    Vec pix(P.rows());
    P.apply(density.data, pix);
    return unflattenImages(P, pix);
}

Vec flattenImages(const ImageSet& images) {
    Vec out;
    out.reserve(images.totalPixels());
    for (const auto& v : images.views) out.insert(out.end(), v.pixels.begin(), v.pixels.end());
    return out;
}

ImageSet unflattenImages(const ProjectionOperator& P, std::span<const double> pixels) {
    if (pixels.size() != P.rows()) throw std::invalid_argument("unflattenImages: size mismatch");
    ImageSet set;
    for (const auto& vi : P.views()) {
        Image img(vi.width, vi.height);
        std::copy(pixels.begin() + vi.offset, pixels.begin() + vi.offset + img.pixels.size(),
                  img.pixels.begin());
        set.views.push_back(std::move(img));
    }
    return set;
}

Mask computeVisualHull(const ImageSet& images, const ProjectionOperator& P,
                       const HullParams& params) {
    if (images.totalPixels() != P.rows())
        throw std::invalid_argument("computeVisualHull: image/operator mismatch");
    const Vec pix = flattenImages(images);
    const double maxVal = images.maxValue();
    const double floor = params.pixelFloor * maxVal;
    const double h = P.dims().h;
    const float keepW = float(params.weightKeep * h);
    const float exclW = float(params.weightExclude * h);

    Mask covered(P.cols(), 0);
    Mask carved(P.cols(), 0);
    const auto rowPtr = P.rowPtr();
    const auto col = P.colIdx();
    const auto wgt = P.weights();
    for (std::size_t r = 0; r < P.rows(); ++r) {
        const bool empty = (maxVal == 0.0) || (pix[r] < floor);
        for (std::int64_t e = rowPtr[r]; e < rowPtr[r + 1]; ++e) {
            if (wgt[e] > keepW) covered[col[e]] = 1;
            if (empty && wgt[e] > exclW) carved[col[e]] = 1;
        }
    }
    Mask hull(P.cols(), 0);
    for (std::size_t c = 0; c < hull.size(); ++c) hull[c] = covered[c] && !carved[c];
    return hull;
}

}  // namespace sfr
