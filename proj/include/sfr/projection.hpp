#pragma once

#include "sfr/camera.hpp"
#include "sfr/image.hpp"
#include "sfr/sparse.hpp"

namespace sfr {

// Linear image formation: one sparse row per pixel holding (voxel, weight)
// pairs, weight = trilinear sample weight x step length along the ray (world
// units). Rows over all views are concatenated. PᵀP is never materialized.
class ProjectionOperator : public LinearOperator {
public:
    struct ViewInfo {
        int width = 0, height = 0;
        std::size_t offset = 0;  // first pixel row of this view
    };

    std::size_t rows() const override { return pixelCount_; }
    std::size_t cols() const override { return dims_.cells(); }
    void apply(std::span<const double> x, std::span<double> y) const override;
    void applyTranspose(std::span<const double> y, std::span<double> x) const override;

    const GridDims& dims() const { return dims_; }
    const std::vector<ViewInfo>& views() const { return views_; }
    std::span<const std::int64_t> rowPtr() const { return rowPtr_; }
    std::span<const std::uint32_t> colIdx() const { return col_; }
    std::span<const float> weights() const { return wgt_; }
    std::size_t nnz() const { return wgt_.size(); }
    double visibleYMin() const { return visibleYMin_; }

    friend ProjectionOperator buildProjection(const std::vector<CameraView>& cams,
                                              const GridDims& dims, double visibleYMin,
                                              double stepScale);

private:
    GridDims dims_;
    std::vector<ViewInfo> views_;
    std::size_t pixelCount_ = 0;
    std::vector<std::int64_t> rowPtr_;
    std::vector<std::uint32_t> col_;
    std::vector<float> wgt_;
    double visibleYMin_ = 0;
};

// March every pixel ray through the grid box (y >= visibleYMin) at step
// <= stepScale*h, accumulating trilinear gather weights. Throws if no ray
// touches the domain at all.
ProjectionOperator buildProjection(const std::vector<CameraView>& cams, const GridDims& dims,
                                   double visibleYMin = 0.0, double stepScale = 0.5);

// i = P * density, reshaped per view. Rejects negative densities.
ImageSet render(const ProjectionOperator& P, const ScalarField& density);

Vec flattenImages(const ImageSet& images);
ImageSet unflattenImages(const ProjectionOperator& P, std::span<const double> pixels);

struct HullParams {
    double weightKeep = 1e-4;     // per-voxel contribution (cell units) to enter the system
    double weightExclude = 1e-2;  // contribution from an empty pixel that carves the voxel
    double pixelFloor = 1e-3;     // of the image set's max value; below = empty pixel
};

// Voxels kept: touched by some pixel with weight/h > weightKeep and not
// touched by any empty pixel with weight/h > weightExclude.
Mask computeVisualHull(const ImageSet& images, const ProjectionOperator& P,
                       const HullParams& params = {});

}  // namespace sfr
