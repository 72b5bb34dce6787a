#pragma once

#include <string>
#include <vector>

#include "sfr/grid.hpp"

namespace sfr {

struct Ray {
    double ox, oy, oz;
    double dx, dy, dz;  // normalized
};

// Pinhole model, OpenCV-style axes (x right, y down, z forward) with a
// world-to-camera rigid transform: x_cam = R x_world + t.
struct PinholeCamera {
    int width = 0, height = 0;
    double fx = 0, fy = 0, cx = 0, cy = 0;
    double R[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    double t[3] = {0, 0, 0};
};

// One calibrated view, materialized as a per-pixel ray list (row-major,
// pixel centers). Pinhole calibrations expand to this form on load.
struct CameraView {
    int width = 0, height = 0;
    std::vector<Ray> rays;
};

CameraView expandPinhole(const PinholeCamera& cam);

// Text calibration file: [viewN] sections with width/height/fx/fy/cx/cy,
// r00..r22 and tx/ty/tz keys.
std::vector<PinholeCamera> loadPinholeFile(const std::string& path);
void savePinholeFile(const std::string& path, const std::vector<PinholeCamera>& cams);

// Binary ray file: magic "SFRAY01\0", u32 pixel count, then f32 origin[3],
// dir[3] per pixel. One view per file; width*height must match the count.
CameraView loadRayFile(const std::string& path, int width, int height);
void saveRayFile(const std::string& path, const CameraView& view);

std::vector<CameraView> expandAll(const std::vector<PinholeCamera>& cams);

// Camera placed at `eye` looking at `target` with world +y as up.
PinholeCamera lookAtCamera(int width, int height, double fovYDegrees, const double eye[3],
                           const double target[3]);

}  // namespace sfr
