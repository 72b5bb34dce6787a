#include "sfr/camera.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace sfr {

CameraView expandPinhole(const PinholeCamera& cam) {
    if (cam.width <= 0 || cam.height <= 0 || cam.fx <= 0 || cam.fy <= 0)
        throw std::invalid_argument("pinhole camera has invalid intrinsics");
    CameraView v;
    v.width = cam.width;
    v.height = cam.height;
    v.rays.resize(std::size_t(cam.width) * cam.height);
    // origin = -Rᵀ t
    const double* R = cam.R;
    const double ox = -(R[0] * cam.t[0] + R[3] * cam.t[1] + R[6] * cam.t[2]);
    const double oy = -(R[1] * cam.t[0] + R[4] * cam.t[1] + R[7] * cam.t[2]);
    const double oz = -(R[2] * cam.t[0] + R[5] * cam.t[1] + R[8] * cam.t[2]);
    for (int py = 0; py < cam.height; ++py)
        for (int px = 0; px < cam.width; ++px) {
            const double xc = (px + 0.5 - cam.cx) / cam.fx;
            const double yc = (py + 0.5 - cam.cy) / cam.fy;
            // world dir = Rᵀ (xc, yc, 1)
            double dx = R[0] * xc + R[3] * yc + R[6];
            double dy = R[1] * xc + R[4] * yc + R[7];
            double dz = R[2] * xc + R[5] * yc + R[8];
            const double n = std::sqrt(dx * dx + dy * dy + dz * dz);
            Ray& r = v.rays[std::size_t(py) * cam.width + px];
            r.ox = ox;
            r.oy = oy;
            r.oz = oz;
            r.dx = dx / n;
            r.dy = dy / n;
            r.dz = dz / n;
        }
    return v;
}

std::vector<CameraView> expandAll(const std::vector<PinholeCamera>& cams) {
    std::vector<CameraView> views;
    views.reserve(cams.size());
    for (const auto& c : cams) views.push_back(expandPinhole(c));
    return views;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<PinholeCamera> loadPinholeFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open calibration file: " + path);
    std::map<int, std::map<std::string, double>> sections;
    int current = -1;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            std::string name = s.substr(1, s.size() - 2);
            if (name.rfind("view", 0) != 0)
                throw std::runtime_error(path + ": unknown section [" + name + "]");
            current = std::stoi(name.substr(4));
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos || current < 0)
            throw std::runtime_error(path + ": bad calibration line " + std::to_string(lineNo));
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        sections[current][key] = std::stod(val);
    }
    std::vector<PinholeCamera> cams;
    for (const auto& [id, kv] : sections) {
        (void)id;
        PinholeCamera c;
        auto get = [&](const std::string& k) {
            auto it = kv.find(k);
            if (it == kv.end()) throw std::runtime_error(path + ": missing key " + k);
            return it->second;
        };
        c.width = int(get("width"));
        c.height = int(get("height"));
        c.fx = get("fx");
        c.fy = get("fy");
        c.cx = get("cx");
        c.cy = get("cy");
        const char* rk[9] = {"r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22"};
        for (int i = 0; i < 9; ++i) c.R[i] = get(rk[i]);
        c.t[0] = get("tx");
        c.t[1] = get("ty");
        c.t[2] = get("tz");
        cams.push_back(c);
    }
    if (cams.empty()) throw std::runtime_error(path + ": no views");
    return cams;
}

void savePinholeFile(const std::string& path, const std::vector<PinholeCamera>& cams) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write calibration file: " + path);
    out.precision(17);
    for (std::size_t v = 0; v < cams.size(); ++v) {
        const PinholeCamera& c = cams[v];
        out << "[view" << v << "]\n";
        out << "width = " << c.width << "\nheight = " << c.height << "\n";
        out << "fx = " << c.fx << "\nfy = " << c.fy << "\ncx = " << c.cx << "\ncy = " << c.cy
            << "\n";
        const char* rk[9] = {"r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22"};
        for (int i = 0; i < 9; ++i) out << rk[i] << " = " << c.R[i] << "\n";
        out << "tx = " << c.t[0] << "\nty = " << c.t[1] << "\ntz = " << c.t[2] << "\n\n";
    }
}

namespace {
constexpr char kRayMagic[8] = {'S', 'F', 'R', 'A', 'Y', '0', '1', '\0'};
}

CameraView loadRayFile(const std::string& path, int width, int height) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open ray file: " + path);
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> guard(f, std::fclose);
    char magic[8];
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kRayMagic, 8) != 0)
        throw std::runtime_error("bad ray file magic: " + path);
    std::uint32_t count = 0;
    if (std::fread(&count, 4, 1, f) != 1) throw std::runtime_error("truncated ray file: " + path);
    if (count != std::uint32_t(width) * std::uint32_t(height))
        throw std::runtime_error("ray count does not match image dims: " + path);
    CameraView v;
    v.width = width;
    v.height = height;
    v.rays.resize(count);
    std::vector<float> buf(count * 6);
    if (std::fread(buf.data(), 4, buf.size(), f) != buf.size())
        throw std::runtime_error("truncated ray payload: " + path);
    for (std::uint32_t i = 0; i < count; ++i) {
        Ray& r = v.rays[i];
        r.ox = buf[i * 6 + 0];
        r.oy = buf[i * 6 + 1];
        r.oz = buf[i * 6 + 2];
        const double dx = buf[i * 6 + 3], dy = buf[i * 6 + 4], dz = buf[i * 6 + 5];
        const double n = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (n == 0) throw std::runtime_error("zero ray direction in " + path);
        r.dx = dx / n;
        r.dy = dy / n;
        r.dz = dz / n;
    }
    return v;
}

void saveRayFile(const std::string& path, const CameraView& view) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write ray file: " + path);
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> guard(f, std::fclose);
    std::fwrite(kRayMagic, 1, 8, f);
    const std::uint32_t count = std::uint32_t(view.rays.size());
    std::fwrite(&count, 4, 1, f);
    std::vector<float> buf;
    buf.reserve(count * 6);
    for (const Ray& r : view.rays) {
        buf.push_back(float(r.ox));
        buf.push_back(float(r.oy));
        buf.push_back(float(r.oz));
        buf.push_back(float(r.dx));
        buf.push_back(float(r.dy));
        buf.push_back(float(r.dz));
    }
    if (std::fwrite(buf.data(), 4, buf.size(), f) != buf.size())
        throw std::runtime_error("ray file write failed: " + path);
}

PinholeCamera lookAtCamera(int width, int height, double fovYDegrees, const double eye[3],
                           const double target[3]) {
    PinholeCamera c;
    c.width = width;
    c.height = height;
    const double fovY = fovYDegrees * M_PI / 180.0;
    c.fy = 0.5 * height / std::tan(0.5 * fovY);
    c.fx = c.fy;
    c.cx = 0.5 * width;
    c.cy = 0.5 * height;

    // Forward (camera z) towards the target; camera y points down in world.
    double fz[3] = {target[0] - eye[0], target[1] - eye[1], target[2] - eye[2]};
    const double fn = std::sqrt(fz[0] * fz[0] + fz[1] * fz[1] + fz[2] * fz[2]);
    if (fn == 0) throw std::invalid_argument("lookAtCamera: eye == target");
    for (double& v : fz) v /= fn;
    const double worldUp[3] = {0, 1, 0};
    // right = forward x up (left-handed on purpose: y_cam is down)
    double rx[3] = {fz[1] * worldUp[2] - fz[2] * worldUp[1], fz[2] * worldUp[0] - fz[0] * worldUp[2],
                    fz[0] * worldUp[1] - fz[1] * worldUp[0]};
    const double rn = std::sqrt(rx[0] * rx[0] + rx[1] * rx[1] + rx[2] * rx[2]);
    if (rn < 1e-12) throw std::invalid_argument("lookAtCamera: view direction parallel to up");
    for (double& v : rx) v /= rn;
    // down = forward x right
    double dy[3] = {fz[1] * rx[2] - fz[2] * rx[1], fz[2] * rx[0] - fz[0] * rx[2],
                    fz[0] * rx[1] - fz[1] * rx[0]};
    // rows of R are the camera axes in world coordinates
    c.R[0] = rx[0]; c.R[1] = rx[1]; c.R[2] = rx[2];
    c.R[3] = dy[0]; c.R[4] = dy[1]; c.R[5] = dy[2];
    c.R[6] = fz[0]; c.R[7] = fz[1]; c.R[8] = fz[2];
    // t = -R eye
    c.t[0] = -(c.R[0] * eye[0] + c.R[1] * eye[1] + c.R[2] * eye[2]);
    c.t[1] = -(c.R[3] * eye[0] + c.R[4] * eye[1] + c.R[5] * eye[2]);
    c.t[2] = -(c.R[6] * eye[0] + c.R[7] * eye[1] + c.R[8] * eye[2]);
    return c;
}

}  // namespace sfr
