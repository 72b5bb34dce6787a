#include "sfr/volume_io.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace sfr {

namespace {

constexpr char kMagic[8] = {'S', 'F', 'V', 'O', 'L', '0', '1', '\0'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void writeHeader(std::FILE* f, const GridDims& d, std::uint32_t channels) {
    char header[32] = {};
    std::memcpy(header, kMagic, 8);
    const std::uint32_t nx = d.nx, ny = d.ny, nz = d.nz;
    const float h = float(d.h);
    std::memcpy(header + 8, &nx, 4);
    std::memcpy(header + 12, &ny, 4);
    std::memcpy(header + 16, &nz, 4);
    std::memcpy(header + 20, &channels, 4);
    std::memcpy(header + 24, &h, 4);
    if (std::fwrite(header, 1, 32, f) != 32) throw std::runtime_error("volume write failed");
}

void writePayload(std::FILE* f, const std::vector<double>& data) {
    std::vector<float> buf(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) buf[i] = float(data[i]);
    if (std::fwrite(buf.data(), 4, buf.size(), f) != buf.size())
        throw std::runtime_error("volume write failed");
}

GridDims readHeader(std::FILE* f, const std::string& path, std::uint32_t expectChannels) {
    char header[32];
    if (std::fread(header, 1, 32, f) != 32) throw std::runtime_error("truncated volume: " + path);
    if (std::memcmp(header, kMagic, 8) != 0) throw std::runtime_error("bad volume magic: " + path);
    std::uint32_t nx, ny, nz, channels;
    float h;
    std::memcpy(&nx, header + 8, 4);
    std::memcpy(&ny, header + 12, 4);
    std::memcpy(&nz, header + 16, 4);
    std::memcpy(&channels, header + 20, 4);
    std::memcpy(&h, header + 24, 4);
    if (channels != expectChannels)
        throw std::runtime_error("volume channel mismatch: " + path);
    return GridDims{int(nx), int(ny), int(nz), double(h)};
}

void readPayload(std::FILE* f, const std::string& path, std::vector<double>& out) {
    std::vector<float> buf(out.size());
    if (std::fread(buf.data(), 4, buf.size(), f) != buf.size())
        throw std::runtime_error("truncated volume payload: " + path);
    for (std::size_t i = 0; i < buf.size(); ++i) out[i] = double(buf[i]);
}

}  // namespace

void writeVolume(const std::string& path, const ScalarField& f) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for write: " + path);
    writeHeader(fp.get(), f.dims, 1);
    writePayload(fp.get(), f.data);
}

void writeVolume(const std::string& path, const StaggeredField& f) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw std::runtime_error("cannot open for write: " + path);
    writeHeader(fp.get(), f.dims, 3);
    writePayload(fp.get(), f.x);
    writePayload(fp.get(), f.y);
    writePayload(fp.get(), f.z);
}

ScalarField readScalarVolume(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open: " + path);
    const GridDims d = readHeader(fp.get(), path, 1);
    ScalarField f(d);
    readPayload(fp.get(), path, f.data);
    return f;
}

StaggeredField readStaggeredVolume(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw std::runtime_error("cannot open: " + path);
    const GridDims d = readHeader(fp.get(), path, 3);
    StaggeredField f(d);
    readPayload(fp.get(), path, f.x);
    readPayload(fp.get(), path, f.y);
    readPayload(fp.get(), path, f.z);
    return f;
}

void quantizeToStorage(ScalarField& f) {
    for (double& v : f.data) v = double(float(v));
}

void quantizeToStorage(StaggeredField& f) {
    for (double& v : f.x) v = double(float(v));
    for (double& v : f.y) v = double(float(v));
    for (double& v : f.z) v = double(float(v));
}

}  // namespace sfr
