#include "sfr/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sfr {

namespace {

struct Key {
    std::function<std::string(const ReconConfig&)> get;
    std::function<void(ReconConfig&, const std::string&)> set;
};

std::string fmtD(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double parseD(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad number: " + s);
    return v;
}

long parseI(const std::string& s) {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad integer: " + s);
    return v;
}

// Declaration order doubles as the canonical file order.
const std::vector<std::pair<std::string, Key>>& keyTable() {
    static const std::vector<std::pair<std::string, Key>> table = [] {
        std::vector<std::pair<std::string, Key>> t;
        auto d = [&t](const char* name, double ReconConfig::*f) {
            t.push_back({name, Key{[f](const ReconConfig& c) { return fmtD(c.*f); },
                                   [f](ReconConfig& c, const std::string& v) { c.*f = parseD(v); }}});
        };
        auto i = [&t](const char* name, int ReconConfig::*f) {
            t.push_back({name, Key{[f](const ReconConfig& c) { return std::to_string(c.*f); },
                                   [f](ReconConfig& c, const std::string& v) { c.*f = int(parseI(v)); }}});
        };
        auto u = [&t](const char* name, std::uint64_t ReconConfig::*f) {
            t.push_back({name, Key{[f](const ReconConfig& c) { return std::to_string(c.*f); },
                                   [f](ReconConfig& c, const std::string& v) {
                                       c.*f = std::uint64_t(std::stoull(v));
                                   }}});
        };
        auto s = [&t](const char* name, std::string ReconConfig::*f) {
            t.push_back({name, Key{[f](const ReconConfig& c) { return c.*f; },
                                   [f](ReconConfig& c, const std::string& v) { c.*f = v; }}});
        };
        i("grid.nx", &ReconConfig::nx);
        i("grid.ny", &ReconConfig::ny);
        i("grid.nz", &ReconConfig::nz);
        d("grid.h", &ReconConfig::h);
        i("grid.inflow_slab", &ReconConfig::inflowSlab);
        d("time.dt", &ReconConfig::dt);
        i("time.frames", &ReconConfig::frames);
        s("cameras.file", &ReconConfig::cameraFile);
        i("cameras.views", &ReconConfig::views);
        i("cameras.image_width", &ReconConfig::imageWidth);
        i("cameras.image_height", &ReconConfig::imageHeight);
        d("cameras.arc_degrees", &ReconConfig::arcDegrees);
        d("cameras.distance", &ReconConfig::cameraDistance);
        d("cameras.fov_y_degrees", &ReconConfig::fovYDegrees);
        d("sim.viscosity", &ReconConfig::viscosity);
        d("sim.buoyancy", &ReconConfig::buoyancy);
        d("sim.source_radius", &ReconConfig::sourceRadius);
        d("sim.source_density", &ReconConfig::sourceDensity);
        d("sim.noise_amp", &ReconConfig::noiseAmp);
        u("sim.seed", &ReconConfig::seed);
        d("recon.inflow_speed", &ReconConfig::inflowSpeed);
        i("recon.pd_iterations", &ReconConfig::pdIterations);
        d("recon.cgls_tol", &ReconConfig::cglsTol);
        i("recon.cgls_max_iter", &ReconConfig::cglsMaxIter);
        d("recon.cg_tol", &ReconConfig::cgTol);
        i("recon.cg_max_iter", &ReconConfig::cgMaxIter);
        d("recon.pressure_tol", &ReconConfig::pressureTol);
        i("recon.pressure_max_iter", &ReconConfig::pressureMaxIter);
        d("recon.projection_step", &ReconConfig::projectionStep);
        s("recon.ablation", &ReconConfig::ablation);
        d("recon.hull_pixel_floor", &ReconConfig::hullPixelFloor);
        d("recon.hull_weight_keep", &ReconConfig::hullWeightKeep);
        d("recon.hull_weight_exclude", &ReconConfig::hullWeightExclude);
        d("reg.velocity_smooth", &ReconConfig::velocitySmooth);
        d("reg.velocity_kinetic", &ReconConfig::velocityKinetic);
        d("reg.density_smooth", &ReconConfig::densitySmooth);
        d("reg.density_kinetic", &ReconConfig::densityKinetic);
        d("reg.inflow_smooth", &ReconConfig::inflowSmooth);
        d("reg.inflow_kinetic", &ReconConfig::inflowKinetic);
        i("bench.instances", &ReconConfig::instances);
        s("bench.variant", &ReconConfig::variant);
        s("output.dir", &ReconConfig::outDir);
        return t;
    }();
    return table;
}

const Key* findKey(const std::string& name) {
    for (const auto& [n, k] : keyTable())
        if (n == name) return &k;
    return nullptr;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void ReconConfig::validate() const {
    if (!gridDims().valid()) throw std::invalid_argument("config: invalid grid dims");
    if (inflowSlab < 1 || inflowSlab >= ny)
        throw std::invalid_argument("config: inflow_slab out of range");
    if (dt <= 0 || frames < 1) throw std::invalid_argument("config: bad time settings");
    if (views < 1 || imageWidth < 4 || imageHeight < 4)
        throw std::invalid_argument("config: bad camera settings");
    if (cglsTol <= 0 || cgTol <= 0 || pressureTol <= 0)
        throw std::invalid_argument("config: tolerances must be > 0");
    if (cglsMaxIter < 1 || cgMaxIter < 1 || pressureMaxIter < 1 || pdIterations < 1)
        throw std::invalid_argument("config: iteration limits must be >= 1");
    if (projectionStep <= 0 || projectionStep > 0.5)
        throw std::invalid_argument("config: projection_step must be in (0, 0.5]");
    if (velocitySmooth < 0 || velocityKinetic < 0 || densitySmooth < 0 || densityKinetic < 0 ||
        inflowSmooth < 0 || inflowKinetic < 0)
        throw std::invalid_argument("config: regularizer weights must be >= 0");
    if (ablation != "full" && ablation != "vb")
        throw std::invalid_argument("config: ablation must be 'full' or 'vb'");
    if (variant != "base" && variant != "wide-inflow" && variant != "buoyant-1.5x" &&
        variant != "double-res-truth")
        throw std::invalid_argument("config: unknown bench variant '" + variant + "'");
    if (instances < 1) throw std::invalid_argument("config: instances must be >= 1");
    if (viscosity < 0 || buoyancy < 0 || sourceDensity < 0 || noiseAmp < 0 || noiseAmp > 1)
        throw std::invalid_argument("config: bad sim parameters");
    if (inflowSpeed < 0) throw std::invalid_argument("config: inflow_speed must be >= 0");
}

std::string ReconConfig::canonicalText() const {
    std::ostringstream os;
    std::string section;
    for (const auto& [name, key] : keyTable()) {
        const std::string sec = name.substr(0, name.find('.'));
        if (sec != section) {
            if (!section.empty()) os << "\n";
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << name.substr(name.find('.') + 1) << " = " << key.get(*this) << "\n";
    }
    return os.str();
}

std::uint64_t ReconConfig::hash() const {
    // FNV-1a over the canonical text
    std::uint64_t h = 1469598103934665603ull;
    for (char c : canonicalText()) {
        h ^= std::uint64_t(static_cast<unsigned char>(c));
        h *= 1099511628211ull;
    }
    return h;
}

ReconConfig loadConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    ReconConfig cfg;
    std::string line, section;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = s.substr(1, s.size() - 2);
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineNo) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;
        const Key* k = findKey(full);
        if (!k)
            throw std::invalid_argument(path + ":" + std::to_string(lineNo) + ": unknown key '" +
                                         full + "'");
        try {
            k->set(cfg, val);
        } catch (const std::exception& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineNo) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

void saveConfig(const std::string& path, const ReconConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config: " + path);
    out << cfg.canonicalText();
}

void applyOverride(ReconConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must be section.key=value: " + assignment);
    const std::string name = trim(assignment.substr(0, eq));
    const std::string val = trim(assignment.substr(eq + 1));
    const Key* k = findKey(name);
    if (!k) throw std::invalid_argument("unknown config key '" + name + "'");
    k->set(cfg, val);
}

}  // namespace sfr
