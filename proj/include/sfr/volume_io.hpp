#pragma once

#include <string>

#include "sfr/grid.hpp"

namespace sfr {

// Volume file format, little-endian:
//   32-byte header: magic "SFVOL01\0" (8B), u32 nx, ny, nz, u32 channels
//   (1 = cell-centered scalar, 3 = staggered components packed x,y,z),
//   f32 cell size h, 4 reserved bytes (zero).
//   Payload: 32-bit floats, x-fastest order; staggered components
//   concatenated x, y, z with their face dimensions.
void writeVolume(const std::string& path, const ScalarField& f);
void writeVolume(const std::string& path, const StaggeredField& f);
ScalarField readScalarVolume(const std::string& path);
StaggeredField readStaggeredVolume(const std::string& path);

// Round every value to the nearest f32, in place. The pipeline applies this at
// frame boundaries so a resumed run sees exactly the state a fresh run wrote.
void quantizeToStorage(ScalarField& f);
void quantizeToStorage(StaggeredField& f);

}  // namespace sfr
