#pragma once

#include <filesystem>

#include "psifno/spectral/grid.hpp"

namespace psifno::spectral {

// Writes <base>.bin (little-endian float64, point-major then channel) and a
// <base>.json sidecar holding d, N, channels and the layout tag.
void write_field(const std::filesystem::path& base, const GridField& f);
GridField read_field(const std::filesystem::path& base);

}  // namespace psifno::spectral
