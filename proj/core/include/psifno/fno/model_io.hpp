#pragma once

#include <filesystem>

#include "psifno/fno/network.hpp"

namespace psifno::fno {

// "PSIFNO1\n", a little-endian u64 header length, a JSON header, then the
// float64 payload in header order.
void save_model(const std::filesystem::path& path, const PsiFno& net);
PsiFno load_model(const std::filesystem::path& path);

}  // namespace psifno::fno
