#include "psifno/spectral/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "psifno/error.hpp"

namespace psifno::spectral {
namespace {

constexpr const char* kLayout = "row-major-j-then-channel";

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
  std::filesystem::path p = base;
  p += suffix;
  return p;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& base, const GridField& f) {
  const std::size_t n = f.grid().size();
  const int ch = f.channels();
  std::ofstream bin(with_suffix(base, ".bin"), std::ios::binary);
  if (!bin) throw FormatError("cannot open " + with_suffix(base, ".bin").string() + " for writing");
  for (std::size_t j = 0; j < n; ++j) {
    for (int c = 0; c < ch; ++c) {
      const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(f(c, j)));
      bin.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  nlohmann::json meta{{"d", f.grid().dim()},
                      {"N", f.grid().modes()},
                      {"channels", ch},
                      {"layout", kLayout},
                      {"dtype", "float64-le"}};
  std::ofstream js(with_suffix(base, ".json"));
  js << meta.dump(2) << '\n';
  if (!bin || !js) throw FormatError("failed writing field " + base.string());
}

GridField read_field(const std::filesystem::path& base) {
  std::ifstream js(with_suffix(base, ".json"));
  if (!js) throw FormatError("missing sidecar " + with_suffix(base, ".json").string());
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field sidecar: ") + e.what());
  }
  if (meta.value("layout", "") != kLayout) throw FormatError("unsupported field layout");
  const Grid grid(meta.at("d").get<int>(), meta.at("N").get<int>());
  const int ch = meta.at("channels").get<int>();

  std::ifstream bin(with_suffix(base, ".bin"), std::ios::binary);
  if (!bin) throw FormatError("missing payload " + with_suffix(base, ".bin").string());
  std::vector<double> values(grid.size() * ch);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (int c = 0; c < ch; ++c) {
      std::uint64_t bits = 0;
      bin.read(reinterpret_cast<char*>(&bits), sizeof bits);
      if (!bin) throw FormatError("truncated field payload");
      values[c * grid.size() + j] = std::bit_cast<double>(to_le(bits));
    }
  }
  return GridField(grid, ch, std::move(values));
}

}  // namespace psifno::spectral
