#include "psifno/fno/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "psifno/error.hpp"

namespace psifno::fno {
namespace {

constexpr char kMagic[8] = {'P', 'S', 'I', 'F', 'N', 'O', '1', '\n'};

std::uint64_t le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

class Writer {
 public:
  explicit Writer(std::ofstream& os) : os_(os) {}
  void put(double x) {
    const std::uint64_t b = le(std::bit_cast<std::uint64_t>(x));
    os_.write(reinterpret_cast<const char*>(&b), sizeof b);
  }
  void put(const std::vector<double>& v) {
    for (double x : v) put(x);
  }
  void put(const std::vector<Complex>& v) {
    for (const auto& z : v) {
      put(z.real());
      put(z.imag());
    }
  }

 private:
  std::ofstream& os_;
};

class Reader {
 public:
  explicit Reader(std::ifstream& is) : is_(is) {}
  double get() {
    std::uint64_t b = 0;
    is_.read(reinterpret_cast<char*>(&b), sizeof b);
    if (!is_) throw FormatError("model payload is truncated");
    return std::bit_cast<double>(le(b));
  }
  void get(std::vector<double>& v) {
    for (double& x : v) x = get();
  }
  void get(std::vector<Complex>& v) {
    for (auto& z : v) {
      const double re = get();
      z = {re, get()};
    }
  }

 private:
  std::ifstream& is_;
};

}  // namespace

void save_model(const std::filesystem::path& path, const PsiFno& net) {
  nlohmann::json header;
  header["format"] = "PSIFNO1";
  header["version"] = 1;
  header["d"] = net.grid().dim();
  header["N"] = net.grid().modes();
  header["d_a"] = net.input_channels();
  header["d_v"] = net.hidden_channels();
  header["d_u"] = net.output_channels();
  header["activation"] = net.activation().name();
  header["metadata"] = net.metadata();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    nlohmann::json jl;
    jl["activation"] = l.apply_activation;
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : l.b.fields) fields.push_back(f.channel);
    jl["bias_fields"] = fields;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : l.P.entries()) entries.push_back({e.out, e.in});
    jl["multiplier"] = {{"width", l.P.width()}, {"entries", entries}};
    layers.push_back(jl);
  }
  header["layers"] = layers;
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  const std::uint64_t len = le(text.size());
  os.write(reinterpret_cast<const char*>(&len), sizeof len);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  Writer w(os);
  w.put(net.lift().data);
  for (const auto& l : net.layers()) {
    w.put(l.W.data);
    w.put(l.b.constant);
    for (const auto& f : l.b.fields) w.put(f.values);
    for (const auto& e : l.P.entries()) w.put(e.values);
  }
  w.put(net.projection().data);
  if (!os) throw FormatError("failed writing " + path.string());
}

PsiFno load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw FormatError("not a PSIFNO1 model file");
  std::uint64_t len = 0;
  is.read(reinterpret_cast<char*>(&len), sizeof len);
  len = le(len);
  if (!is || len > (1u << 30)) throw FormatError("bad model header length");
  std::string text(len, '\0');
  is.read(text.data(), static_cast<std::streamsize>(len));
  if (!is) throw FormatError("model header is truncated");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }
  if (h.value("format", "") != "PSIFNO1") throw FormatError("unsupported model format");
  const spectral::Grid grid(h.at("d").get<int>(), h.at("N").get<int>());
  const int da = h.at("d_a").get<int>();
  const int dv = h.at("d_v").get<int>();
  const int du = h.at("d_u").get<int>();

  Reader r(is);
  Matrix lift(dv, da);
  r.get(lift.data);
  std::vector<FnoLayer> layers;
  for (const auto& jl : h.at("layers")) {
    FnoLayer l;
    l.apply_activation = jl.at("activation").get<bool>();
    l.W = Matrix(dv, dv);
    r.get(l.W.data);
    l.b.constant.assign(dv, 0.0);
    r.get(l.b.constant);
    for (const auto& ch : jl.at("bias_fields")) {
      BiasField f{ch.get<int>(), std::vector<double>(grid.size())};
      r.get(f.values);
      l.b.fields.push_back(std::move(f));
    }
    const auto& jm = jl.at("multiplier");
    l.P = FourierMultiplier(grid.dim(), jm.at("width").get<int>());
    for (const auto& e : jm.at("entries")) {
      std::vector<Complex> v(l.P.mode_count());
      r.get(v);
      l.P.entries().push_back({e.at(0).get<int>(), e.at(1).get<int>(), std::move(v)});
    }
    layers.push_back(std::move(l));
  }
  Matrix proj(du, dv);
  r.get(proj.data);

  PsiFno net(grid, Activation::from_name(h.at("activation").get<std::string>()), std::move(lift), std::move(layers),
             std::move(proj));
  for (const auto& [k, v] : h.at("metadata").items()) net.metadata()[k] = v.get<double>();
  return net;
}

}  // namespace psifno::fno
