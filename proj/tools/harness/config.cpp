#include <fstream>

#include "harness.hpp"
#include "psifno/error.hpp"

namespace psifno::harness {

using nlohmann::json;

namespace {

const std::vector<std::pair<Kind, std::string>>& names() {
  static const std::vector<std::pair<Kind, std::string>> table{
      {Kind::spectral_check, "spectral-check"}, {Kind::darcy_converge, "darcy-converge"},
      {Kind::ns_converge, "ns-converge"},       {Kind::darcy_emulate, "darcy-emulate"},
      {Kind::ns_emulate, "ns-emulate"},         {Kind::ft_emulate, "ft-emulate"},
      {Kind::deeponet_export, "deeponet-export"}, {Kind::property_suite, "property-suite"},
  };
  return table;
}

json default_params(Kind k) {
  switch (k) {
    case Kind::spectral_check:
      return {{"dims", {1, 2}}, {"max_N", 16}, {"leray_dims", {2, 3}}, {"leray_max_N", 8}};
    case Kind::darcy_converge:
      return {{"d", 2},          {"lambda", 0.5}, {"k", 1}, {"Ns", {8, 16, 32, 64}}, {"amplitude", 0.3},
              {"lipschitz_pairs", 100}, {"slope_margin", 0.3}};
    case Kind::ns_converge:
      return {{"scheme", "first"}, {"N", 16},          {"nu", 0.05},        {"T", 0.5},
              {"taus", {0.04, 0.02, 0.01}}, {"enforce_cfl", false}, {"slope_min", nullptr}, {"slope_max", nullptr}};
    case Kind::darcy_emulate:
      return {{"d", 2},         {"lambda", 0.5},  {"k", 1},           {"Ns", {8, 16, 32}}, {"epsilon", 1e-3},
              {"probes", 20},   {"strict", false}, {"amplitude", 0.3}, {"max_spread", 1.5}};
    case Kind::ns_emulate:
      return {{"N", 8},           {"steps", 4},        {"nu", 0.05},       {"epsilon", 1e-3},
              {"random_probes", 5}, {"cfl_fraction", 0.9}, {"strict", false}};
    case Kind::ft_emulate:
      return {{"dims", {1, 2}}, {"Ns", {1, 2, 3, 4}}, {"B", 1.0}, {"epsilon", 1e-3}, {"probes", 10}, {"strict", false}};
    case Kind::deeponet_export:
      return {{"d", 2},        {"N", 3},          {"d_a", 1},           {"d_v", 3},
              {"d_u", 2},      {"layers", 2},     {"multiplier_width", 2}, {"probes", 100},
              {"tolerance", 1e-9}, {"approximate_trunk", false}, {"trunk_epsilon", 1e-2}};
    case Kind::property_suite:
      return {{"N", 8}, {"nu", 0.05}, {"steps", 20}, {"U", 1.0}, {"cfl_fraction", 0.9}, {"reference_kappa", 60}};
  }
  return json::object();
}

template <class T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string kind_name(Kind k) {
  for (const auto& [kind, name] : names()) {
    if (kind == k) return name;
  }
  return "unknown";
}

Kind kind_from_name(std::string_view name) {
  for (const auto& [kind, n] : names()) {
    if (n == name) return kind;
  }
  throw ConfigInvalid("unknown experiment kind '" + std::string(name) + "'");
}

std::vector<Kind> all_kinds() {
  std::vector<Kind> out;
  for (const auto& [kind, name] : names()) out.push_back(kind);
  return out;
}

ExperimentConfig default_config(Kind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.out = "out/" + kind_name(kind);
  c.params = default_params(kind);
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {{"schema_version", c.schema_version}, {"kind", kind_name(c.kind)}, {"seed", c.seed}, {"out", c.out},
          {"jobs", c.jobs}, {"timing", c.timing}, {"params", c.params}};
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    static const std::vector<std::string> known{"schema_version", "kind", "seed", "out", "jobs", "timing", "params"};
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigInvalid("unknown config field '" + key + "'");
  }
  if (!j.contains("kind")) throw ConfigInvalid("config needs a 'kind'");
  ExperimentConfig c = default_config(kind_from_name(field<std::string>(j, "kind", "")));
  c.schema_version = field<int>(j, "schema_version", kSchemaVersion);
  if (c.schema_version != kSchemaVersion) {
    throw ConfigInvalid("unsupported schema_version " + std::to_string(c.schema_version));
  }
  c.seed = field<std::uint64_t>(j, "seed", c.seed);
  c.out = field<std::string>(j, "out", c.out);
  c.jobs = field<int>(j, "jobs", c.jobs);
  if (c.jobs < 1) throw ConfigInvalid("jobs must be at least 1");
  c.timing = field<bool>(j, "timing", c.timing);
  if (j.contains("params")) {
    const json& p = j.at("params");
    if (!p.is_object()) throw ConfigInvalid("'params' must be an object");
    for (const auto& [key, value] : p.items()) {
      if (!c.params.contains(key)) {
        throw ConfigInvalid("unknown parameter '" + key + "' for " + kind_name(c.kind));
      }
      c.params[key] = value;
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigInvalid("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigInvalid("cannot write config " + path.string());
  out << to_json(c).dump(2) << '\n';
}

}  // namespace psifno::harness
