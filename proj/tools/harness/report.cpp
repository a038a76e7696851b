#include <cmath>
#include <cstdio>
#include <fstream>

#include "harness.hpp"
#include "psifno/error.hpp"

namespace psifno::harness {

double fit_rate(std::span<const double> params, std::span<const double> errors, RateSense sense) {
  if (params.size() != errors.size()) throw DegenerateFit("parameter and error lists differ in length");
  if (params.size() < 2) throw DegenerateFit("a rate needs at least two rows");
  const double n = static_cast<double>(params.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i] > 0.0) || !(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw DegenerateFit("rates need positive finite parameters and errors");
    }
    sx += std::log(params[i]);
    sy += std::log(errors[i]);
  }
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double x = std::log(params[i]) - sx / n;
    sxx += x * x;
    sxy += x * (std::log(errors[i]) - sy / n);
  }
  if (sxx <= 0.0) throw DegenerateFit("all parameters are equal");
  const double slope = sxy / sxx;
  const double rate = sense == RateSense::resolution ? -slope : slope;
  return rate == 0.0 ? 0.0 : rate;
}

std::vector<double> local_rates(std::span<const double> params, std::span<const double> errors, RateSense sense) {
  std::vector<double> out;
  for (std::size_t i = 1; i < params.size(); ++i) {
    out.push_back(fit_rate(params.subspan(i - 1, 2), errors.subspan(i - 1, 2), sense));
  }
  return out;
}

bool Report::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

std::string format_seconds(double s, bool timing) {
  if (!timing) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", s);
  return buf;
}

std::uint64_t task_seed(std::uint64_t seed, std::uint64_t i) {
  // splitmix64
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

nlohmann::json summary_json(const Report& r, const ExperimentConfig& c) {
  nlohmann::json j;
  j["kind"] = kind_name(r.kind);
  j["schema_version"] = kSchemaVersion;
  j["seed"] = c.seed;
  j["pass"] = r.pass();
  auto& crit = j["criteria"] = nlohmann::json::array();
  for (const auto& ch : r.checks) {
    crit.push_back({{"name", ch.name}, {"pass", ch.pass}, {"value", ch.value}, {"tolerance", ch.tolerance},
                    {"detail", ch.detail}});
  }
  j["slopes"] = r.slopes;
  j["metrics"] = r.metrics;
  return j;
}

void write_report(const Report& r, const ExperimentConfig& c) {
  const std::filesystem::path dir(c.out);
  std::filesystem::create_directories(dir);
  const std::string base = kind_name(r.kind);
  {
    std::ofstream csv(dir / (base + ".csv"), std::ios::binary);
    if (!csv) throw ConfigInvalid("cannot write to " + dir.string());
    csv << to_csv(r.table);
  }
  std::ofstream js(dir / (base + ".json"), std::ios::binary);
  js << summary_json(r, c).dump(2) << '\n';
}

int run(const ExperimentConfig& c) {
  const Report r = execute(c);
  write_report(r, c);
  return r.pass() ? 0 : 1;
}

}  // namespace psifno::harness
