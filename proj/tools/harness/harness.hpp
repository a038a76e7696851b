#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

namespace psifno::harness {

inline constexpr int kSchemaVersion = 1;

enum class Kind {
  spectral_check,
  darcy_converge,
  ns_converge,
  darcy_emulate,
  ns_emulate,
  ft_emulate,
  deeponet_export,
  property_suite,
};

std::string kind_name(Kind k);
Kind kind_from_name(std::string_view name);  // ConfigInvalid on unknown names
std::vector<Kind> all_kinds();

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Kind kind = Kind::spectral_check;
  std::uint64_t seed = 0;
  std::string out = "out";
  int jobs = 1;
  bool timing = true;
  nlohmann::json params = nlohmann::json::object();
};

// Defaults for every parameter of the kind; parsing rejects keys not listed here.
ExperimentConfig default_config(Kind kind);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& c, const std::filesystem::path& path);

// resolution: error ~ N^-rate; step: error ~ tau^rate.
enum class RateSense { resolution, step };
// Least-squares slope of log(error) against log(parameter); DegenerateFit on
// fewer than 2 rows, non-positive values or a single distinct parameter.
double fit_rate(std::span<const double> params, std::span<const double> errors, RateSense sense);
// Local rates between consecutive rows.
std::vector<double> local_rates(std::span<const double> params, std::span<const double> errors, RateSense sense);

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  Kind kind = Kind::spectral_check;
  Table table;
  std::vector<Check> checks;
  std::map<std::string, double> slopes;
  std::map<std::string, double> metrics;

  bool pass() const;
};

// Runs the experiment. Only deeponet-export touches the file system (its export files).
Report execute(const ExperimentConfig& c);
// execute, then <out>/<kind>.csv and <out>/<kind>.json. Returns 0 iff every check passed.
int run(const ExperimentConfig& c);

std::string to_csv(const Table& t);
nlohmann::json summary_json(const Report& r, const ExperimentConfig& c);
void write_report(const Report& r, const ExperimentConfig& c);

// Fixed-format numbers so reruns are byte-identical.
std::string format_number(double x);
std::string format_seconds(double s, bool timing);

// Seed for task i derived from the experiment seed.
std::uint64_t task_seed(std::uint64_t seed, std::uint64_t i);

// Calls f(i) for i in [0, n) on at most `jobs` threads. The first exception is rethrown.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::jthread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace psifno::harness
