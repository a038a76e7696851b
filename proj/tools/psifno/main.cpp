#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "harness.hpp"
#include "psifno/error.hpp"

namespace h = psifno::harness;

namespace {

enum Exit { ok = 0, failed = 1, bad_config = 2, error = 3 };

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// CSV -> whitespace columns with a '#' header, ready for gnuplot's `plot "file" using 1:2`.
int gnuplot(const std::string& csv, const std::vector<std::string>& columns) {
  std::ifstream in(csv);
  if (!in) {
    std::cerr << "psifno: cannot open " << csv << '\n';
    return bad_config;
  }
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  std::vector<std::size_t> pick;
  for (const auto& c : columns) {
    const auto it = std::find(header.begin(), header.end(), c);
    if (it == header.end()) {
      std::cerr << "psifno: no column '" << c << "' in " << csv << '\n';
      return bad_config;
    }
    pick.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  if (pick.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) pick.push_back(i);
  }
  std::cout << '#';
  for (std::size_t i : pick) std::cout << ' ' << header[i];
  std::cout << '\n';
  while (std::getline(in, line)) {
    const auto cells = split_csv_line(line);
    for (std::size_t j = 0; j < pick.size(); ++j) std::cout << (j ? " " : "") << cells.at(pick[j]);
    std::cout << '\n';
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral operator toolkit: solvers, psi-FNO emulators and convergence studies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool no_timing = false;
  bool dump = false;

  std::vector<std::pair<h::Kind, CLI::App*>> runs;
  for (h::Kind k : h::all_kinds()) {
    CLI::App* sub = app.add_subcommand(h::kind_name(k), "run the " + h::kind_name(k) + " experiment");
    sub->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timing", no_timing, "write NA in the seconds columns (byte-identical reruns)");
    sub->add_flag("--print-config", dump, "print the effective config and exit");
    runs.emplace_back(k, sub);
  }

  std::string csv;
  std::vector<std::string> columns;
  CLI::App* plot = app.add_subcommand("gnuplot", "convert a result CSV to gnuplot data columns");
  plot->add_option("csv", csv, "CSV written by an experiment")->required()->check(CLI::ExistingFile);
  plot->add_option("--columns", columns, "columns to keep, in order");

  CLI11_PARSE(app, argc, argv);

  if (plot->parsed()) return gnuplot(csv, columns);

  for (const auto& [kind, sub] : runs) {
    if (!sub->parsed()) continue;
    try {
      h::ExperimentConfig c = config_path.empty() ? h::default_config(kind) : h::load_config(config_path);
      if (c.kind != kind) {
        throw psifno::ConfigInvalid("config is for '" + h::kind_name(c.kind) + "', not '" + h::kind_name(kind) + "'");
      }
      if (sub->count("--out")) c.out = out;
      if (sub->count("--seed")) c.seed = seed;
      if (sub->count("--jobs")) c.jobs = jobs;
      if (no_timing) c.timing = false;
      if (dump) {
        std::cout << h::to_json(c).dump(2) << '\n';
        return ok;
      }
      const h::Report r = h::execute(c);
      h::write_report(r, c);
      for (const auto& ch : r.checks) {
        std::printf("%s %s value=%s tolerance=%s\n", ch.pass ? "PASS" : "FAIL", ch.name.c_str(),
                    h::format_number(ch.value).c_str(), h::format_number(ch.tolerance).c_str());
      }
      std::printf("wrote %s/%s.csv and .json\n", c.out.c_str(), h::kind_name(kind).c_str());
      return r.pass() ? ok : failed;
    } catch (const psifno::ConfigInvalid& e) {
      std::cerr << "psifno: invalid config: " << e.what() << '\n';
      return bad_config;
    } catch (const std::exception& e) {
      std::cerr << "psifno " << h::kind_name(kind) << ": " << e.what() << '\n';
      return error;
    }
  }
  return ok;
}
