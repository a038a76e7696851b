#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "psifno/darcy.hpp"
#include "psifno/emulation/darcy_emulator.hpp"
#include "psifno/fno/forward.hpp"
#include "psifno/navier_stokes.hpp"
#include "psifno/spectral/ops.hpp"

using namespace psifno;
using spectral::Grid;
using spectral::GridField;

namespace {

GridField noise(const Grid& g, int channels, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  GridField f(g, channels);
  for (double& v : f.values()) v = n(rng);
  return f;
}

void BM_Dft(benchmark::State& st) {
  const GridField f = noise(Grid(static_cast<int>(st.range(0)), static_cast<int>(st.range(1))), 1, 1);
  for (auto _ : st) benchmark::DoNotOptimize(spectral::dft(f));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(f.grid().size()));
}
BENCHMARK(BM_Dft)->Args({1, 64})->Args({2, 16})->Args({2, 64})->Args({3, 16});

void BM_DealiasedProduct(benchmark::State& st) {
  const Grid g(2, static_cast<int>(st.range(0)));
  const GridField a = noise(g, 1, 2);
  const GridField b = noise(g, 1, 3);
  for (auto _ : st) benchmark::DoNotOptimize(spectral::dealiased_product(a, b));
}
BENCHMARK(BM_DealiasedProduct)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_DarcySolve(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  const GridField a = darcy::trig_coefficient(Grid(2, 2 * N), 0.3);
  const GridField f = darcy::manufactured_source(a);
  for (auto _ : st) benchmark::DoNotOptimize(darcy::solve({a, f, 0.5, 1, N}));
}
BENCHMARK(BM_DarcySolve)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_NsFirstOrderStep(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  ns::NsConfig c;
  c.N = N;
  c.nu = 0.05;
  c.u0 = ns::taylor_green(2, c.nu, 0.0, N);
  c.U = spectral::l2_norm(c.u0);
  c.tau = 0.01;
  c.T = 1.0;
  c.enforce_cfl = false;
  const ns::NsState s = ns::make_state(c.u0);
  for (auto _ : st) benchmark::DoNotOptimize(ns::step_first_order(s, c));
}
BENCHMARK(BM_NsFirstOrderStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_DarcyEmulatorForward(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  emulation::DarcyEmulatorSpec s;
  s.f = darcy::manufactured_source(darcy::trig_coefficient(Grid(2, 2 * N), 0.3));
  s.N = N;
  const fno::PsiFno net = emulation::build_darcy_emulator(s);
  const GridField a = darcy::trig_coefficient(Grid(2, 2 * N), 0.3);
  for (auto _ : st) benchmark::DoNotOptimize(fno::fno_forward(net, a));
  st.counters["depth"] = net.depth();
}
BENCHMARK(BM_DarcyEmulatorForward)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
