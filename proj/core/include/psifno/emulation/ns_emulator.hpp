#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "psifno/emulation/stack.hpp"
#include "psifno/navier_stokes.hpp"

namespace psifno::emulation {

// options.epsilon is the end-of-trajectory L2 budget. Per block it is divided
// by n_T * kappa0 * Lambda with Lambda = 2 * max(1, Lip(step))^n_T, the step
// Lipschitz constant measured on the probes (1.1x safety).
struct NsEmulatorSpec {
  ns::NsConfig config;
  EmulatorOptions options;
  std::vector<GridField> probes;  // initial fields at N; random ones of norm U when empty
  std::uint64_t seed = 1;
};

// Replays the first-order scheme on the 2N grid with channels (u, grad w).
fno::PsiFno build_ns_emulator(const NsEmulatorSpec& spec);

// (u_N, w_N) -> Leray P_N(u_N . grad w_N) on the 2N grid for |u|, |w| <= B in L2.
fno::PsiFno build_ns_nonlinearity_net(int d, int N, double B, const EmulatorOptions& options);

// max over probes and random directions of |S(u + δ) - S(u)| / |δ| for one step S.
double measure_step_lipschitz(const ns::NsConfig& config, std::span<const GridField> probes, std::uint64_t seed);

}  // namespace psifno::emulation
