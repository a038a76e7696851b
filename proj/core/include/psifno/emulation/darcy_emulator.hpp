#pragma once

#include <cstdint>
#include <vector>

#include "psifno/emulation/stack.hpp"

namespace psifno::emulation {

struct DarcyEmulatorSpec {
  GridField f;  // source, sampled with at least 2N modes
  double lambda = 0.5;
  int N = 8;
  int k = 1;
  // Bound on |a_tilde_N| over the 2N grid; 0 selects 1 - lambda/2.
  double coefficient_bound = 0.0;
  EmulatorOptions options;
  // Strict mode scale probes (coefficients a); random coercive ones are drawn when empty.
  std::vector<GridField> probes;
  std::uint64_t seed = 1;
};

// Network on the 2N grid: an F-layer producing a_tilde, then K blocks of
// [product σ-layer, readout, inverse-Laplacian F-layer with the source as bias].
fno::PsiFno build_darcy_emulator(const DarcyEmulatorSpec& spec);

// (a_N, u_N) -> P_N(a_N grad u_N) on the 2N grid for |a|, |u| <= B in L2.
fno::PsiFno build_nonlinearity_net_darcy(int d, int N, double B, const EmulatorOptions& options);

}  // namespace psifno::emulation
