#pragma once

#include "psifno/emulation/stack.hpp"
#include "psifno/spectral/grid.hpp"

namespace psifno::emulation {

// Coefficient layout shared by both emulators: channel 2m holds Re v_hat(k_m),
// channel 2m+1 holds Im v_hat(k_m), m running over Grid(d, N) in lexicographic order.
GridField coefficient_channels(const spectral::SpectralCoeffs& c);
spectral::SpectralCoeffs coefficients_from_channels(const GridField& channels, int d, int N);

// v -> constant fields (Re v_hat_k, Im v_hat_k) for |v|_{L2} <= B; sup error <= options.epsilon.
fno::PsiFno build_ft_emulator(int d, int N, double B, const EmulatorOptions& options);
// Constant coefficient fields -> sum_k v_hat_k e^{ikx}; L2 error <= options.epsilon.
fno::PsiFno build_ift_emulator(int d, int N, double B, const EmulatorOptions& options);

// ift o user o ft. The user net acts on the 2|K_N| coefficient channels.
fno::PsiFno fourier_conjugate(const fno::PsiFno& user, int N, double B, const EmulatorOptions& options);

}  // namespace psifno::emulation
