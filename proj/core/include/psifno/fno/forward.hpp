#pragma once

#include <vector>

#include "psifno/fno/network.hpp"

namespace psifno::fno {

using spectral::GridField;

GridField apply_pointwise(const Matrix& m, const GridField& v);
GridField layer_forward(const FnoLayer& layer, const GridField& v, const Activation& act);

// The input is resampled to the network grid first. Inputs coarser than the
// widest multiplier raise InsufficientResolution.
GridField fno_forward(const PsiFno& net, const GridField& a);
std::vector<double> fno_evaluate_at(const PsiFno& net, const GridField& a, const spectral::Point& y);

// layer o C, where C maps new inputs to the layer's old inputs.
FnoLayer precompose(const FnoLayer& layer, const Matrix& C);
// Zero-pad a layer to in x out channels.
FnoLayer pad_layer(const FnoLayer& layer, int in, int out);

// outer o inner as a single Psi-FNO with d_v = max of the two.
PsiFno compose(const PsiFno& outer, const PsiFno& inner);

}  // namespace psifno::fno
