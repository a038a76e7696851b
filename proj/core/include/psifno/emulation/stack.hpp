#pragma once

#include <functional>
#include <span>
#include <vector>

#include "psifno/emulation/product_net.hpp"
#include "psifno/fno/network.hpp"

namespace psifno::emulation {

using fno::FnoLayer;
using fno::Matrix;
using spectral::GridField;

// Layers of varying channel count, padded to a common d_v on finalize.
class LayerStack {
 public:
  LayerStack(spectral::Grid grid, int input_channels);

  const spectral::Grid& grid() const noexcept { return grid_; }
  int input_channels() const noexcept { return input_channels_; }
  // Channels after the last layer (before the output map).
  int channels() const noexcept;
  const std::vector<FnoLayer>& layers() const noexcept { return layers_; }
  int depth() const noexcept { return static_cast<int>(layers_.size()); }

  // Appends a zero layer reading channels() inputs.
  FnoLayer& push(int out_channels, bool activate);
  void push(FnoLayer layer);

  // Linear map applied after the last layer; identity unless strict mode folded a readout into it.
  const Matrix& output_map() const noexcept { return output_map_; }
  void set_output_map(Matrix m) { output_map_ = std::move(m); }

  GridField forward(const GridField& input, const Activation& act) const;
  // All intermediate outputs, input first.
  std::vector<GridField> trace(const GridField& input, const Activation& act) const;

  fno::PsiFno finalize(const Activation& act, const Matrix& projection) const;

 private:
  spectral::Grid grid_;
  int input_channels_;
  std::vector<FnoLayer> layers_;
  Matrix output_map_;
};

// Replaces every unactivated layer by 2 ψ_h neurons per output channel and
// folds the readout into the following layer (or the output map). Channel
// scales come from the probes times `safety`.
struct StrictReport {
  double h = 0.0;
  int replaced = 0;
};
LayerStack strictify(const LayerStack& stack, const Activation& act, std::span<const GridField> probes,
                     double abs_epsilon, double safety = 4.0, StrictReport* report = nullptr);

// Writes the 6 neurons of `net` into rows [row, row + 6) of an activated
// layer reading input channels ia and ib. Returns the readout weights.
struct NeuronReadout {
  std::vector<std::pair<int, double>> weights;  // (neuron row, weight)
  double offset = 0.0;
};
NeuronReadout emit_product(FnoLayer& layer, int row, int ia, int ib, const ProductNet& net);
// Second factor given as a grid field rather than a channel.
NeuronReadout emit_product_with_field(FnoLayer& layer, int row, int ia, std::span<const double> field,
                                      const ProductNet& net);
// Two ψ_h neurons carrying channel ic whose values are bounded by `scale`.
NeuronReadout emit_carry(FnoLayer& layer, int row, int ic, double scale, const IdentityNet& id);

// Adds readout weights into row `out` of a W matrix and the offset into the bias.
void apply_readout(FnoLayer& layer, int out, const NeuronReadout& r, double factor = 1.0);

// Common builder switches.
struct EmulatorOptions {
  double epsilon = 1e-3;
  bool strict = false;
  Activation activation;
  double product_x0 = 1.0;
  double identity_x0 = 0.0;
};

}  // namespace psifno::emulation
