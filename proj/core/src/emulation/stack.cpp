#include "psifno/emulation/stack.hpp"

#include <algorithm>
#include <cmath>

#include "psifno/error.hpp"
#include "psifno/fno/forward.hpp"

namespace psifno::emulation {

LayerStack::LayerStack(spectral::Grid grid, int input_channels)
    : grid_(grid), input_channels_(input_channels), output_map_(Matrix::identity(input_channels)) {}

int LayerStack::channels() const noexcept {
  return layers_.empty() ? input_channels_ : layers_.back().out_channels();
}

FnoLayer& LayerStack::push(int out_channels, bool activate) {
  FnoLayer l;
  l.W = Matrix(out_channels, channels());
  l.b.constant.assign(out_channels, 0.0);
  l.apply_activation = activate;
  push(std::move(l));
  return layers_.back();
}

void LayerStack::push(FnoLayer layer) {
  if (layer.in_channels() != channels()) throw DimensionMismatch("stacked layer reads the wrong channel count");
  if (layer.b.constant.empty()) layer.b.constant.assign(layer.out_channels(), 0.0);
  layers_.push_back(std::move(layer));
  output_map_ = Matrix::identity(channels());
}

GridField LayerStack::forward(const GridField& input, const Activation& act) const {
  GridField v = input;
  for (const auto& l : layers_) v = fno::layer_forward(l, v, act);
  return fno::apply_pointwise(output_map_, v);
}

std::vector<GridField> LayerStack::trace(const GridField& input, const Activation& act) const {
  std::vector<GridField> out{input};
  for (const auto& l : layers_) out.push_back(fno::layer_forward(l, out.back(), act));
  return out;
}

fno::PsiFno LayerStack::finalize(const Activation& act, const Matrix& projection) const {
  int dv = std::max(input_channels_, output_map_.cols);
  for (const auto& l : layers_) dv = std::max({dv, l.in_channels(), l.out_channels()});
  std::vector<FnoLayer> padded;
  padded.reserve(layers_.size());
  for (const auto& l : layers_) padded.push_back(fno::pad_layer(l, dv, dv));
  const Matrix q = projection * output_map_;
  return fno::PsiFno(grid_, act, Matrix::identity(input_channels_).padded(dv, input_channels_), std::move(padded),
                     q.padded(q.rows, dv));
}

LayerStack strictify(const LayerStack& stack, const Activation& act, std::span<const GridField> probes,
                     double abs_epsilon, double safety, StrictReport* report) {
  const auto& layers = stack.layers();
  std::vector<std::vector<double>> scale(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) scale[l].assign(layers[l].out_channels(), 0.0);
  for (const auto& p : probes) {
    const auto tr = stack.trace(p, act);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (layers[l].apply_activation) continue;
      for (int c = 0; c < layers[l].out_channels(); ++c) {
        for (double x : tr[l + 1].channel(c)) scale[l][c] = std::max(scale[l][c], std::abs(x));
      }
    }
  }
  double smax = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].apply_activation) continue;
    for (double& s : scale[l]) {
      s = s > 0.0 ? safety * s : 1.0;
      smax = std::max(smax, s);
    }
  }
  const IdentityNet id = calibrate_identity(act, abs_epsilon / std::max(smax, 1e-300));

  LayerStack out(stack.grid(), stack.input_channels());
  Matrix pending = Matrix::identity(stack.input_channels());
  int replaced = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const FnoLayer L = fno::precompose(layers[l], pending);
    if (L.apply_activation) {
      out.push(L);
      pending = Matrix::identity(L.out_channels());
      continue;
    }
    const int oc = L.out_channels();
    FnoLayer A;
    A.apply_activation = true;
    A.W = Matrix(2 * oc, L.in_channels());
    A.b.constant.assign(2 * oc, id.x0);
    if (!L.P.empty()) A.P = fno::FourierMultiplier(L.P.dim(), L.P.width());
    pending = Matrix(oc, 2 * oc);
    for (int c = 0; c < oc; ++c) {
      for (int sgn = 0; sgn < 2; ++sgn) {
        const double g = (sgn == 0 ? 1.0 : -1.0) * id.h / scale[l][c];
        for (int i = 0; i < L.in_channels(); ++i) A.W(2 * c + sgn, i) = g * L.W(c, i);
        A.b.constant[2 * c + sgn] += g * L.b.constant[c];
      }
      pending(c, 2 * c) = id.readout(scale[l][c]);
      pending(c, 2 * c + 1) = -id.readout(scale[l][c]);
    }
    for (const auto& f : L.b.fields) {
      for (int sgn = 0; sgn < 2; ++sgn) {
        const double g = (sgn == 0 ? 1.0 : -1.0) * id.h / scale[l][f.channel];
        fno::BiasField bf{2 * f.channel + sgn, f.values};
        for (double& x : bf.values) x *= g;
        A.b.fields.push_back(std::move(bf));
      }
    }
    for (const auto& e : L.P.entries()) {
      for (int sgn = 0; sgn < 2; ++sgn) {
        const double g = (sgn == 0 ? 1.0 : -1.0) * id.h / scale[l][e.out];
        std::vector<fno::Complex> v(e.values);
        for (auto& z : v) z *= g;
        A.P.add(2 * e.out + sgn, e.in, std::move(v));
      }
    }
    out.push(std::move(A));
    ++replaced;
  }
  out.set_output_map(stack.output_map() * pending);
  if (report) *report = {id.h, replaced};
  return out;
}

NeuronReadout emit_product(FnoLayer& layer, int row, int ia, int ib, const ProductNet& net) {
  NeuronReadout r;
  for (int i = 0; i < ProductNet::width; ++i) {
    layer.W(row + i, ia) += net.ca[i];
    layer.W(row + i, ib) += net.cb[i];
    layer.b.constant[row + i] += net.x0;
    r.weights.emplace_back(row + i, net.readout[i]);
  }
  r.offset = net.offset;
  return r;
}

NeuronReadout emit_product_with_field(FnoLayer& layer, int row, int ia, std::span<const double> field,
                                      const ProductNet& net) {
  NeuronReadout r;
  for (int i = 0; i < ProductNet::width; ++i) {
    layer.W(row + i, ia) += net.ca[i];
    layer.b.constant[row + i] += net.x0;
    if (net.cb[i] != 0.0) {
      fno::BiasField bf{row + i, std::vector<double>(field.begin(), field.end())};
      for (double& x : bf.values) x *= net.cb[i];
      layer.b.fields.push_back(std::move(bf));
    }
    r.weights.emplace_back(row + i, net.readout[i]);
  }
  r.offset = net.offset;
  return r;
}

NeuronReadout emit_carry(FnoLayer& layer, int row, int ic, double scale, const IdentityNet& id) {
  layer.W(row, ic) += id.h / scale;
  layer.W(row + 1, ic) -= id.h / scale;
  layer.b.constant[row] += id.x0;
  layer.b.constant[row + 1] += id.x0;
  NeuronReadout r;
  r.weights = {{row, id.readout(scale)}, {row + 1, -id.readout(scale)}};
  return r;
}

void apply_readout(FnoLayer& layer, int out, const NeuronReadout& r, double factor) {
  for (const auto& [row, w] : r.weights) layer.W(out, row) += factor * w;
  layer.b.constant[out] += factor * r.offset;
}

}  // namespace psifno::emulation
