#include "psifno/fno/forward.hpp"

#include <algorithm>

#include "psifno/error.hpp"
#include "psifno/spectral/ops.hpp"
#include "spectral/fft.hpp"

namespace psifno::fno {

using spectral::Grid;
using spectral::SpectralCoeffs;

GridField apply_pointwise(const Matrix& m, const GridField& v) {
  if (m.cols != v.channels()) throw DimensionMismatch("pointwise map expects " + std::to_string(m.cols) + " channels");
  GridField out(v.grid(), m.rows);
  for (int o = 0; o < m.rows; ++o) {
    auto dst = out.channel(o);
    for (int i = 0; i < m.cols; ++i) {
      const double w = m(o, i);
      if (w == 0.0) continue;
      auto src = v.channel(i);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

GridField layer_forward(const FnoLayer& layer, const GridField& v, const Activation& act) {
  const Grid& grid = v.grid();
  GridField out = apply_pointwise(layer.W, v);
  const int cout = out.channels();

  if (!layer.b.constant.empty()) {
    if (static_cast<int>(layer.b.constant.size()) != cout) throw DimensionMismatch("bias size differs from W rows");
    for (int o = 0; o < cout; ++o) {
      const double c = layer.b.constant[o];
      if (c == 0.0) continue;
      for (double& x : out.channel(o)) x += c;
    }
  }
  for (const auto& f : layer.b.fields) {
    if (f.channel >= cout || f.values.size() != grid.size()) throw DimensionMismatch("bias field shape");
    auto dst = out.channel(f.channel);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += f.values[j];
  }

  if (!layer.P.empty()) {
    const int W = layer.P.width();
    if (W > grid.modes()) throw InsufficientResolution("multiplier wider than the grid");
    const Grid pg(grid.dim(), W);
    std::vector<std::size_t> to_grid(pg.size());
    for (std::size_t m = 0; m < pg.size(); ++m) to_grid[m] = grid.mode_index(pg.wavenumber(m));

    std::vector<std::vector<Complex>> vin(v.channels());
    std::vector<std::vector<Complex>> acc(cout);
    for (const auto& e : layer.P.entries()) {
      if (e.in >= v.channels() || e.out >= cout) throw DimensionMismatch("multiplier entry outside the layer");
      auto& src = vin[e.in];
      if (src.empty()) {
        src.resize(grid.size());
        spectral::detail::forward(grid, v.channel(e.in), src);
      }
      auto& dst = acc[e.out];
      if (dst.empty()) dst.assign(grid.size(), Complex{});
      for (std::size_t m = 0; m < pg.size(); ++m) dst[to_grid[m]] += e.values[m] * src[to_grid[m]];
    }
    std::vector<double> buf(grid.size());
    for (int o = 0; o < cout; ++o) {
      if (acc[o].empty()) continue;
      spectral::detail::inverse(grid, acc[o], buf);
      auto dst = out.channel(o);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += buf[j];
    }
  }

  if (layer.apply_activation) {
    for (double& x : out.values()) x = act(x);
  }
  return out;
}

GridField fno_forward(const PsiFno& net, const GridField& a) {
  if (a.channels() != net.input_channels()) {
    throw DimensionMismatch("network expects " + std::to_string(net.input_channels()) + " input channels, got " +
                            std::to_string(a.channels()));
  }
  if (a.grid().dim() != net.grid().dim()) throw DimensionMismatch("input dimension differs from the network");
  if (a.grid().modes() < net.max_multiplier_width()) {
    throw InsufficientResolution("input has " + std::to_string(a.grid().modes()) + " modes, multipliers need " +
                                 std::to_string(net.max_multiplier_width()));
  }
  GridField v = apply_pointwise(net.lift(), a.grid() == net.grid() ? a : spectral::resample(a, net.grid().modes()));
  for (const auto& layer : net.layers()) v = layer_forward(layer, v, net.activation());
  return apply_pointwise(net.projection(), v);
}

std::vector<double> fno_evaluate_at(const PsiFno& net, const GridField& a, const spectral::Point& y) {
  return spectral::interpolate(fno_forward(net, a), y);
}

FnoLayer precompose(const FnoLayer& layer, const Matrix& C) {
  if (C.rows != layer.in_channels()) throw DimensionMismatch("precompose shapes do not agree");
  FnoLayer out;
  out.W = layer.W * C;
  out.b = layer.b;
  out.apply_activation = layer.apply_activation;
  if (!layer.P.empty()) {
    out.P = FourierMultiplier(layer.P.dim(), layer.P.width());
    for (const auto& e : layer.P.entries()) {
      for (int i = 0; i < C.cols; ++i) {
        const double c = C(e.in, i);
        if (c == 0.0) continue;
        std::vector<Complex> v(e.values);
        for (auto& z : v) z *= c;
        out.P.add(e.out, i, std::move(v));
      }
    }
  }
  return out;
}

FnoLayer pad_layer(const FnoLayer& layer, int in, int out) {
  FnoLayer p = layer;
  p.W = layer.W.padded(out, in);
  if (p.b.constant.empty()) p.b.constant.assign(out, 0.0);
  p.b.constant.resize(out, 0.0);
  return p;
}

PsiFno compose(const PsiFno& outer, const PsiFno& inner) {
  if (outer.grid() != inner.grid()) throw DimensionMismatch("composed networks must share a grid");
  if (outer.activation().kind() != inner.activation().kind()) {
    throw BadParameters("composed networks must share an activation");
  }
  if (outer.input_channels() != inner.output_channels()) {
    throw DimensionMismatch("outer input channels differ from inner output channels");
  }
  const Matrix bridge = outer.lift() * inner.projection();  // dv_outer x dv_inner

  std::vector<FnoLayer> layers;
  Matrix lift;
  Matrix proj;
  if (inner.depth() == 0) {
    lift = bridge * inner.lift();
    layers = outer.layers();
    proj = outer.projection();
  } else if (outer.depth() == 0) {
    lift = inner.lift();
    layers = inner.layers();
    proj = outer.projection() * bridge;
  } else {
    lift = inner.lift();
    layers = inner.layers();
    layers.push_back(precompose(outer.layers().front(), bridge));
    for (std::size_t l = 1; l < outer.layers().size(); ++l) layers.push_back(outer.layers()[l]);
    proj = outer.projection();
  }

  int dv = std::max(lift.rows, proj.cols);
  for (const auto& l : layers) dv = std::max({dv, l.in_channels(), l.out_channels()});
  for (auto& l : layers) l = pad_layer(l, dv, dv);

  PsiFno net(outer.grid(), outer.activation(), lift.padded(dv, lift.cols), std::move(layers),
             proj.padded(proj.rows, dv));
  net.metadata() = inner.metadata();
  for (const auto& [k, v] : outer.metadata()) net.metadata()[k] = v;
  return net;
}

}  // namespace psifno::fno
