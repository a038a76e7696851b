#include "psifno/emulation/fourier_emulator.hpp"

#include <cmath>

#include "psifno/error.hpp"
#include "psifno/fno/forward.hpp"
#include "psifno/navier_stokes.hpp"
#include "psifno/spectral/ops.hpp"

namespace psifno::emulation {

using spectral::Grid;
using spectral::SpectralCoeffs;

namespace {

struct Waves {
  std::vector<double> cos;
  std::vector<double> sin;
};

Waves wave(const Grid& g, const spectral::Index& k) {
  Waves w{std::vector<double>(g.size()), std::vector<double>(g.size())};
  for (std::size_t j = 0; j < g.size(); ++j) {
    const spectral::Point x = g.coordinate(j);
    double phase = 0.0;
    for (int i = 0; i < g.dim(); ++i) phase += k[i] * x[i];
    w.cos[j] = std::cos(phase);
    w.sin[j] = std::sin(phase);
  }
  return w;
}

std::vector<GridField> random_inputs(const Grid& g, double B) {
  std::vector<GridField> out;
  for (int p = 0; p < 4; ++p) {
    GridField v = ns::random_divergence_free(g, B, 0.5, 31 + p);
    out.push_back(spectral::slice_channels(v, 0, 1));
    out.back() *= B / std::max(spectral::l2_norm(out.back()), 1e-300);
  }
  return out;
}

}  // namespace

GridField coefficient_channels(const SpectralCoeffs& c) {
  if (c.channels() != 1) throw DimensionMismatch("coefficient channels take a scalar field");
  const Grid& g = c.grid();
  GridField out(g, 2 * static_cast<int>(g.size()));
  for (std::size_t m = 0; m < g.size(); ++m) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      out(2 * m, j) = c(0, m).real();
      out(2 * m + 1, j) = c(0, m).imag();
    }
  }
  return out;
}

SpectralCoeffs coefficients_from_channels(const GridField& ch, int d, int N) {
  const Grid g(d, N);
  if (ch.channels() != 2 * static_cast<int>(g.size())) throw DimensionMismatch("expected 2|K_N| channels");
  SpectralCoeffs c(g, 1, false);
  for (std::size_t m = 0; m < g.size(); ++m) {
    const auto re = ch.channel(2 * m);
    const auto im = ch.channel(2 * m + 1);
    double sr = 0.0;
    double si = 0.0;
    for (std::size_t j = 0; j < re.size(); ++j) {
      sr += re[j];
      si += im[j];
    }
    c(0, m) = {sr / re.size(), si / im.size()};
  }
  return c;
}

fno::PsiFno build_ft_emulator(int d, int N, double B, const EmulatorOptions& o) {
  const Grid g(d, N);
  const int modes = static_cast<int>(g.size());
  ProductNetSpec ps;
  ps.bound_a = 1.05 * pointwise_bound(d, N, B);
  ps.bound_b = 1.0;
  ps.epsilon = o.epsilon;
  ps.x0 = o.product_x0;
  const ProductNet prod = build_product_net(o.activation, ps);

  LayerStack st(g, 1);
  FnoLayer& sig = st.push(12 * modes, true);
  std::vector<NeuronReadout> re;
  std::vector<NeuronReadout> im;
  for (int m = 0; m < modes; ++m) {
    const Waves w = wave(g, g.wavenumber(m));
    re.push_back(emit_product_with_field(sig, 12 * m, 0, w.cos, prod));
    im.push_back(emit_product_with_field(sig, 12 * m + 6, 0, w.sin, prod));
  }
  // mean over the torus via the zero-mode multiplier
  FnoLayer& avg = st.push(2 * modes, false);
  avg.P = fno::FourierMultiplier(d, 0);
  for (int m = 0; m < modes; ++m) {
    for (const auto& [row, wt] : re[m].weights) avg.P.add(2 * m, row, {fno::Complex(wt, 0.0)});
    for (const auto& [row, wt] : im[m].weights) avg.P.add(2 * m + 1, row, {fno::Complex(-wt, 0.0)});
    avg.b.constant[2 * m] += re[m].offset;
    avg.b.constant[2 * m + 1] -= im[m].offset;
  }

  if (o.strict) {
    const auto probes = random_inputs(g, B);
    st = strictify(st, o.activation, probes, o.epsilon / 4.0);
  }
  fno::PsiFno net = st.finalize(o.activation, Matrix::identity(2 * modes));
  net.metadata()["product_h"] = prod.h;
  net.metadata()["product_x0"] = prod.x0;
  net.metadata()["product_error"] = prod.error;
  return net;
}

fno::PsiFno build_ift_emulator(int d, int N, double B, const EmulatorOptions& o) {
  const Grid g(d, N);
  const int modes = static_cast<int>(g.size());
  const double vol = std::pow(spectral::kTwoPi, d / 2.0);
  ProductNetSpec ps;
  ps.bound_a = 1.05 * B / vol;
  ps.bound_b = 1.0;
  ps.epsilon = o.epsilon / (2.0 * 2.0 * modes * vol);
  ps.x0 = o.product_x0;
  const ProductNet prod = build_product_net(o.activation, ps);

  LayerStack st(g, 2 * modes);
  FnoLayer& sig = st.push(12 * modes, true);
  std::vector<NeuronReadout> re;
  std::vector<NeuronReadout> im;
  for (int m = 0; m < modes; ++m) {
    const Waves w = wave(g, g.wavenumber(m));
    re.push_back(emit_product_with_field(sig, 12 * m, 2 * m, w.cos, prod));
    im.push_back(emit_product_with_field(sig, 12 * m + 6, 2 * m + 1, w.sin, prod));
  }
  FnoLayer& sum = st.push(1, false);
  for (int m = 0; m < modes; ++m) {
    apply_readout(sum, 0, re[m]);
    apply_readout(sum, 0, im[m], -1.0);
  }

  if (o.strict) {
    std::vector<GridField> probes;
    for (const auto& v : random_inputs(g, B)) probes.push_back(coefficient_channels(spectral::dft(v)));
    st = strictify(st, o.activation, probes, o.epsilon / (4.0 * vol));
  }
  fno::PsiFno net = st.finalize(o.activation, Matrix::identity(1));
  net.metadata()["product_h"] = prod.h;
  net.metadata()["product_x0"] = prod.x0;
  net.metadata()["product_error"] = prod.error;
  return net;
}

fno::PsiFno fourier_conjugate(const fno::PsiFno& user, int N, double B, const EmulatorOptions& o) {
  const int d = user.grid().dim();
  const int channels = 2 * static_cast<int>(Grid(d, N).size());
  if (user.input_channels() != channels || user.output_channels() != channels) {
    throw DimensionMismatch("conjugated net must map 2|K_N| coefficient channels to themselves");
  }
  const fno::PsiFno ft = build_ft_emulator(d, N, B, o);
  const fno::PsiFno ift = build_ift_emulator(d, N, B, o);
  return fno::compose(ift, fno::compose(user, ft));
}

}  // namespace psifno::emulation
