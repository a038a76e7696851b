#include "psifno/emulation/product_net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "psifno/error.hpp"

namespace psifno::emulation {

double ProductNet::operator()(double a, double b) const {
  double s = offset;
  for (int i = 0; i < width; ++i) s += readout[i] * act(x0 + ca[i] * a + cb[i] * b);
  return s;
}

namespace {

ProductNet assemble(const Activation& act, double h, double x0, double Ba, double Bb) {
  ProductNet net;
  net.act = act;
  net.h = h;
  net.x0 = x0;
  net.bound_a = Ba;
  net.bound_b = Bb;
  // neurons: x0 +- h(a'+b'), x0 +- h a', x0 +- h b' with a' = a/Ba, b' = b/Bb
  const double ha = h / Ba;
  const double hb = h / Bb;
  net.ca = {ha, -ha, ha, -ha, 0.0, 0.0};
  net.cb = {hb, -hb, 0.0, 0.0, hb, -hb};
  const double scale = Ba * Bb / (2.0 * h * h * act.derivative(x0, 2));
  net.readout = {scale, scale, -scale, -scale, -scale, -scale};
  net.offset = 2.0 * scale * act(x0);
  return net;
}

double probe_error(const ProductNet& net, int points) {
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    const double a = net.bound_a * (-1.0 + 2.0 * i / (points - 1));
    for (int j = 0; j < points; ++j) {
      const double b = net.bound_b * (-1.0 + 2.0 * j / (points - 1));
      worst = std::max(worst, std::abs(net(a, b) - a * b));
    }
  }
  return worst;
}

}  // namespace

ProductNet build_product_net(const Activation& act, const ProductNetSpec& spec) {
  const double Ba = spec.bound_a > 0.0 ? spec.bound_a : spec.B;
  const double Bb = spec.bound_b > 0.0 ? spec.bound_b : spec.B;
  if (!(Ba > 0.0) || !(Bb > 0.0) || !(spec.epsilon > 0.0)) throw BadParameters("product net needs positive B, epsilon");
  if (!(spec.h > 0.0) || spec.h > 1.0) throw BadParameters("product net step h must lie in (0, 1]");
  if (std::abs(act.derivative(spec.x0, 2)) < 1e-3) throw BadParameters("sigma''(x0) is too close to zero");
  const int points = std::max(spec.probe_points, 3);

  double best = INFINITY;
  for (double h = spec.h; h > 1e-12; h *= 0.5) {
    ProductNet net = assemble(act, h, spec.x0, Ba, Bb);
    net.error = probe_error(net, points);
    if (net.error <= spec.epsilon) return net;
    best = std::min(best, net.error);
    if (net.error > 64.0 * best) break;  // rounding dominates from here on
  }
  std::ostringstream msg;
  msg << "product net cannot reach " << spec.epsilon << " on [-" << Ba << "," << Ba << "]x[-" << Bb << "," << Bb
      << "]; best " << best;
  throw CalibrationFailed(msg.str());
}

double IdentityNet::operator()(double t) const {
  return (act(x0 + h * t) - act(x0 - h * t)) / (2.0 * h * act.derivative(x0, 1));
}

IdentityNet calibrate_identity(const Activation& act, double rel_epsilon, double x0, double h0) {
  if (!(rel_epsilon > 0.0)) throw BadParameters("identity net needs a positive tolerance");
  if (std::abs(act.derivative(x0, 1)) < 1e-3) throw BadParameters("sigma'(x0) is too close to zero");
  constexpr int points = 2001;
  double best = INFINITY;
  for (double h = h0; h > 1e-14; h *= 0.5) {
    IdentityNet net{act, h, x0, 0.0};
    for (int i = 0; i < points; ++i) {
      const double t = -1.0 + 2.0 * i / (points - 1);
      net.error = std::max(net.error, std::abs(net(t) - t));
    }
    if (net.error <= rel_epsilon) return net;
    best = std::min(best, net.error);
    if (net.error > 64.0 * best) break;
  }
  std::ostringstream msg;
  msg << "identity net cannot reach relative accuracy " << rel_epsilon << "; best " << best;
  throw CalibrationFailed(msg.str());
}

double pointwise_bound(int d, int N, double l2_bound) {
  const double modes = std::pow(2.0 * N + 1.0, d);
  return std::sqrt(modes) * l2_bound / std::pow(spectral::kTwoPi, d / 2.0);
}

double derivative_pointwise_bound(int d, int N, double l2_bound) {
  const double sum_k2 = std::pow(2.0 * N + 1.0, d - 1) * N * (N + 1.0) * (2.0 * N + 1.0) / 3.0;
  return std::sqrt(sum_k2) * l2_bound / std::pow(spectral::kTwoPi, d / 2.0);
}

fno::PsiFno build_affine_approx(const Activation& act, const AffineApproxSpec& spec) {
  const fno::FnoLayer& t = spec.target;
  const int in = t.in_channels();
  const int out = t.out_channels();
  const spectral::Grid& grid = spec.grid;
  const double vol = std::pow(spectral::kTwoPi, grid.dim() / 2.0);
  const double bv = pointwise_bound(grid.dim(), grid.modes(), spec.B);

  std::vector<double> scale(out, 0.0);
  for (int c = 0; c < out; ++c) {
    for (int i = 0; i < in; ++i) scale[c] += std::abs(t.W(c, i)) * bv;
    if (!t.b.constant.empty()) scale[c] += std::abs(t.b.constant[c]);
  }
  for (const auto& f : t.b.fields) {
    double m = 0.0;
    for (double x : f.values) m = std::max(m, std::abs(x));
    scale[f.channel] += m;
  }
  for (const auto& e : t.P.entries()) {
    double s = 0.0;
    for (const auto& z : e.values) s += std::norm(z);
    scale[e.out] += std::sqrt(s) * spec.B / vol;
  }
  double smax = 0.0;
  for (double& s : scale) {
    if (s == 0.0) s = 1.0;
    smax = std::max(smax, s);
  }
  const IdentityNet id = calibrate_identity(act, spec.epsilon / smax, spec.x0, spec.h);

  const int dv = std::max(in, 2 * out);
  fno::FnoLayer layer;
  layer.apply_activation = true;
  layer.W = fno::Matrix(dv, dv);
  layer.b.constant.assign(dv, id.x0);
  if (!t.P.empty()) layer.P = fno::FourierMultiplier(t.P.dim(), t.P.width());
  for (int c = 0; c < out; ++c) {
    for (int sgn = 0; sgn < 2; ++sgn) {
      const int row = 2 * c + sgn;
      const double g = (sgn == 0 ? 1.0 : -1.0) * id.h / scale[c];
      for (int i = 0; i < in; ++i) layer.W(row, i) = g * t.W(c, i);
      if (!t.b.constant.empty()) layer.b.constant[row] += g * t.b.constant[c];
    }
  }
  for (const auto& f : t.b.fields) {
    for (int sgn = 0; sgn < 2; ++sgn) {
      const double g = (sgn == 0 ? 1.0 : -1.0) * id.h / scale[f.channel];
      fno::BiasField bf{2 * f.channel + sgn, f.values};
      for (double& x : bf.values) x *= g;
      layer.b.fields.push_back(std::move(bf));
    }
  }
  for (const auto& e : t.P.entries()) {
    for (int sgn = 0; sgn < 2; ++sgn) {
      const double g = (sgn == 0 ? 1.0 : -1.0) * id.h / scale[e.out];
      std::vector<fno::Complex> v(e.values);
      for (auto& z : v) z *= g;
      layer.P.add(2 * e.out + sgn, e.in, std::move(v));
    }
  }
  fno::Matrix Q(out, dv);
  for (int c = 0; c < out; ++c) {
    Q(c, 2 * c) = id.readout(scale[c]);
    Q(c, 2 * c + 1) = -id.readout(scale[c]);
  }
  fno::PsiFno net(grid, act, fno::Matrix::identity(in).padded(dv, in), {layer}, Q);
  net.metadata()["affine_h"] = id.h;
  net.metadata()["affine_x0"] = id.x0;
  return net;
}

}  // namespace psifno::emulation
