#include "psifno/emulation/ns_emulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "psifno/error.hpp"
#include "psifno/spectral/ops.hpp"

namespace psifno::emulation {

using spectral::Grid;
using spectral::Index;
using Complex = std::complex<double>;

namespace {

double leray(const Index& k, int d, int i, int l) {
  const int k2 = spectral::squared_norm(k, d);
  if (k2 == 0) return 0.0;
  return (i == l ? 1.0 : 0.0) - static_cast<double>(k[i]) * k[l] / k2;
}

std::vector<GridField> default_probes(const ns::NsConfig& c, std::uint64_t seed) {
  std::vector<GridField> p;
  for (int i = 0; i < 3; ++i) p.push_back(ns::random_divergence_free(Grid(c.d, c.N), c.U, 1.0, seed + i));
  return p;
}

}  // namespace

double measure_step_lipschitz(const ns::NsConfig& c, std::span<const GridField> probes, std::uint64_t seed) {
  double lip = 0.0;
  std::uint64_t s = seed;
  for (const auto& u : probes) {
    const ns::NsState base = ns::step_first_order(ns::make_state(u), c);
    for (int dir = 0; dir < 3; ++dir) {
      const double size = 1e-6 * std::max(spectral::l2_norm(u), c.U);
      GridField delta = ns::random_divergence_free(u.grid(), size, 1.0, 1000003 * ++s);
      const ns::NsState pert = ns::step_first_order(ns::make_state(u + delta), c);
      lip = std::max(lip, spectral::l2_norm(pert.u - base.u) / spectral::l2_norm(delta));
    }
  }
  return lip;
}

fno::PsiFno build_ns_emulator(const NsEmulatorSpec& s) {
  const ns::NsConfig& c = s.config;
  ns::validate(c);
  const int d = c.d;
  const int N = c.N;
  const int steps = ns::step_count(c.T, c.tau);
  const int kappa = c.inner_iterations > 0 ? c.inner_iterations : ns::kappa0(c.T, c.tau);
  const double tau = c.tau;
  const double nu = c.nu;
  const Activation& act = s.options.activation;

  const std::vector<GridField> probes = s.probes.empty() ? default_probes(c, s.seed) : s.probes;
  ns::NsConfig lc = c;
  lc.enforce_cfl = false;
  const double lip_step = std::max(1.0, 1.1 * measure_step_lipschitz(lc, probes, s.seed));
  const double Lambda = 2.0 * std::pow(lip_step, steps);
  const double eps_block = s.options.epsilon / (steps * kappa * Lambda);

  const double vol = std::pow(spectral::kTwoPi, d / 2.0);
  const double U = std::numbers::e * c.U;
  const double Bu = 1.05 * pointwise_bound(d, N, U);
  const double BG = 1.05 * derivative_pointwise_bound(d, N, 2.0 * U);
  const double e_prod = eps_block / (2.0 * tau * vol * std::pow(d, 1.5));
  const double e_carry = eps_block / (2.0 * vol * std::sqrt(static_cast<double>(d)) * (1.0 + tau * d * BG));

  ProductNetSpec ps;
  ps.bound_a = Bu;
  ps.bound_b = BG;
  ps.epsilon = e_prod;
  ps.x0 = s.options.product_x0;
  const ProductNet prod = build_product_net(act, ps);
  const IdentityNet carry = calibrate_identity(act, e_carry / Bu, s.options.identity_x0);

  const Grid g2(d, 2 * N);
  const int state = d + d * d;
  auto G = [d](int i, int j) { return d + i * d + j; };
  auto H = [&](const Index& k) { return 1.0 / (1.0 + nu * tau * spectral::squared_norm(k, d)); };

  LayerStack st(g2, d);
  {
    FnoLayer& l0 = st.push(state, false);
    l0.P = fno::FourierMultiplier(d, N);
    for (int i = 0; i < d; ++i) l0.P.add_symbol(i, i, [](const Index&) { return Complex(1.0, 0.0); });
  }
  for (int n = 0; n < steps; ++n) {
    for (int it = 1; it <= kappa; ++it) {
      FnoLayer& sig = st.push(2 * d + 6 * d * d, true);
      std::vector<NeuronReadout> rc;
      for (int i = 0; i < d; ++i) rc.push_back(emit_carry(sig, 2 * i, i, Bu, carry));
      std::vector<NeuronReadout> rp;
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) rp.push_back(emit_product(sig, 2 * d + 6 * (i * d + j), j, G(i, j), prod));
      }
      FnoLayer& rd = st.push(2 * d, false);
      for (int i = 0; i < d; ++i) {
        apply_readout(rd, i, rc[i]);
        for (int j = 0; j < d; ++j) apply_readout(rd, d + i, rp[i * d + j]);
      }

      const bool end_of_step = it == kappa;
      FnoLayer& up = st.push(state, false);
      up.P = fno::FourierMultiplier(d, N);
      for (int i = 0; i < d; ++i) {
        if (end_of_step) {
          up.P.add_symbol(i, i, [&](const Index& k) { return Complex(H(k), 0.0); });
          for (int l = 0; l < d; ++l) {
            up.P.add_symbol(i, d + l, [&](const Index& k) { return Complex(-tau * H(k) * leray(k, d, i, l), 0.0); });
          }
          continue;
        }
        up.P.add_symbol(i, i, [](const Index&) { return Complex(1.0, 0.0); });
        for (int j = 0; j < d; ++j) {
          up.P.add_symbol(G(i, j), i, [&](const Index& k) { return Complex(0.0, k[j] * H(k)); });
          for (int l = 0; l < d; ++l) {
            up.P.add_symbol(G(i, j), d + l,
                            [&](const Index& k) { return Complex(0.0, -tau * k[j] * H(k) * leray(k, d, i, l)); });
          }
        }
      }
    }
  }

  if (s.options.strict) {
    std::vector<GridField> fine;
    for (const auto& p : probes) fine.push_back(spectral::resample(p, 2 * N));
    st = strictify(st, act, fine, e_carry);
  }

  fno::Matrix Q(d, state);
  for (int i = 0; i < d; ++i) Q(i, i) = 1.0;
  fno::PsiFno net = st.finalize(act, Q);
  auto& md = net.metadata();
  md["product_h"] = prod.h;
  md["product_x0"] = prod.x0;
  md["carry_h"] = carry.h;
  md["steps"] = steps;
  md["kappa"] = kappa;
  md["step_lipschitz"] = lip_step;
  md["block_epsilon"] = eps_block;
  md["strict"] = s.options.strict ? 1.0 : 0.0;
  return net;
}

fno::PsiFno build_ns_nonlinearity_net(int d, int N, double B, const EmulatorOptions& o) {
  const Activation& act = o.activation;
  const double vol = std::pow(spectral::kTwoPi, d / 2.0);
  ProductNetSpec ps;
  ps.bound_a = pointwise_bound(d, N, B);
  ps.bound_b = derivative_pointwise_bound(d, N, B);
  ps.epsilon = o.epsilon / (1.01 * vol * std::pow(d, 1.5));
  ps.x0 = o.product_x0;
  const ProductNet prod = build_product_net(act, ps);

  const Grid g2(d, 2 * N);
  auto G = [d](int i, int j) { return d + i * d + j; };
  LayerStack st(g2, 2 * d);
  {
    FnoLayer& l0 = st.push(d + d * d, false);
    l0.P = fno::FourierMultiplier(d, N);
    for (int i = 0; i < d; ++i) {
      l0.P.add_symbol(i, i, [](const Index&) { return Complex(1.0, 0.0); });
      for (int j = 0; j < d; ++j) {
        l0.P.add_symbol(G(i, j), d + i, [j](const Index& k) { return Complex(0.0, static_cast<double>(k[j])); });
      }
    }
  }
  FnoLayer& sig = st.push(6 * d * d, true);
  std::vector<NeuronReadout> rp;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) rp.push_back(emit_product(sig, 6 * (i * d + j), j, G(i, j), prod));
  }
  FnoLayer& rd = st.push(d, false);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) apply_readout(rd, i, rp[i * d + j]);
  }
  FnoLayer& pr = st.push(d, false);
  pr.P = fno::FourierMultiplier(d, N);
  for (int i = 0; i < d; ++i) {
    for (int l = 0; l < d; ++l) {
      pr.P.add_symbol(i, l, [&, i, l](const Index& k) { return Complex(leray(k, d, i, l), 0.0); });
    }
  }

  if (o.strict) {
    std::vector<GridField> probes;
    for (int p = 0; p < 4; ++p) {
      const GridField u = ns::random_divergence_free(Grid(d, N), B, 1.0, 11 + 2 * p);
      const GridField w = ns::random_divergence_free(Grid(d, N), B, 1.0, 12 + 2 * p);
      probes.push_back(spectral::resample(spectral::stack_channels(u, w), 2 * N));
    }
    st = strictify(st, act, probes, ps.epsilon);
  }

  fno::PsiFno net = st.finalize(act, Matrix::identity(d));
  net.metadata()["product_h"] = prod.h;
  net.metadata()["product_x0"] = prod.x0;
  return net;
}

}  // namespace psifno::emulation
