#include "psifno/emulation/darcy_emulator.hpp"

#include <cmath>
#include <random>

#include "psifno/darcy.hpp"
#include "psifno/error.hpp"
#include "psifno/spectral/ops.hpp"

namespace psifno::emulation {

using spectral::Grid;
using spectral::Index;
using spectral::SpectralCoeffs;
using Complex = std::complex<double>;

namespace {

bool inside(const Index& k, int d, int N) { return spectral::sup_norm(k, d) <= N; }

fno::FourierMultiplier multiplier(int d, int N) { return fno::FourierMultiplier(d, N); }

std::vector<GridField> resample_all(const std::vector<GridField>& v, int M) {
  std::vector<GridField> out;
  for (const auto& f : v) out.push_back(spectral::resample(f, M));
  return out;
}

}  // namespace

fno::PsiFno build_darcy_emulator(const DarcyEmulatorSpec& s) {
  const int N = s.N;
  const int d = s.f.grid().dim();
  const double lambda = s.lambda;
  const int K = darcy::iteration_count(lambda, N, s.k);
  const double limit = 1.0 - lambda / 2.0;
  const double Ba = s.coefficient_bound > 0.0 ? s.coefficient_bound : limit;
  if (Ba > limit) throw CoercivityViolation("coefficient bound exceeds 1 - lambda/2");
  if (s.f.grid().modes() < 2 * N) throw InsufficientResolution("source must be sampled with at least 2N modes");
  const Activation& act = s.options.activation;

  const GridField f2 = s.f.grid().modes() == 2 * N ? s.f : spectral::resample(s.f, 2 * N);
  const SpectralCoeffs fN = spectral::project(spectral::dft(f2), N, true);
  const SpectralCoeffs src = spectral::inverse_laplacian(fN);
  const GridField u_src = spectral::idft(spectral::regrid(src, 2 * N));
  std::vector<GridField> grad_src;
  for (int i = 0; i < d; ++i) grad_src.push_back(spectral::idft(spectral::regrid(spectral::derivative(src, i), 2 * N)));

  const double vol = std::pow(spectral::kTwoPi, d / 2.0);
  const double modes = std::pow(2.0 * N + 1.0, d);
  const double fnorm = darcy::dual_norm(spectral::idft(fN));
  const double Bg = std::max(1.1 * std::sqrt((modes - 1.0) / d) / vol * (2.0 / lambda) * fnorm, 1e-8);

  // H1 error <= (2/lambda) * per-block L2 flux error; half of it to products.
  const double e_prod = s.options.epsilon * lambda / (4.0 * vol * std::sqrt(static_cast<double>(d)));
  ProductNetSpec ps;
  ps.bound_a = 1.05 * Ba;
  ps.bound_b = Bg;
  ps.epsilon = e_prod;
  ps.x0 = s.options.product_x0;
  const ProductNet prod = build_product_net(act, ps);
  const IdentityNet carry = calibrate_identity(act, e_prod / (K * Bg * Ba), s.options.identity_x0);

  const Grid g2(d, 2 * N);
  LayerStack st(g2, 1);
  {
    FnoLayer& l0 = st.push(1 + d, false);
    l0.P = multiplier(d, N);
    l0.P.add_symbol(0, 0, [&](const Index& k) { return spectral::squared_norm(k, d) == 0 ? 0.0 : 1.0; });
  }
  for (int it = 1; it <= K; ++it) {
    FnoLayer& sig = st.push(2 + 6 * d, true);
    const NeuronReadout rc = emit_carry(sig, 0, 0, 1.05 * Ba, carry);
    std::vector<NeuronReadout> rp;
    for (int i = 0; i < d; ++i) rp.push_back(emit_product(sig, 2 + 6 * i, 0, 1 + i, prod));

    FnoLayer& rd = st.push(1 + d, false);
    apply_readout(rd, 0, rc);
    for (int i = 0; i < d; ++i) apply_readout(rd, 1 + i, rp[i]);

    const bool last = it == K;
    FnoLayer& up = st.push(last ? 2 : 1 + d, false);
    up.W(0, 0) = 1.0;
    up.P = multiplier(d, N);
    if (last) {
      for (int j = 0; j < d; ++j) {
        up.P.add_symbol(1, 1 + j, [&](const Index& k) -> Complex {
          const int k2 = spectral::squared_norm(k, d);
          return k2 == 0 ? Complex{} : Complex(0.0, k[j] / static_cast<double>(k2));
        });
      }
      up.b.fields.push_back({1, std::vector<double>(u_src.values().begin(), u_src.values().end())});
    } else {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          up.P.add_symbol(1 + i, 1 + j, [&](const Index& k) -> Complex {
            const int k2 = spectral::squared_norm(k, d);
            return k2 == 0 ? Complex{} : Complex(-static_cast<double>(k[i]) * k[j] / k2, 0.0);
          });
        }
        up.b.fields.push_back({1 + i, std::vector<double>(grad_src[i].values().begin(), grad_src[i].values().end())});
      }
    }
  }

  StrictReport rep;
  if (s.options.strict) {
    std::vector<GridField> probes = s.probes;
    if (probes.empty()) {
      for (int p = 0; p < 4; ++p) {
        probes.push_back(darcy::random_decay_coefficient(g2, 1.0 - lambda, 0.5, std::min(N, 4), s.seed + p));
      }
    }
    st = strictify(st, act, resample_all(probes, 2 * N), e_prod, 4.0, &rep);
  }

  fno::Matrix Q(1, 2);
  Q(0, 1) = 1.0;
  fno::PsiFno net = st.finalize(act, Q);
  auto& md = net.metadata();
  md["product_h"] = prod.h;
  md["product_x0"] = prod.x0;
  md["product_error"] = prod.error;
  md["carry_h"] = carry.h;
  md["iterations"] = K;
  md["lambda"] = lambda;
  md["gradient_bound"] = Bg;
  md["coefficient_bound"] = Ba;
  md["strict"] = s.options.strict ? 1.0 : 0.0;
  if (s.options.strict) md["strict_h"] = rep.h;
  return net;
}

fno::PsiFno build_nonlinearity_net_darcy(int d, int N, double B, const EmulatorOptions& o) {
  const Activation& act = o.activation;
  const double vol = std::pow(spectral::kTwoPi, d / 2.0);
  ProductNetSpec ps;
  ps.bound_a = pointwise_bound(d, N, B);
  ps.bound_b = derivative_pointwise_bound(d, N, B);
  ps.epsilon = o.epsilon / (1.01 * vol * std::sqrt(static_cast<double>(d)));
  ps.x0 = o.product_x0;
  const ProductNet prod = build_product_net(act, ps);

  const Grid g2(d, 2 * N);
  LayerStack st(g2, 2);
  {
    FnoLayer& l0 = st.push(1 + d, false);
    l0.P = multiplier(d, N);
    l0.P.add_symbol(0, 0, [&](const Index& k) { return inside(k, d, N) ? 1.0 : 0.0; });
    for (int i = 0; i < d; ++i) {
      l0.P.add_symbol(1 + i, 1, [&](const Index& k) { return Complex(0.0, static_cast<double>(k[i])); });
    }
  }
  FnoLayer& sig = st.push(6 * d, true);
  std::vector<NeuronReadout> rp;
  for (int i = 0; i < d; ++i) rp.push_back(emit_product(sig, 6 * i, 0, 1 + i, prod));
  FnoLayer& rd = st.push(d, false);
  for (int i = 0; i < d; ++i) apply_readout(rd, i, rp[i]);
  FnoLayer& tr = st.push(d, false);
  tr.P = multiplier(d, N);
  for (int i = 0; i < d; ++i) tr.P.add_symbol(i, i, [](const Index&) { return Complex(1.0, 0.0); });

  if (o.strict) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    std::vector<GridField> probes;
    for (int p = 0; p < 4; ++p) {
      GridField v(Grid(d, N), 2);
      for (double& x : v.values()) x = normal(rng);
      for (int c = 0; c < 2; ++c) {
        GridField one = slice_channels(v, c, 1);
        const double n = spectral::l2_norm(one);
        for (double& x : v.channel(c)) x *= B / n;
      }
      probes.push_back(spectral::resample(v, 2 * N));
    }
    st = strictify(st, act, probes, ps.epsilon);
  }

  fno::PsiFno net = st.finalize(act, Matrix::identity(d));
  net.metadata()["product_h"] = prod.h;
  net.metadata()["product_x0"] = prod.x0;
  return net;
}

}  // namespace psifno::emulation
