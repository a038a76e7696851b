#include "psifno/navier_stokes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "psifno/error.hpp"
#include "psifno/spectral/ops.hpp"

namespace psifno::ns {

using spectral::Index;
using spectral::SpectralCoeffs;
using Complex = std::complex<double>;

namespace {

constexpr Complex kI{0.0, 1.0};

// Advecting field evaluated once on the 2N grid.
class Advector {
 public:
  explicit Advector(const SpectralCoeffs& u_hat)
      : N_(u_hat.modes()), u_fine_(spectral::idft(spectral::regrid(u_hat, 2 * N_))) {}

  // Leray-projected P_N(u . grad w) for w given by coefficients at N.
  SpectralCoeffs operator()(const SpectralCoeffs& w_hat) const {
    const int d = w_hat.grid().dim();
    const Grid fine = u_fine_.grid();
    GridField prod(fine, d);
    SpectralCoeffs one(w_hat.grid(), 1);
    for (int i = 0; i < d; ++i) {
      std::copy(w_hat.channel(i).begin(), w_hat.channel(i).end(), one.channel(0).begin());
      auto dst = prod.channel(i);
      for (int j = 0; j < d; ++j) {
        const GridField dw = spectral::idft(spectral::regrid(spectral::derivative(one, j), 2 * N_));
        auto uj = u_fine_.channel(j);
        auto src = dw.channel(0);
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += uj[p] * src[p];
      }
    }
    return spectral::leray_project(spectral::regrid(spectral::dft(prod), N_));
  }

 private:
  int N_;
  GridField u_fine_;
};

// a x + b y on coefficient arrays of the same shape.
SpectralCoeffs axpby(double a, const SpectralCoeffs& x, double b, const SpectralCoeffs& y) {
  SpectralCoeffs out(x.grid(), x.channels());
  auto o = out.data();
  auto px = x.data();
  auto py = y.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a * px[i] + b * py[i];
  return out;
}

// (1 + alpha Δ) applied per mode.
SpectralCoeffs explicit_diffusion(const SpectralCoeffs& f, double alpha) {
  SpectralCoeffs out(f.grid(), f.channels());
  for (std::size_t m = 0; m < f.grid().size(); ++m) {
    const int k2 = spectral::squared_norm(f.grid().wavenumber(m), f.grid().dim());
    for (int ch = 0; ch < f.channels(); ++ch) out(ch, m) = (1.0 - alpha * k2) * f(ch, m);
  }
  return out;
}

void check_finite(const GridField& u, int step) {
  if (!u.all_finite()) throw NonFiniteState("state at step " + std::to_string(step) + " is not finite");
}

void check_step_cfl(const GridField& u, const NsConfig& c) {
  if (!c.enforce_cfl) return;
  const double lhs = c.tau * spectral::l2_norm(u) * std::pow(static_cast<double>(c.N), c.d / 2.0 + 1.0);
  if (lhs > 0.5 * (1.0 + 1e-12)) {
    throw CflViolation("tau |u^n| N^(d/2+1) = " + std::to_string(lhs) + " exceeds 1/2");
  }
}

int iterations_for(const NsConfig& c, Scheme s) {
  return c.inner_iterations > 0 ? c.inner_iterations : kappa0(c.T, c.tau, s);
}

SpectralCoeffs first_order_solve(const SpectralCoeffs& un, double nu, double tau, int kappa) {
  const Advector adv(un);
  const SpectralCoeffs hu = spectral::helmholtz_inverse(un, nu * tau);
  SpectralCoeffs w(un.grid(), un.channels());
  for (int k = 0; k < kappa; ++k) {
    w = axpby(1.0, hu, -tau, spectral::helmholtz_inverse(adv(w), nu * tau));
  }
  return w;
}

}  // namespace

int kappa0(double T, double tau, Scheme scheme) {
  if (!(tau > 0.0) || !(T > 0.0) || tau > T * (1.0 + 1e-12)) throw BadParameters("kappa0 needs 0 < tau <= T");
  const double power = scheme == Scheme::first ? 2.0 : 3.0;
  const double k = std::ceil(power * std::log(T / tau) / std::log(2.0) - 1e-12);
  return std::max(1, static_cast<int>(k));
}

double max_cfl_timestep(double U, int N, int d) {
  return 1.0 / (2.0 * std::numbers::e * U * std::pow(static_cast<double>(N), d / 2.0 + 1.0));
}

int step_count(double T, double tau) {
  if (!(tau > 0.0) || !(T > 0.0)) throw BadParameters("T and tau must be positive");
  const double r = T / tau;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
    throw BadParameters("T / tau = " + std::to_string(r) + " is not an integer");
  }
  return static_cast<int>(n);
}

NsConfig with_integral_steps(NsConfig c) {
  if (!(c.tau > 0.0) || !(c.T > 0.0)) throw BadParameters("T and tau must be positive");
  const double r = c.T / c.tau;
  const double n = std::max(1.0, std::ceil(r - 1e-9 * std::max(1.0, r)));
  c.tau = c.T / n;
  return c;
}

void validate(const NsConfig& c) {
  if (c.d != 2 && c.d != 3) throw BadParameters("Navier-Stokes runs need d = 2 or 3");
  if (c.N < 1) throw BadParameters("N must be at least 1");
  if (!(c.nu >= 0.0)) throw BadParameters("viscosity must be non-negative");
  if (!(c.U > 0.0)) throw BadParameters("energy bound U must be positive");
  if (c.tau > c.T * (1.0 + 1e-12)) throw BadParameters("tau must not exceed T");
  step_count(c.T, c.tau);
  if (c.u0.grid() != Grid(c.d, c.N) || c.u0.channels() != c.d) {
    throw DimensionMismatch("initial field must have d channels on the (2N+1)^d grid");
  }
  const double norm = spectral::l2_norm(c.u0);
  if (norm > c.U * (1.0 + 1e-12)) throw BadParameters("|u0| exceeds the energy bound U");
  const double scale = std::max(spectral::sup_norm(c.u0) * c.N, 1e-300);
  if (spectral::max_divergence(c.u0) > 1e-10 * scale) throw BadParameters("initial field is not divergence free");
  for (double m : spectral::channel_means(c.u0)) {
    if (std::abs(m) > 1e-10 * scale) throw BadParameters("initial field must have zero mean");
  }
  if (c.enforce_cfl && c.tau > max_cfl_timestep(c.U, c.N, c.d) * (1.0 + 1e-12)) {
    throw CflViolation("tau = " + std::to_string(c.tau) + " exceeds the CFL bound " +
                       std::to_string(max_cfl_timestep(c.U, c.N, c.d)));
  }
}

GridField advection(const GridField& u, const GridField& w) {
  if (u.grid() != w.grid() || u.channels() != u.grid().dim() || w.channels() != u.channels()) {
    throw DimensionMismatch("advection needs two d-channel fields on one grid");
  }
  return spectral::idft(Advector(spectral::dft(u))(spectral::dft(w)));
}

GridField picard_map_first(const GridField& w, const GridField& u_n, double nu, double tau) {
  const SpectralCoeffs un = spectral::dft(u_n);
  const SpectralCoeffs a = Advector(un)(spectral::dft(w));
  return spectral::idft(
      axpby(1.0, spectral::helmholtz_inverse(un, nu * tau), -tau, spectral::helmholtz_inverse(a, nu * tau)));
}

GridField picard_map_second(const GridField& w, const GridField& u_n, const GridField& u_prev, double nu,
                            double tau) {
  const SpectralCoeffs un = spectral::dft(u_n);
  const SpectralCoeffs ubar = axpby(1.5, un, -0.5, spectral::dft(u_prev));
  const Advector adv(ubar);
  SpectralCoeffs rhs = axpby(1.0, explicit_diffusion(un, 0.5 * nu * tau), -0.5 * tau, adv(un));
  rhs = axpby(1.0, rhs, -0.5 * tau, adv(spectral::dft(w)));
  return spectral::idft(spectral::helmholtz_inverse(rhs, 0.5 * nu * tau));
}

std::vector<GridField> picard_iterates_first(const GridField& u_n, double nu, double tau, int k_max) {
  const SpectralCoeffs un = spectral::dft(u_n);
  const Advector adv(un);
  const SpectralCoeffs hu = spectral::helmholtz_inverse(un, nu * tau);
  SpectralCoeffs w(un.grid(), un.channels());
  std::vector<GridField> out{spectral::idft(w)};
  for (int k = 0; k < k_max; ++k) {
    w = axpby(1.0, hu, -tau, spectral::helmholtz_inverse(adv(w), nu * tau));
    out.push_back(spectral::idft(w));
  }
  return out;
}

NsState make_state(GridField u, int step, double time) {
  NsState s;
  s.step = step;
  s.time = time;
  s.energy = spectral::l2_norm(u);
  s.u = std::move(u);
  return s;
}

NsState step_first_order(const NsState& s, const NsConfig& c) {
  check_step_cfl(s.u, c);
  const SpectralCoeffs w = first_order_solve(spectral::dft(s.u), c.nu, c.tau, iterations_for(c, Scheme::first));
  NsState next = make_state(spectral::idft(w), s.step + 1, s.time + c.tau);
  check_finite(next.u, next.step);
  return next;
}

NsState step_second_order(const NsState& prev, const NsState& cur, const NsConfig& c) {
  check_step_cfl(cur.u, c);
  const int kappa = iterations_for(c, Scheme::second);
  const double nu = c.nu;
  const double tau = c.tau;
  const SpectralCoeffs un = spectral::dft(cur.u);
  const SpectralCoeffs ubar = axpby(1.5, un, -0.5, spectral::dft(prev.u));
  const Advector adv(ubar);
  const SpectralCoeffs rhs0 = axpby(1.0, explicit_diffusion(un, 0.5 * nu * tau), -0.5 * tau, adv(un));
  const SpectralCoeffs base = spectral::helmholtz_inverse(rhs0, 0.5 * nu * tau);
  SpectralCoeffs w(un.grid(), un.channels());
  for (int k = 0; k < kappa; ++k) {
    w = axpby(1.0, base, -0.5 * tau, spectral::helmholtz_inverse(adv(w), 0.5 * nu * tau));
  }
  NsState next = make_state(spectral::idft(w), cur.step + 1, cur.time + tau);
  check_finite(next.u, next.step);
  return next;
}

NsState second_order_startup(const NsState& s0, const NsConfig& c) {
  const int sub = step_count(c.T, c.tau);
  NsConfig inner = c;
  inner.T = c.tau;
  inner.tau = c.tau / sub;
  NsState s = s0;
  for (int i = 0; i < sub; ++i) {
    s = step_first_order(s, inner);
  }
  s.step = s0.step + 1;
  s.time = s0.time + c.tau;
  return s;
}

double energy(const NsState& s) { return spectral::l2_norm(s.u); }

Trajectory run(const NsConfig& c, Scheme scheme, bool keep_all) {
  validate(c);
  Trajectory tr;
  tr.steps = step_count(c.T, c.tau);
  tr.kappa = iterations_for(c, scheme);
  NsState s0 = make_state(c.u0);
  const double e0 = s0.energy;
  double emax = e0;
  tr.states.push_back(s0);

  auto record = [&](const NsState& s) {
    emax = std::max(emax, s.energy);
    if (keep_all) tr.states.push_back(s);
  };

  if (scheme == Scheme::first) {
    NsState s = s0;
    for (int n = 0; n < tr.steps; ++n) {
      s = step_first_order(s, c);
      record(s);
    }
    if (!keep_all) tr.states.push_back(s);
  } else {
    NsState prev = s0;
    NsState cur = second_order_startup(s0, c);
    record(cur);
    for (int n = 1; n < tr.steps; ++n) {
      NsState next = step_second_order(prev, cur, c);
      prev = std::move(cur);
      cur = std::move(next);
      record(cur);
    }
    if (!keep_all) tr.states.push_back(cur);
  }
  tr.max_energy_ratio = e0 > 0.0 ? emax / e0 : 0.0;
  return tr;
}

GridField taylor_green(int d, double nu, double t, int N) {
  if (d != 2) throw BadParameters("the Taylor-Green oracle is two dimensional");
  const double decay = std::exp(-2.0 * nu * t);
  return GridField::sample(Grid(2, N), 2, [&](const spectral::Point& x, std::span<double> v) {
    v[0] = std::cos(x[0]) * std::sin(x[1]) * decay;
    v[1] = -std::sin(x[0]) * std::cos(x[1]) * decay;
  });
}

GridField random_divergence_free(const Grid& grid, double norm, double decay, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int d = grid.dim();
  SpectralCoeffs c(grid, d);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const std::size_t mm = grid.mirror(m);
    if (mm <= m) continue;
    const double kn = std::sqrt(static_cast<double>(spectral::squared_norm(grid.wavenumber(m), d)));
    const double amp = std::pow(1.0 + kn, -decay);
    for (int i = 0; i < d; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      c(i, m) = amp * Complex(re, im);
      c(i, mm) = std::conj(c(i, m));
    }
  }
  GridField u = spectral::idft(spectral::leray_project(c));
  const double n0 = spectral::l2_norm(u);
  if (n0 > 0.0) u *= norm / n0;
  return u;
}

}  // namespace psifno::ns
