#include "psifno/darcy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "psifno/error.hpp"
#include "psifno/spectral/ops.hpp"

namespace psifno::darcy {

using spectral::Index;
using spectral::SpectralCoeffs;
using Complex = std::complex<double>;

namespace {

constexpr Complex kI{0.0, 1.0};

SpectralCoeffs mean_free_projection(const GridField& g, int N) {
  const GridField fine = g.grid().modes() == 2 * N ? g : spectral::resample(g, 2 * N);
  return spectral::project(spectral::dft(fine), N, true);
}

double homogeneous_h1(const SpectralCoeffs& c) { return spectral::sobolev_norm(c, {1.0, true}); }

// i k / |k|^2 applied to a d-channel vector field and summed: (-Δ)^-1 div.
SpectralCoeffs inverse_laplacian_div(const SpectralCoeffs& g) {
  const Grid& grid = g.grid();
  const int d = grid.dim();
  SpectralCoeffs out(grid, 1);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const Index k = grid.wavenumber(m);
    const int k2 = spectral::squared_norm(k, d);
    if (k2 == 0) continue;
    Complex s = 0.0;
    for (int i = 0; i < d; ++i) s += kI * static_cast<double>(k[i]) * g(i, m);
    out(0, m) = s / static_cast<double>(k2);
  }
  return out;
}

// P_N(a_tilde grad u) computed on the 2N grid, as coefficients at N.
SpectralCoeffs flux(const SpectralCoeffs& u_hat, const PreparedCoefficients& c) {
  const int N = c.modes();
  const int d = u_hat.grid().dim();
  const Grid fine_grid = u_hat.grid().with_modes(2 * N);
  GridField prod(fine_grid, d);
  const auto a = c.a_tilde_fine.channel(0);
  for (int i = 0; i < d; ++i) {
    const GridField di = spectral::idft(spectral::regrid(spectral::derivative(u_hat, i), 2 * N));
    auto dst = prod.channel(i);
    auto src = di.channel(0);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = a[j] * src[j];
  }
  return spectral::regrid(spectral::dft(prod), N);
}

SpectralCoeffs linear_hat(const SpectralCoeffs& u_hat, const PreparedCoefficients& c) {
  return inverse_laplacian_div(flux(u_hat, c));
}

std::vector<SpectralCoeffs::Complex> add(std::span<const Complex> a, std::span<const Complex> b) {
  std::vector<Complex> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

GridField random_mean_free(const Grid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  GridField v(grid, 1);
  for (double& x : v.values()) x = normal(rng);
  return spectral::idft(spectral::project(spectral::dft(v), grid.modes(), true));
}

}  // namespace

double PreparedCoefficients::a_tilde_sup() const { return spectral::sup_norm(a_tilde_fine); }

PreparedCoefficients prepare_coefficients(const GridField& a, const GridField& f, int N) {
  if (N < 1) throw BadParameters("Darcy resolution must be at least 1");
  if (a.channels() != 1 || f.channels() != 1) throw DimensionMismatch("Darcy coefficient and source are scalar");
  if (a.grid().dim() != f.grid().dim()) throw DimensionMismatch("coefficient and source dimensions differ");
  if (a.grid().modes() < 2 * N || f.grid().modes() < 2 * N) {
    throw InsufficientResolution("Darcy data must be sampled with at least 2N = " + std::to_string(2 * N) + " modes");
  }
  GridField a_minus_one = a;
  for (double& x : a_minus_one.values()) x -= 1.0;

  PreparedCoefficients c;
  const SpectralCoeffs at = mean_free_projection(a_minus_one, N);
  c.a_tilde = spectral::idft(at);
  c.f = spectral::idft(mean_free_projection(f, N));
  c.a_tilde_fine = spectral::idft(spectral::regrid(at, 2 * N));
  return c;
}

GridField picard_linear(const GridField& u, const PreparedCoefficients& c) {
  if (u.grid() != c.a_tilde.grid()) throw DimensionMismatch("iterate and coefficients live on different grids");
  return spectral::idft(linear_hat(spectral::dft(u), c));
}

GridField picard_step(const GridField& u, const PreparedCoefficients& c) {
  if (u.grid() != c.a_tilde.grid()) throw DimensionMismatch("iterate and coefficients live on different grids");
  const SpectralCoeffs lin = linear_hat(spectral::dft(u), c);
  const SpectralCoeffs src = spectral::inverse_laplacian(spectral::dft(c.f));
  return spectral::idft(SpectralCoeffs(lin.grid(), 1, add(lin.data(), src.data()), true));
}

int iteration_count(double lambda, int N, int k) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw BadParameters("lambda must lie in (0, 1)");
  if (N < 1) throw BadParameters("N must be at least 1");
  if (k < 1) throw BadParameters("target rate k must be at least 1");
  const double K = std::ceil(std::log(1.0 / (lambda * std::pow(static_cast<double>(N), k))) /
                             std::log(1.0 - lambda / 2.0));
  return std::max(1, static_cast<int>(K));
}

DarcySolution solve_prepared(const PreparedCoefficients& c, int iterations) {
  const SpectralCoeffs src = spectral::inverse_laplacian(spectral::dft(c.f));
  SpectralCoeffs u(src.grid(), 1);
  DarcySolution sol;
  for (int it = 0; it < iterations; ++it) {
    const SpectralCoeffs lin = linear_hat(u, c);
    SpectralCoeffs next(u.grid(), 1, add(lin.data(), src.data()), false);
    next.set_real(true);
    SpectralCoeffs diff(u.grid(), 1);
    for (std::size_t m = 0; m < u.grid().size(); ++m) diff(0, m) = next(0, m) - u(0, m);
    const double r = homogeneous_h1(diff);
    if (!std::isfinite(r)) throw NonFiniteIterate("Picard iterate " + std::to_string(it + 1) + " is not finite");
    sol.residuals.push_back(r);
    u = std::move(next);
  }
  sol.u = spectral::idft(u);
  sol.iterations = iterations;
  return sol;
}

DarcySolution solve(const DarcyProblem& p) {
  const int K = iteration_count(p.lambda, p.N, p.k);
  const GridField a_fine = p.a.grid().modes() == 2 * p.N ? p.a : spectral::resample(p.a, 2 * p.N);
  const double amin = *std::min_element(a_fine.values().begin(), a_fine.values().end());
  if (amin < p.lambda / 2.0) {
    throw CoercivityViolation("min a on the 2N grid is " + std::to_string(amin) + " < lambda/2");
  }
  const double fmean = spectral::channel_means(p.f)[0];
  const double fscale = std::max(spectral::sup_norm(p.f), 1e-300);
  if (std::abs(fmean) > 1e-10 * fscale) throw BadParameters("Darcy source must have zero mean");

  const PreparedCoefficients c = prepare_coefficients(p.a, p.f, p.N);
  const double sup = c.a_tilde_sup();
  if (sup >= 1.0 - p.lambda / 2.0) {
    throw CoercivityViolation("|a_tilde_N| on the 2N grid is " + std::to_string(sup) + " >= 1 - lambda/2");
  }
  return solve_prepared(c, K);
}

double lipschitz_estimate(const PreparedCoefficients& c, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const GridField u = random_mean_free(c.a_tilde.grid(), rng);
    const GridField v = random_mean_free(c.a_tilde.grid(), rng);
    const GridField diff = u - v;
    const double den = spectral::sobolev_norm(diff, {1.0, true});
    const double num = spectral::sobolev_norm(picard_step(u, c) - picard_step(v, c), {1.0, true});
    if (den > 0.0) worst = std::max(worst, num / den);
  }
  return worst;
}

double dual_norm(const GridField& f) {
  const SpectralCoeffs c = spectral::dft(f);
  const Grid& g = c.grid();
  double sum = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const int k2 = spectral::squared_norm(g.wavenumber(m), g.dim());
    if (k2 == 0) continue;
    for (int ch = 0; ch < c.channels(); ++ch) sum += std::norm(c(ch, m)) / k2;
  }
  return std::sqrt(std::pow(spectral::kTwoPi, g.dim()) * sum);
}

double galerkin_residual(const GridField& u, const PreparedCoefficients& c) {
  // div((1 + a_tilde) grad u) = Δu + div(a_tilde grad u)
  const SpectralCoeffs uh = spectral::dft(u);
  const SpectralCoeffs fl = flux(uh, c);
  const SpectralCoeffs fh = spectral::dft(c.f);
  const Grid& g = uh.grid();
  SpectralCoeffs r(g, 1);
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Index k = g.wavenumber(m);
    const int k2 = spectral::squared_norm(k, g.dim());
    if (k2 == 0) continue;
    Complex div = 0.0;
    for (int i = 0; i < g.dim(); ++i) div += kI * static_cast<double>(k[i]) * fl(i, m);
    r(0, m) = -static_cast<double>(k2) * uh(0, m) + div + fh(0, m);
  }
  return dual_norm(spectral::idft(r));
}

double sobolev_embedding_constant(int d, double s) {
  if (!(s > d / 2.0)) throw BadParameters("the embedding needs s > d/2");
  const int R = d == 3 ? 24 : 64;
  const Grid g(d, R);
  double sum = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double k2 = spectral::squared_norm(g.wavenumber(m), d);
    sum += 1.0 / (1.0 + std::pow(k2, s));
  }
  // Tail over |k|_inf > R bounded by an integral over |x| >= R + 1/2.
  const double c = std::sqrt(static_cast<double>(d)) / 2.0;
  const double r0 = R + 0.5;
  const double sphere = d == 1 ? 2.0 : (d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
  sum += sphere * std::pow(r0 / (r0 - c), d - 1) * std::pow(r0 - c, d - 2.0 * s) / (2.0 * s - d);
  return std::sqrt(2.0 / std::pow(spectral::kTwoPi, d) * sum);
}

SobolevAdvisory sobolev_coercivity_advisory(const GridField& a, double lambda, double delta) {
  SobolevAdvisory adv;
  const int d = a.grid().dim();
  adv.s = d / 2.0 + delta;
  adv.embedding_constant = sobolev_embedding_constant(d, adv.s);
  GridField at = a;
  for (double& x : at.values()) x -= 1.0;
  adv.bound = adv.embedding_constant * spectral::sobolev_norm(at, {adv.s, false});
  adv.satisfied = adv.bound <= 1.0 - lambda;
  return adv;
}

GridField trig_coefficient(const Grid& grid, double amplitude) {
  return GridField::sample_scalar(grid, [&](const spectral::Point& x) {
    double s = 0.0;
    for (int i = 0; i < grid.dim(); ++i) s += x[i];
    return 1.0 + amplitude * std::sin(s);
  });
}

GridField random_decay_coefficient(const Grid& grid, double amplitude, double ell, int band, std::uint64_t seed) {
  if (band < 1) throw BadParameters("coefficient band must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Grid modes(grid.dim(), band);
  struct Term {
    Index k;
    double c;
    double s;
  };
  std::vector<Term> terms;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (modes.mirror(m) <= m) continue;  // one representative of each +-k pair, k = 0 excluded
    const Index k = modes.wavenumber(m);
    const double w = std::exp(-ell * std::sqrt(static_cast<double>(spectral::squared_norm(k, grid.dim()))));
    const double yc = uni(rng);
    const double ys = uni(rng);
    terms.push_back({k, w * yc, w * ys});
  }
  auto eval = [&](const spectral::Point& x) {
    double v = 0.0;
    for (const Term& t : terms) {
      double ph = 0.0;
      for (int i = 0; i < grid.dim(); ++i) ph += t.k[i] * x[i];
      v += t.c * std::cos(ph) + t.s * std::sin(ph);
    }
    return v;
  };
  const GridField probe = GridField::sample_scalar(Grid(grid.dim(), 4 * band), eval);
  const double sup = spectral::sup_norm(probe);
  const double scale = sup > 0.0 ? amplitude / sup : 0.0;
  return GridField::sample_scalar(grid, [&](const spectral::Point& x) { return 1.0 + scale * eval(x); });
}

GridField manufactured_solution(const Grid& grid) {
  return GridField::sample_scalar(grid, [&](const spectral::Point& x) {
    return grid.dim() == 1 ? std::cos(x[0]) + std::sin(2.0 * x[0]) : std::cos(x[0]) + std::sin(x[1]);
  });
}

GridField manufactured_source(const GridField& a) {
  const GridField us = manufactured_solution(a.grid());
  const GridField grad = spectral::gradient(us);
  const GridField flux = spectral::dealiased_product(grad, a);
  GridField f = spectral::divergence(flux);
  f *= -1.0;
  return f;
}

double h1_error(const GridField& u, const GridField& reference) {
  const int M = std::max(u.grid().modes(), reference.grid().modes());
  const GridField diff = spectral::resample(u, M) - spectral::resample(reference, M);
  return spectral::sobolev_norm(diff, {1.0, false});
}

double l2_error(const GridField& u, const GridField& reference) {
  const int M = std::max(u.grid().modes(), reference.grid().modes());
  return spectral::l2_norm(spectral::resample(u, M) - spectral::resample(reference, M));
}

}  // namespace psifno::darcy
