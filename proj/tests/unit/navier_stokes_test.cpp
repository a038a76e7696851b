#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "psifno/error.hpp"
#include "psifno/navier_stokes.hpp"
#include "psifno/spectral/ops.hpp"
#include "support.hpp"

using namespace psifno;
using namespace psifno::ns;
using spectral::Point;
using testing_support::max_abs;
using testing_support::max_abs_diff;

namespace {

GridField shear(int N, double amp = 1.0) {
  return GridField::sample(Grid(2, N), 2, [amp](const Point& x, std::span<double> out) {
    out[0] = amp * std::sin(x[1]);
    out[1] = 0.0;
  });
}

NsConfig tg_config(int N, double nu, double T, double tau) {
  NsConfig c;
  c.d = 2;
  c.N = N;
  c.nu = nu;
  c.T = T;
  c.tau = tau;
  c.u0 = taylor_green(2, nu, 0.0, N);
  c.U = spectral::l2_norm(c.u0);
  c.enforce_cfl = false;
  return c;
}

double slope(const std::vector<double>& taus, const std::vector<double>& errs) {
  return (std::log(errs.back()) - std::log(errs.front())) / (std::log(taus.back()) - std::log(taus.front()));
}

}  // namespace

TEST(Kappa0, ClosedForms) {
  EXPECT_EQ(kappa0(1.0, 0.01), 14);
  EXPECT_EQ(kappa0(1.0, 1.0), 1);
  EXPECT_EQ(kappa0(1.0, 0.1, Scheme::second), 10);
  EXPECT_THROW(kappa0(1.0, 2.0), BadParameters);
  EXPECT_THROW(kappa0(1.0, 0.0), BadParameters);
}

TEST(Cfl, MaxTimestep) {
  EXPECT_DOUBLE_EQ(max_cfl_timestep(1.0, 8, 2), 1.0 / (2.0 * std::numbers::e * 64.0));
  EXPECT_NEAR(max_cfl_timestep(1.0, 8, 2), 2.874e-3, 1e-6);
  EXPECT_NEAR(max_cfl_timestep(2.0, 8, 2), max_cfl_timestep(1.0, 8, 2) / 2.0, 1e-18);
  EXPECT_NEAR(max_cfl_timestep(1.0, 8, 3), max_cfl_timestep(1.0, 8, 2) / std::sqrt(8.0), 1e-16);
}

TEST(Cfl, ValidateRejectsLargeSteps) {
  NsConfig c = tg_config(8, 0.05, 1.0, 0.1);
  c.enforce_cfl = true;
  EXPECT_THROW(validate(c), CflViolation);
  c.tau = 1.0 / std::ceil(1.0 / max_cfl_timestep(c.U, c.N, c.d));
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, StepCounts) {
  EXPECT_EQ(step_count(1.0, 0.25), 4);
  EXPECT_THROW(step_count(1.0, 0.3), BadParameters);
  NsConfig c = tg_config(4, 0.0, 1.0, 0.3);
  c = with_integral_steps(c);
  EXPECT_EQ(step_count(c.T, c.tau), 4);
  EXPECT_DOUBLE_EQ(c.tau, 0.25);
}

TEST(Config, RejectsDivergentInitialData) {
  NsConfig c = tg_config(4, 0.0, 1.0, 0.25);
  c.u0 = spectral::gradient(GridField::sample_scalar(Grid(2, 4), [](const Point& x) { return std::cos(x[0]); }));
  c.U = 10.0;
  EXPECT_THROW(validate(c), BadParameters);
}

TEST(PicardMap, ZeroStateAndZeroIterate) {
  const GridField u = taylor_green(2, 0.0, 0.0, 6);
  const GridField zero(Grid(2, 6), 2);
  EXPECT_EQ(max_abs(picard_map_first(u, zero, 0.1, 0.01)), 0.0);
  EXPECT_LT(max_abs_diff(picard_map_first(zero, u, 0.1, 0.01), spectral::helmholtz_inverse(u, 0.1 * 0.01)), 1e-15);
}

TEST(PicardMap, IteratesDecayGeometrically) {
  const int N = 8;
  const GridField u = ns::random_divergence_free(Grid(2, N), 1.0, 1.0, 3);
  const double tau = max_cfl_timestep(1.0, N, 2);
  const auto it = picard_iterates_first(u, 0.05, tau, 60);
  ASSERT_EQ(it.size(), 61u);
  const double un = spectral::l2_norm(u);
  for (int k = 0; k <= 20; ++k) {
    EXPECT_LE(spectral::l2_norm(it[60] - it[k]), std::ldexp(un, -k) * (1.0 + 1e-6)) << k;
  }
}

TEST(Advection, ShearModeHasNoSelfAdvection) {
  const GridField u = shear(4);
  EXPECT_LT(max_abs(advection(u, u)), 1e-15);
}

TEST(Advection, MatchesProjectedProduct) {
  const int N = 4;
  const GridField u = ns::random_divergence_free(Grid(2, N), 1.0, 1.0, 5);
  const GridField w = ns::random_divergence_free(Grid(2, N), 1.0, 1.0, 6);
  GridField adv(Grid(2, N), 2);
  for (int i = 0; i < 2; ++i) {
    GridField acc(Grid(2, N), 1);
    for (int j = 0; j < 2; ++j) {
      acc += spectral::dealiased_product(spectral::slice_channels(u, j, 1),
                                         spectral::derivative(spectral::slice_channels(w, i, 1), j));
    }
    for (std::size_t p = 0; p < acc.values().size(); ++p) adv(i, p) = acc.values()[p];
  }
  EXPECT_LT(max_abs_diff(advection(u, w), spectral::leray_project(adv)), 1e-13);
}

TEST(FirstOrder, ShearModeDecaysLinearly) {
  const double nu = 2.0;
  const double tau = 0.1;
  NsConfig c = tg_config(4, nu, 0.5, tau);
  c.u0 = shear(4);
  c.U = spectral::l2_norm(c.u0);
  NsState s = make_state(c.u0);
  double factor = 1.0;
  for (int n = 0; n < 5; ++n) {
    s = step_first_order(s, c);
    factor /= 1.0 + nu * tau;
    EXPECT_LT(max_abs_diff(s.u, shear(4, factor)), 1e-14);
  }
}

TEST(SecondOrder, ShearModeFollowsCrankNicolson) {
  const double nu = 0.5;
  const double tau = 0.1;
  NsConfig c = tg_config(4, nu, 1.0, tau);
  c.u0 = shear(4);
  const double g = (1.0 - nu * tau / 2.0) / (1.0 + nu * tau / 2.0);
  NsState prev = make_state(shear(4, 1.0 / g));
  NsState cur = make_state(shear(4), 1, tau);
  for (int n = 0; n < 4; ++n) {
    NsState next = step_second_order(prev, cur, c);
    EXPECT_LT(max_abs_diff(next.u, g * cur.u), 1e-14);
    prev = cur;
    cur = next;
  }
}

TEST(Trajectory, ZeroDataStaysZero) {
  NsConfig c = tg_config(4, 0.1, 0.5, 0.1);
  c.u0 = GridField(Grid(2, 4), 2);
  c.U = 1.0;
  for (Scheme s : {Scheme::first, Scheme::second}) {
    const Trajectory t = run(c, s);
    EXPECT_EQ(max_abs(t.states.back().u), 0.0);
    EXPECT_EQ(energy(t.states.back()), 0.0);
  }
}

TEST(TaylorGreen, NormAndDivergence) {
  const GridField u = taylor_green(2, 0.3, 0.0, 4);
  EXPECT_NEAR(std::pow(spectral::l2_norm(u), 2), 2.0 * std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_LT(spectral::max_divergence(u), 1e-14);
  EXPECT_EQ(max_abs_diff(taylor_green(2, 0.0, 0.0, 4), taylor_green(2, 0.0, 3.0, 4)), 0.0);
  EXPECT_NEAR(spectral::l2_norm(taylor_green(2, 0.5, 1.0, 4)), std::sqrt(2.0) * std::numbers::pi * std::exp(-1.0),
              1e-12);
}

TEST(FirstOrder, TaylorGreenRateIsOne) {
  std::vector<double> taus;
  std::vector<double> errs;
  for (double tau : {0.04, 0.02, 0.01}) {
    const NsConfig c = with_integral_steps(tg_config(8, 0.05, 0.5, tau));
    taus.push_back(c.tau);
    const Trajectory t = run(c, Scheme::first);
    errs.push_back(spectral::l2_norm(t.states.back().u - taylor_green(2, 0.05, 0.5, 8)));
  }
  const double s = slope(taus, errs);
  EXPECT_GE(s, 0.8);
  EXPECT_LE(s, 1.2);
}

TEST(FirstOrder, SingleModeResolvedAtNOne) {
  const double nu = 0.1;
  const Trajectory coarse = run(tg_config(1, nu, 0.4, 0.05), Scheme::first);
  const Trajectory fine = run(tg_config(8, nu, 0.4, 0.05), Scheme::first);
  const double e1 = spectral::l2_norm(coarse.states.back().u - taylor_green(2, nu, 0.4, 1));
  const double e8 = spectral::l2_norm(fine.states.back().u - taylor_green(2, nu, 0.4, 8));
  EXPECT_NEAR(e1, e8, 1e-12 + 1e-9 * e8);
}

TEST(Stability, EnergyInvariants) {
  const int N = 8;
  NsConfig c;
  c.d = 2;
  c.N = N;
  c.nu = 0.05;
  c.U = 1.0;
  c.tau = 0.9 * max_cfl_timestep(c.U, N, 2);
  c.T = 10 * c.tau;
  c.u0 = ns::random_divergence_free(Grid(2, N), c.U, 1.0, 17);

  NsConfig converged = c;
  converged.inner_iterations = 60;
  const Trajectory ref = run(converged, Scheme::first, true);
  for (std::size_t n = 1; n < ref.states.size(); ++n) {
    EXPECT_LE(energy(ref.states[n]), energy(ref.states[n - 1]) * (1.0 + 1e-12));
    EXPECT_LE(spectral::max_divergence(ref.states[n].u), 1e-9 * std::max(1.0, max_abs(ref.states[n].u)));
    for (double m : spectral::channel_means(ref.states[n].u)) EXPECT_LE(std::abs(m), 1e-15);
  }

  const Trajectory truncated = run(c, Scheme::first, true);
  double peak = 0.0;
  for (const auto& s : truncated.states) peak = std::max(peak, energy(s));
  EXPECT_LE(peak, std::exp(1.0) * spectral::l2_norm(c.u0));
  EXPECT_LE(truncated.max_energy_ratio, std::exp(1.0));
}

TEST(Stability, EulerIsAllowed) {
  NsConfig c = tg_config(4, 0.0, 0.2, 0.05);
  const Trajectory t = run(c, Scheme::first);
  // Taylor-Green is a steady Euler solution.
  EXPECT_LT(spectral::l2_norm(t.states.back().u - c.u0), 1e-12);
}

TEST(RandomField, NormAndDivergence) {
  const GridField u = ns::random_divergence_free(Grid(3, 3), 0.7, 1.5, 4);
  EXPECT_NEAR(spectral::l2_norm(u), 0.7, 1e-12);
  EXPECT_LT(spectral::max_divergence(u), 1e-12);
}
