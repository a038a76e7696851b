#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "psifno/spectral/grid.hpp"

namespace psifno::ns {

using spectral::GridField;
using spectral::Grid;

enum class Scheme { first, second };

struct NsConfig {
  int d = 2;
  int N = 8;
  double nu = 0.0;
  double T = 1.0;
  double tau = 0.1;
  double U = 1.0;
  GridField u0;
  // The CFL bound is checked by validate() and before every step when set.
  bool enforce_cfl = true;
  // 0 selects kappa0 for the scheme.
  int inner_iterations = 0;
};

struct NsState {
  int step = 0;
  double time = 0.0;
  GridField u;
  double energy = 0.0;
};

int kappa0(double T, double tau, Scheme scheme = Scheme::first);
double max_cfl_timestep(double U, int N, int d);
// Number of steps T / tau; throws BadParameters when it is not an integer.
int step_count(double T, double tau);
// Shrinks tau to T / ceil(T / tau) so that the step count is integral.
NsConfig with_integral_steps(NsConfig c);

// Throws BadParameters, CflViolation or DimensionMismatch.
void validate(const NsConfig& c);

// Leray-projected P_N(u . grad w), products formed on the 2N grid.
GridField advection(const GridField& u, const GridField& w);

// (1 - nu tau Δ)^-1 u_n - tau (1 - nu tau Δ)^-1 P(u_n . grad w)
GridField picard_map_first(const GridField& w, const GridField& u_n, double nu, double tau);
// Crank-Nicolson form with the extrapolated advecting field 3/2 u_n - 1/2 u_prev.
GridField picard_map_second(const GridField& w, const GridField& u_n, const GridField& u_prev, double nu,
                            double tau);

// w^{n,0} = 0, ..., w^{n,k_max}.
std::vector<GridField> picard_iterates_first(const GridField& u_n, double nu, double tau, int k_max);

NsState make_state(GridField u, int step = 0, double time = 0.0);
NsState step_first_order(const NsState& s, const NsConfig& c);
NsState step_second_order(const NsState& prev, const NsState& cur, const NsConfig& c);

// u^1 from the first-order scheme on [0, tau] with n_T sub-steps of tau / n_T.
NsState second_order_startup(const NsState& s0, const NsConfig& c);

double energy(const NsState& s);

struct Trajectory {
  std::vector<NsState> states;  // u^0 .. u^{n_T}
  int kappa = 0;
  int steps = 0;
  double max_energy_ratio = 0.0;
};

// Runs to T. Intermediate states are dropped unless keep_all is set.
Trajectory run(const NsConfig& c, Scheme scheme, bool keep_all = false);

// (cos x1 sin x2, -sin x1 cos x2) exp(-2 nu t); d must be 2.
GridField taylor_green(int d, double nu, double t, int N);
// Leray-projected band-limited field with |u_hat(k)| ~ (1 + |k|)^-decay,
// normalized to the given L2 norm.
GridField random_divergence_free(const Grid& grid, double norm, double decay, std::uint64_t seed);

}  // namespace psifno::ns
