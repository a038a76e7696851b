#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "psifno/spectral/grid.hpp"

namespace psifno::darcy {

using spectral::GridField;
using spectral::Grid;

// -div(a grad u) = f on the torus, with a sampled at resolution >= 2N.
struct DarcyProblem {
  GridField a;
  GridField f;
  double lambda = 0.5;
  int k = 1;
  int N = 8;
};

struct DarcySolution {
  GridField u;
  int iterations = 0;
  std::vector<double> residuals;  // |u^k - u^(k-1)| in the homogeneous H1 norm
};

// a_tilde = mean-free P_N I_2N (a - 1), f_N = mean-free P_N I_2N f, both at N.
struct PreparedCoefficients {
  GridField a_tilde;
  GridField f;
  GridField a_tilde_fine;  // a_tilde evaluated on the 2N grid

  int modes() const noexcept { return a_tilde.grid().modes(); }
  double a_tilde_sup() const;
};

PreparedCoefficients prepare_coefficients(const GridField& a, const GridField& f, int N);

// F_N(u) = mean-free P_N (-Δ)^-1 div(a_tilde grad u) + (-Δ)^-1 f_N.
GridField picard_step(const GridField& u, const PreparedCoefficients& c);
// The linear part of F_N only.
GridField picard_linear(const GridField& u, const PreparedCoefficients& c);

int iteration_count(double lambda, int N, int k);

// Throws CoercivityViolation, BadParameters, InsufficientResolution or NonFiniteIterate.
DarcySolution solve(const DarcyProblem& p);
DarcySolution solve_prepared(const PreparedCoefficients& c, int iterations);

// Largest |F(u) - F(u')| / |u - u'| in the homogeneous H1 norm over random pairs.
double lipschitz_estimate(const PreparedCoefficients& c, int pairs, std::uint64_t seed);

// |mean-free P_N div((1 + a_tilde) grad u) + f_N| in H^-1.
double galerkin_residual(const GridField& u, const PreparedCoefficients& c);
double dual_norm(const GridField& f);

// Conservative form of the Sobolev sufficient condition for coercivity:
// C_emb |a - 1|_{H^s} <= 1 - lambda with s = d/2 + delta.
struct SobolevAdvisory {
  double s = 0.0;
  double embedding_constant = 0.0;
  double bound = 0.0;  // C_emb |a - 1|_{H^s}
  bool satisfied = false;
};
SobolevAdvisory sobolev_coercivity_advisory(const GridField& a, double lambda, double delta = 0.5);
double sobolev_embedding_constant(int d, double s);

// 1 + amplitude sin(x_1 + ... + x_d).
GridField trig_coefficient(const Grid& grid, double amplitude);
// 1 + sum_k y_k exp(-ell |k|) e_k over |k|_inf <= band with y_k uniform in
// [-1, 1], rescaled so that max |a - 1| on a 4*band grid equals amplitude.
GridField random_decay_coefficient(const Grid& grid, double amplitude, double ell, int band, std::uint64_t seed);

// u* = cos x_1 + sin x_2 (d >= 2) or cos x_1 + sin 2x_1 (d = 1).
GridField manufactured_solution(const Grid& grid);
// f = -div(a grad u*) computed spectrally on the grid of `a`.
GridField manufactured_source(const GridField& a);

// |u_N - u_ref| in H1 after bringing both to the finer grid.
double h1_error(const GridField& u, const GridField& reference);
double l2_error(const GridField& u, const GridField& reference);

}  // namespace psifno::darcy
