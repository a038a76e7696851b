#pragma once

#include <array>

#include "psifno/fno/network.hpp"

namespace psifno::emulation {

using fno::Activation;

// Two-input product network ab ~ (sq(a+b) - sq(a) - sq(b)) / 2 with
// sq_h(y) = (σ(x0+hy) - 2σ(x0) + σ(x0-hy)) / (h² σ''(x0)).
struct ProductNetSpec {
  double B = 1.0;         // |a|, |b| <= B unless the per-factor bounds are set
  double bound_a = 0.0;
  double bound_b = 0.0;
  double epsilon = 1e-6;  // sup error on the box
  double h = 0.5;         // starting step, halved during calibration
  double x0 = 1.0;
  int probe_points = 101;  // per axis
};

struct ProductNet {
  Activation act;
  double h = 0.0;
  double x0 = 0.0;
  double bound_a = 1.0;
  double bound_b = 1.0;
  double error = 0.0;  // measured on the calibration probe

  // Neuron i is σ(x0 + ca[i] a + cb[i] b); output is sum readout[i] n_i + offset.
  std::array<double, 6> ca{};
  std::array<double, 6> cb{};
  std::array<double, 6> readout{};
  double offset = 0.0;

  static constexpr int width = 6;
  static constexpr int depth = 1;

  double operator()(double a, double b) const;
};

// Throws CalibrationFailed when no h meets epsilon before cancellation wins.
ProductNet build_product_net(const Activation& act, const ProductNetSpec& spec);

// ψ_h(t) = (σ(x0+ht) - σ(x0-ht)) / (2h σ'(x0)) approximating t on [-1, 1].
struct IdentityNet {
  Activation act;
  double h = 0.0;
  double x0 = 0.0;
  double error = 0.0;  // relative, measured on [-1, 1]

  double operator()(double t) const;
  // Readout weight for a channel scaled by s.
  double readout(double s) const { return s / (2.0 * h * act.derivative(x0, 1)); }
};

IdentityNet calibrate_identity(const Activation& act, double rel_epsilon, double x0 = 0.0, double h = 0.5);

// Activated replacement of the affine map v -> W v + b + F^-1 P F v on inputs
// with |v|_{L2} <= B.
struct AffineApproxSpec {
  fno::FnoLayer target;
  spectral::Grid grid;
  double B = 1.0;
  double epsilon = 1e-6;  // sup error
  double h = 0.5;
  double x0 = 0.0;
};

// One activated layer (2 neurons per output channel) with the readout in Q.
fno::PsiFno build_affine_approx(const Activation& act, const AffineApproxSpec& spec);

// Pointwise bound for trigonometric polynomials of degree N:
// |v|_inf <= sqrt(|K_N|) |v|_{L2} / (2π)^{d/2}.
double pointwise_bound(int d, int N, double l2_bound);
// Same for one partial derivative.
double derivative_pointwise_bound(int d, int N, double l2_bound);

}  // namespace psifno::emulation
