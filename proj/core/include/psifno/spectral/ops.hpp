#pragma once

#include <vector>

#include "psifno/spectral/grid.hpp"

namespace psifno::spectral {

// f_hat(k) = (2N+1)^-d sum_j f(x_j) exp(-i k.x_j) for k in K_N.
SpectralCoeffs dft(const GridField& f);
// f(x_j) = sum_k f_hat(k) exp(i k.x_j). Throws HermitianViolation when the
// coefficients are not conjugate symmetric to 1e-10 relative.
GridField idft(const SpectralCoeffs& c);

// P_M (or the mean-free variant) applied to coefficients; M must not exceed N.
SpectralCoeffs project(const SpectralCoeffs& c, int M, bool zero_mean = false);
// Zero-pad (M >= N) or truncate (M < N).
SpectralCoeffs regrid(const SpectralCoeffs& c, int M);

// Trigonometric interpolant of f evaluated on the 2M+1 grid.
GridField resample(const GridField& f, int M);

SpectralCoeffs derivative(const SpectralCoeffs& c, int axis);
GridField derivative(const GridField& f, int axis);
// Channel c*d + i holds the i-th partial derivative of channel c.
GridField gradient(const GridField& f);
GridField divergence(const GridField& u);
double max_divergence(const GridField& u);

// P_N(a b) computed exactly on the 2N grid. Channel counts must agree or one
// side must have a single channel.
GridField dealiased_product(const GridField& a, const GridField& b);

// 1 - k k^T / |k|^2 on k != 0; the mean is removed.
SpectralCoeffs leray_project(const SpectralCoeffs& u);
GridField leray_project(const GridField& u);

// (-Δ)^-1 on k != 0. The removed channel means are reported when asked for.
SpectralCoeffs inverse_laplacian(const SpectralCoeffs& f);
GridField inverse_laplacian(const GridField& f, std::vector<double>* removed_mean = nullptr);

// (1 - alpha Δ)^-1 with alpha >= 0.
SpectralCoeffs helmholtz_inverse(const SpectralCoeffs& f, double alpha);
GridField helmholtz_inverse(const GridField& f, double alpha);

double sobolev_norm(const SpectralCoeffs& c, SobolevIndex s);
double sobolev_norm(const GridField& f, SobolevIndex s);
double l2_norm(const GridField& f);
double sup_norm(const GridField& f);
double sup_norm(std::span<const double> v);
std::vector<double> channel_means(const GridField& f);

// Evaluate the interpolant of every channel at an arbitrary point.
std::vector<double> interpolate(const GridField& f, const Point& x);
std::vector<double> interpolate(const SpectralCoeffs& c, const Point& x);

}  // namespace psifno::spectral
