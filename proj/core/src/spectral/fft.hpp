#pragma once

#include <complex>
#include <span>

#include "psifno/spectral/grid.hpp"

namespace psifno::spectral::detail {

// values at the grid points -> normalized coefficients in lexicographic order.
void forward(const Grid& grid, std::span<const double> values, std::span<std::complex<double>> coeffs);

// lexicographic coefficients -> real part of the unnormalized inverse sum.
void inverse(const Grid& grid, std::span<const std::complex<double>> coeffs, std::span<double> values);

}  // namespace psifno::spectral::detail
