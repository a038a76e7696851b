#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "psifno/spectral/grid.hpp"
#include "psifno/spectral/ops.hpp"

namespace testing_support {

using psifno::spectral::Grid;
using psifno::spectral::GridField;
using psifno::spectral::Index;
using psifno::spectral::SpectralCoeffs;

inline GridField random_field(const Grid& g, int channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  GridField f(g, channels);
  for (double& v : f.values()) v = n(rng);
  return f;
}

// Band-limited random field whose modes lie in K_band.
inline GridField random_band_limited(const Grid& g, int channels, int band, std::uint64_t seed) {
  return psifno::spectral::resample(random_field(g.with_modes(band), channels, seed), g.modes());
}

// O(|J|^2) reference transform, straight from the definition.
inline std::vector<std::complex<double>> naive_dft(const GridField& f, int c) {
  const Grid& g = f.grid();
  std::vector<std::complex<double>> out(g.size());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Index k = g.wavenumber(m);
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto x = g.coordinate(j);
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) phase += k[a] * x[a];
      acc += f(c, j) * std::polar(1.0, -phase);
    }
    out[m] = acc * scale;
  }
  return out;
}

inline double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

inline double max_abs(const GridField& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace testing_support
