#include "psifno/spectral/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psifno/error.hpp"
#include "spectral/fft.hpp"

namespace psifno::spectral {
namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};

double torus_volume(int dim) { return std::pow(kTwoPi, dim); }

}  // namespace

SpectralCoeffs dft(const GridField& f) {
  SpectralCoeffs c(f.grid(), f.channels(), true);
  for (int ch = 0; ch < f.channels(); ++ch) detail::forward(f.grid(), f.channel(ch), c.channel(ch));
  return c;
}

GridField idft(const SpectralCoeffs& c) {
  if (c.hermitian_defect() > 1e-10) {
    throw HermitianViolation("inverse transform to a real field needs conjugate symmetric coefficients");
  }
  GridField f(c.grid(), c.channels());
  for (int ch = 0; ch < c.channels(); ++ch) detail::inverse(c.grid(), c.channel(ch), f.channel(ch));
  return f;
}

SpectralCoeffs regrid(const SpectralCoeffs& c, int M) {
  if (M < 0) throw BadTruncation("negative truncation level");
  const Grid& src = c.grid();
  const Grid dst = src.with_modes(M);
  SpectralCoeffs out(dst, c.channels(), c.represents_real());
  for (std::size_t m = 0; m < dst.size(); ++m) {
    const Index k = dst.wavenumber(m);
    if (!src.contains_mode(k)) continue;
    const std::size_t ms = src.mode_index(k);
    for (int ch = 0; ch < c.channels(); ++ch) out(ch, m) = c(ch, ms);
  }
  return out;
}

SpectralCoeffs project(const SpectralCoeffs& c, int M, bool zero_mean) {
  if (M > c.modes()) {
    throw BadTruncation("cannot project " + std::to_string(c.modes()) + " modes onto " + std::to_string(M));
  }
  SpectralCoeffs out = regrid(c, M);
  if (zero_mean) {
    const std::size_t zero = out.grid().mode_index(Index{0, 0, 0});
    for (int ch = 0; ch < out.channels(); ++ch) out(ch, zero) = 0.0;
  }
  return out;
}

GridField resample(const GridField& f, int M) {
  if (M < 0) throw BadTruncation("negative resolution");
  const SpectralCoeffs c = dft(f);
  if (M >= f.grid().modes()) return idft(regrid(c, M));

  // Sample the interpolant: modes congruent modulo 2M+1 coincide on the coarse grid.
  const Grid& src = f.grid();
  const Grid dst = src.with_modes(M);
  const int n = dst.points_per_axis();
  SpectralCoeffs folded(dst, f.channels());
  for (std::size_t m = 0; m < src.size(); ++m) {
    Index k = src.wavenumber(m);
    for (int i = 0; i < src.dim(); ++i) {
      k[i] = ((k[i] + M) % n + n) % n - M;
    }
    const std::size_t md = dst.mode_index(k);
    for (int ch = 0; ch < f.channels(); ++ch) folded(ch, md) += c(ch, m);
  }
  return idft(folded);
}

SpectralCoeffs derivative(const SpectralCoeffs& c, int axis) {
  if (axis < 0 || axis >= c.grid().dim()) throw DimensionMismatch("derivative axis out of range");
  SpectralCoeffs out(c.grid(), c.channels(), c.represents_real());
  for (std::size_t m = 0; m < c.grid().size(); ++m) {
    const Complex factor = kI * static_cast<double>(c.grid().wavenumber(m)[axis]);
    for (int ch = 0; ch < c.channels(); ++ch) out(ch, m) = factor * c(ch, m);
  }
  return out;
}

GridField derivative(const GridField& f, int axis) { return idft(derivative(dft(f), axis)); }

GridField gradient(const GridField& f) {
  const int d = f.grid().dim();
  const SpectralCoeffs c = dft(f);
  GridField out(f.grid(), f.channels() * d);
  for (int ch = 0; ch < f.channels(); ++ch) {
    SpectralCoeffs one(f.grid(), 1);
    std::copy(c.channel(ch).begin(), c.channel(ch).end(), one.channel(0).begin());
    for (int i = 0; i < d; ++i) {
      const GridField di = idft(derivative(one, i));
      std::copy(di.channel(0).begin(), di.channel(0).end(), out.channel(ch * d + i).begin());
    }
  }
  return out;
}

GridField divergence(const GridField& u) {
  const int d = u.grid().dim();
  if (u.channels() != d) throw DimensionMismatch("divergence needs d channels");
  const SpectralCoeffs c = dft(u);
  SpectralCoeffs div(u.grid(), 1);
  for (std::size_t m = 0; m < u.grid().size(); ++m) {
    const Index k = u.grid().wavenumber(m);
    Complex s = 0.0;
    for (int i = 0; i < d; ++i) s += kI * static_cast<double>(k[i]) * c(i, m);
    div(0, m) = s;
  }
  return idft(div);
}

double max_divergence(const GridField& u) { return sup_norm(divergence(u)); }

GridField dealiased_product(const GridField& a, const GridField& b) {
  if (a.grid() != b.grid()) throw DimensionMismatch("product factors live on different grids");
  const int ca = a.channels();
  const int cb = b.channels();
  if (ca != cb && ca != 1 && cb != 1) {
    throw DimensionMismatch("product needs equal channel counts or a scalar factor");
  }
  const int N = a.grid().modes();
  const GridField fa = resample(a, 2 * N);
  const GridField fb = resample(b, 2 * N);
  const int cout = std::max(ca, cb);
  GridField prod(fa.grid(), cout);
  for (int ch = 0; ch < cout; ++ch) {
    auto pa = fa.channel(ca == 1 ? 0 : ch);
    auto pb = fb.channel(cb == 1 ? 0 : ch);
    auto po = prod.channel(ch);
    for (std::size_t j = 0; j < po.size(); ++j) po[j] = pa[j] * pb[j];
  }
  return idft(regrid(dft(prod), N));
}

SpectralCoeffs leray_project(const SpectralCoeffs& u) {
  const Grid& g = u.grid();
  const int d = g.dim();
  if (u.channels() != d) throw DimensionMismatch("Leray projection needs d channels");
  SpectralCoeffs out = u;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Index k = g.wavenumber(m);
    const int k2 = squared_norm(k, d);
    if (k2 == 0) {
      for (int i = 0; i < d; ++i) out(i, m) = 0.0;
      continue;
    }
    Complex kdotu = 0.0;
    for (int i = 0; i < d; ++i) kdotu += static_cast<double>(k[i]) * u(i, m);
    for (int i = 0; i < d; ++i) out(i, m) -= static_cast<double>(k[i]) * kdotu / static_cast<double>(k2);
  }
  return out;
}

GridField leray_project(const GridField& u) { return idft(leray_project(dft(u))); }

SpectralCoeffs inverse_laplacian(const SpectralCoeffs& f) {
  SpectralCoeffs out(f.grid(), f.channels(), f.represents_real());
  for (std::size_t m = 0; m < f.grid().size(); ++m) {
    const int k2 = squared_norm(f.grid().wavenumber(m), f.grid().dim());
    if (k2 == 0) continue;
    for (int ch = 0; ch < f.channels(); ++ch) out(ch, m) = f(ch, m) / static_cast<double>(k2);
  }
  return out;
}

GridField inverse_laplacian(const GridField& f, std::vector<double>* removed_mean) {
  const SpectralCoeffs c = dft(f);
  if (removed_mean) {
    const std::size_t zero = f.grid().mode_index(Index{0, 0, 0});
    removed_mean->assign(f.channels(), 0.0);
    for (int ch = 0; ch < f.channels(); ++ch) (*removed_mean)[ch] = c(ch, zero).real();
  }
  return idft(inverse_laplacian(c));
}

SpectralCoeffs helmholtz_inverse(const SpectralCoeffs& f, double alpha) {
  if (!(alpha >= 0.0)) throw BadParameters("Helmholtz parameter must be non-negative");
  SpectralCoeffs out(f.grid(), f.channels(), f.represents_real());
  for (std::size_t m = 0; m < f.grid().size(); ++m) {
    const int k2 = squared_norm(f.grid().wavenumber(m), f.grid().dim());
    const double factor = 1.0 / (1.0 + alpha * k2);
    for (int ch = 0; ch < f.channels(); ++ch) out(ch, m) = factor * f(ch, m);
  }
  return out;
}

GridField helmholtz_inverse(const GridField& f, double alpha) { return idft(helmholtz_inverse(dft(f), alpha)); }

double sobolev_norm(const SpectralCoeffs& c, SobolevIndex s) {
  const Grid& g = c.grid();
  const int d = g.dim();
  double sum = 0.0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double k2 = squared_norm(g.wavenumber(m), d);
    double weight;
    if (s.homogeneous) {
      if (k2 == 0.0) continue;
      weight = std::pow(k2, s.s);
    } else {
      weight = 1.0 + std::pow(k2, s.s);
    }
    for (int ch = 0; ch < c.channels(); ++ch) sum += weight * std::norm(c(ch, m));
  }
  const double vol = torus_volume(d);
  return std::sqrt((s.homogeneous ? vol : 0.5 * vol) * sum);
}

double sobolev_norm(const GridField& f, SobolevIndex s) { return sobolev_norm(dft(f), s); }

double l2_norm(const GridField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v * v;
  return std::sqrt(sum * torus_volume(f.grid().dim()) / static_cast<double>(f.grid().size()));
}

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_norm(const GridField& f) { return sup_norm(f.values()); }

std::vector<double> channel_means(const GridField& f) {
  std::vector<double> out(f.channels(), 0.0);
  for (int ch = 0; ch < f.channels(); ++ch) {
    double s = 0.0;
    for (double v : f.channel(ch)) s += v;
    out[ch] = s / static_cast<double>(f.grid().size());
  }
  return out;
}

std::vector<double> interpolate(const SpectralCoeffs& c, const Point& x) {
  const Grid& g = c.grid();
  std::vector<double> out(c.channels(), 0.0);
  for (std::size_t m = 0; m < g.size(); ++m) {
    const Index k = g.wavenumber(m);
    double phase = 0.0;
    for (int i = 0; i < g.dim(); ++i) phase += k[i] * x[i];
    const Complex e{std::cos(phase), std::sin(phase)};
    for (int ch = 0; ch < c.channels(); ++ch) out[ch] += (c(ch, m) * e).real();
  }
  return out;
}

std::vector<double> interpolate(const GridField& f, const Point& x) { return interpolate(dft(f), x); }

}  // namespace psifno::spectral
