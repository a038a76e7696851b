#include "psifno/spectral/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psifno/error.hpp"

namespace psifno::spectral {

Grid::Grid(int dim, int modes) : dim_(dim), modes_(modes) {
  if (dim < 1 || dim > kMaxDim) {
    throw BadParameters("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (modes < 0) throw BadParameters("grid mode count must be non-negative");
  size_ = 1;
  for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(2 * modes + 1);
}

Grid Grid::from_points(int dim, int points_per_axis) {
  if (points_per_axis < 1 || points_per_axis % 2 == 0) {
    throw BadParameters("grid needs an odd number of points per axis, got " +
                        std::to_string(points_per_axis));
  }
  return Grid(dim, (points_per_axis - 1) / 2);
}

Index Grid::digits(std::size_t flat) const noexcept {
  Index d{0, 0, 0};
  const std::size_t n = static_cast<std::size_t>(points_per_axis());
  for (int i = dim_ - 1; i >= 0; --i) {
    d[i] = static_cast<int>(flat % n);
    flat /= n;
  }
  return d;
}

std::size_t Grid::flatten(const Index& digits) const noexcept {
  const std::size_t n = static_cast<std::size_t>(points_per_axis());
  std::size_t flat = 0;
  for (int i = 0; i < dim_; ++i) flat = flat * n + static_cast<std::size_t>(digits[i]);
  return flat;
}

Point Grid::coordinate(std::size_t flat) const noexcept {
  const Index d = digits(flat);
  Point x{0.0, 0.0, 0.0};
  for (int i = 0; i < dim_; ++i) x[i] = spacing() * d[i];
  return x;
}

Index Grid::wavenumber(std::size_t flat) const noexcept {
  Index k = digits(flat);
  for (int i = 0; i < dim_; ++i) k[i] -= modes_;
  return k;
}

bool Grid::contains_mode(const Index& k) const noexcept {
  for (int i = 0; i < dim_; ++i) {
    if (k[i] < -modes_ || k[i] > modes_) return false;
  }
  return true;
}

std::size_t Grid::mode_index(const Index& k) const noexcept {
  Index d{0, 0, 0};
  for (int i = 0; i < dim_; ++i) d[i] = k[i] + modes_;
  return flatten(d);
}

int squared_norm(const Index& k, int dim) noexcept {
  int s = 0;
  for (int i = 0; i < dim; ++i) s += k[i] * k[i];
  return s;
}

int sup_norm(const Index& k, int dim) noexcept {
  int s = 0;
  for (int i = 0; i < dim; ++i) s = std::max(s, std::abs(k[i]));
  return s;
}

GridField::GridField(Grid grid, int channels)
    : grid_(grid), channels_(channels), values_(grid.size() * static_cast<std::size_t>(std::max(channels, 0)), 0.0) {
  if (channels < 0) throw BadParameters("negative channel count");
}

GridField::GridField(Grid grid, int channels, std::vector<double> values)
    : grid_(grid), channels_(channels), values_(std::move(values)) {
  if (channels < 0) throw BadParameters("negative channel count");
  if (values_.size() != grid_.size() * static_cast<std::size_t>(channels)) {
    throw DimensionMismatch("grid field has " + std::to_string(values_.size()) + " values, expected " +
                            std::to_string(grid_.size() * channels));
  }
  if (!all_finite()) throw NonFiniteState("grid field contains non-finite values");
}

GridField GridField::sample(Grid grid, int channels, const Sampler& f) {
  GridField out(grid, channels);
  std::vector<double> buf(channels);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    f(grid.coordinate(j), buf);
    for (int c = 0; c < channels; ++c) out(c, j) = buf[c];
  }
  if (!out.all_finite()) throw NonFiniteState("sampled field contains non-finite values");
  return out;
}

GridField GridField::sample_scalar(Grid grid, const std::function<double(const Point&)>& f) {
  return sample(grid, 1, [&](const Point& x, std::span<double> v) { v[0] = f(x); });
}

std::span<double> GridField::channel(int c) {
  return std::span<double>(values_).subspan(c * grid_.size(), grid_.size());
}

std::span<const double> GridField::channel(int c) const {
  return std::span<const double>(values_).subspan(c * grid_.size(), grid_.size());
}

bool GridField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridField& GridField::operator+=(const GridField& o) {
  if (o.grid_ != grid_ || o.channels_ != channels_) throw DimensionMismatch("field shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  if (o.grid_ != grid_ || o.channels_ != channels_) throw DimensionMismatch("field shapes differ");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridField& GridField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(double s, GridField a) { return a *= s; }

GridField slice_channels(const GridField& f, int first, int count) {
  if (first < 0 || count < 0 || first + count > f.channels()) {
    throw DimensionMismatch("channel slice out of range");
  }
  GridField out(f.grid(), count);
  for (int c = 0; c < count; ++c) {
    std::copy(f.channel(first + c).begin(), f.channel(first + c).end(), out.channel(c).begin());
  }
  return out;
}

GridField stack_channels(const GridField& a, const GridField& b) {
  if (a.grid() != b.grid()) throw DimensionMismatch("cannot stack fields on different grids");
  GridField out(a.grid(), a.channels() + b.channels());
  std::copy(a.values().begin(), a.values().end(), out.values().begin());
  std::copy(b.values().begin(), b.values().end(), out.values().begin() + a.values().size());
  return out;
}

SpectralCoeffs::SpectralCoeffs(Grid grid, int channels, bool real)
    : grid_(grid), channels_(channels), real_(real),
      coeffs_(grid.size() * static_cast<std::size_t>(std::max(channels, 0))) {
  if (channels < 0) throw BadParameters("negative channel count");
}

SpectralCoeffs::SpectralCoeffs(Grid grid, int channels, std::vector<Complex> coeffs, bool real)
    : grid_(grid), channels_(channels), real_(real), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_.size() * static_cast<std::size_t>(channels)) {
    throw DimensionMismatch("coefficient count does not match grid and channels");
  }
  if (real_ && hermitian_defect() > 1e-12) {
    throw HermitianViolation("coefficients of a real field must satisfy c(-k) = conj(c(k))");
  }
}

std::span<SpectralCoeffs::Complex> SpectralCoeffs::channel(int c) {
  return std::span<Complex>(coeffs_).subspan(c * grid_.size(), grid_.size());
}

std::span<const SpectralCoeffs::Complex> SpectralCoeffs::channel(int c) const {
  return std::span<const Complex>(coeffs_).subspan(c * grid_.size(), grid_.size());
}

SpectralCoeffs::Complex SpectralCoeffs::at(int c, const Index& k) const {
  if (!grid_.contains_mode(k)) return {0.0, 0.0};
  return (*this)(c, grid_.mode_index(k));
}

double SpectralCoeffs::hermitian_defect() const noexcept {
  double scale = 0.0;
  for (const Complex& z : coeffs_) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) return 0.0;
  double defect = 0.0;
  const std::size_t n = grid_.size();
  for (int c = 0; c < channels_; ++c) {
    const Complex* p = coeffs_.data() + c * n;
    for (std::size_t m = 0; m < n; ++m) {
      defect = std::max(defect, std::abs(p[grid_.mirror(m)] - std::conj(p[m])));
    }
  }
  return defect / scale;
}

}  // namespace psifno::spectral
