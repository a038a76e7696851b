#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace psifno::spectral {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kMaxDim = 3;

using Index = std::array<int, kMaxDim>;
using Point = std::array<double, kMaxDim>;

// Periodic grid on [0, 2π)^d with 2N+1 points per axis. The same object
// indexes the modes K_N = {k : |k|_inf <= N}, ordered lexicographically
// from -N to N with axis 0 slowest.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int modes);

  // Rejects even point counts.
  static Grid from_points(int dim, int points_per_axis);

  int dim() const noexcept { return dim_; }
  int modes() const noexcept { return modes_; }
  int points_per_axis() const noexcept { return 2 * modes_ + 1; }
  std::size_t size() const noexcept { return size_; }
  double spacing() const noexcept { return kTwoPi / points_per_axis(); }

  Grid with_modes(int modes) const { return Grid(dim_, modes); }

  Index digits(std::size_t flat) const noexcept;
  std::size_t flatten(const Index& digits) const noexcept;

  Point coordinate(std::size_t flat) const noexcept;

  Index wavenumber(std::size_t flat) const noexcept;
  std::size_t mode_index(const Index& k) const noexcept;
  bool contains_mode(const Index& k) const noexcept;
  // Position of -k.
  std::size_t mirror(std::size_t flat) const noexcept { return size_ - 1 - flat; }

  bool operator==(const Grid& o) const noexcept { return dim_ == o.dim_ && modes_ == o.modes_; }
  bool operator!=(const Grid& o) const noexcept { return !(*this == o); }

 private:
  int dim_ = 1;
  int modes_ = 0;
  std::size_t size_ = 1;
};

int squared_norm(const Index& k, int dim) noexcept;
int sup_norm(const Index& k, int dim) noexcept;

// Values of `channels` real functions at the grid points. Stored channel by
// channel; the on-disk layout is point-major (see io.hpp).
class GridField {
 public:
  GridField() = default;
  GridField(Grid grid, int channels);
  GridField(Grid grid, int channels, std::vector<double> values);

  using Sampler = std::function<void(const Point&, std::span<double>)>;
  static GridField sample(Grid grid, int channels, const Sampler& f);
  static GridField sample_scalar(Grid grid, const std::function<double(const Point&)>& f);

  const Grid& grid() const noexcept { return grid_; }
  int channels() const noexcept { return channels_; }

  std::span<double> channel(int c);
  std::span<const double> channel(int c) const;
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  double& operator()(int c, std::size_t j) { return values_[c * grid_.size() + j]; }
  double operator()(int c, std::size_t j) const { return values_[c * grid_.size() + j]; }

  bool all_finite() const noexcept;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(double s);

 private:
  Grid grid_;
  int channels_ = 0;
  std::vector<double> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double s, GridField a);

// Select channels [first, first + count).
GridField slice_channels(const GridField& f, int first, int count);
GridField stack_channels(const GridField& a, const GridField& b);

class SpectralCoeffs {
 public:
  using Complex = std::complex<double>;

  SpectralCoeffs() = default;
  SpectralCoeffs(Grid grid, int channels, bool real = true);
  // Validates Hermitian symmetry (1e-12 relative) when `real` is set.
  SpectralCoeffs(Grid grid, int channels, std::vector<Complex> coeffs, bool real = true);

  const Grid& grid() const noexcept { return grid_; }
  int modes() const noexcept { return grid_.modes(); }
  int channels() const noexcept { return channels_; }
  bool represents_real() const noexcept { return real_; }
  void set_real(bool real) noexcept { real_ = real; }

  std::span<Complex> channel(int c);
  std::span<const Complex> channel(int c) const;
  std::span<Complex> data() noexcept { return coeffs_; }
  std::span<const Complex> data() const noexcept { return coeffs_; }

  Complex& operator()(int c, std::size_t m) { return coeffs_[c * grid_.size() + m]; }
  Complex operator()(int c, std::size_t m) const { return coeffs_[c * grid_.size() + m]; }
  Complex at(int c, const Index& k) const;

  // max |c(-k) - conj(c(k))| / max |c|, zero for the zero sequence.
  double hermitian_defect() const noexcept;

 private:
  Grid grid_;
  int channels_ = 0;
  bool real_ = true;
  std::vector<Complex> coeffs_;
};

struct SobolevIndex {
  double s = 0.0;
  bool homogeneous = false;
};

}  // namespace psifno::spectral
