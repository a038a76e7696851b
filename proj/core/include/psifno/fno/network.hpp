#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "psifno/fno/activation.hpp"
#include "psifno/spectral/grid.hpp"

namespace psifno::fno {

using Complex = std::complex<double>;

// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  static Matrix identity(int n);

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  // Copy into a larger zero matrix.
  Matrix padded(int r, int c) const;
};

Matrix operator*(const Matrix& a, const Matrix& b);
std::vector<double> apply(const Matrix& m, std::span<const double> x);

struct MultiplierEntry {
  int out = 0;
  int in = 0;
  std::vector<Complex> values;  // indexed like the modes of Grid(d, width)
};

// Sparse channel-to-channel Fourier multiplier supported on K_width.
class FourierMultiplier {
 public:
  FourierMultiplier() = default;
  FourierMultiplier(int dim, int width);

  int dim() const noexcept { return dim_; }
  int width() const noexcept { return width_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t mode_count() const noexcept { return spectral::Grid(dim_, width_).size(); }
  const std::vector<MultiplierEntry>& entries() const noexcept { return entries_; }
  std::vector<MultiplierEntry>& entries() noexcept { return entries_; }

  // Adds to an existing (out, in) entry when present.
  void add(int out, int in, std::vector<Complex> values);
  void add_symbol(int out, int in, const std::function<Complex(const spectral::Index&)>& symbol);

  // Entrywise max |P(-k) - conj P(k)| relative to max |P|.
  double hermitian_defect() const noexcept;
  double max_abs() const noexcept;

 private:
  int dim_ = 1;
  int width_ = 0;
  std::vector<MultiplierEntry> entries_;
};

struct BiasField {
  int channel = 0;
  std::vector<double> values;  // one value per grid point
};

struct Bias {
  std::vector<double> constant;
  std::vector<BiasField> fields;
};

// v -> act(W v + b + F^-1(P F v)); W may be rectangular inside builders.
struct FnoLayer {
  Matrix W;
  Bias b;
  FourierMultiplier P;
  bool apply_activation = true;

  int in_channels() const noexcept { return W.cols; }
  int out_channels() const noexcept { return W.rows; }
};

// Lift R (d_v x d_a), hidden layers, projection Q (d_u x d_v).
class PsiFno {
 public:
  PsiFno() = default;
  // Validates shapes, multiplier widths and the real-output condition.
  PsiFno(spectral::Grid grid, Activation act, Matrix lift, std::vector<FnoLayer> layers, Matrix projection);

  const spectral::Grid& grid() const noexcept { return grid_; }
  const Activation& activation() const noexcept { return act_; }
  const Matrix& lift() const noexcept { return lift_; }
  const Matrix& projection() const noexcept { return projection_; }
  const std::vector<FnoLayer>& layers() const noexcept { return layers_; }

  int input_channels() const noexcept { return lift_.cols; }
  int hidden_channels() const noexcept { return lift_.rows; }
  int output_channels() const noexcept { return projection_.rows; }
  int depth() const noexcept { return static_cast<int>(layers_.size()); }
  int max_multiplier_width() const noexcept;

  std::map<std::string, double>& metadata() noexcept { return metadata_; }
  const std::map<std::string, double>& metadata() const noexcept { return metadata_; }

 private:
  spectral::Grid grid_;
  Activation act_;
  Matrix lift_;
  std::vector<FnoLayer> layers_;
  Matrix projection_;
  std::map<std::string, double> metadata_;
};

struct SizeReport {
  std::size_t size = 0;        // d_u d_v + L (d_v^2 + d_v |J| + d_v^2 |J|) + d_a d_v
  std::size_t nonzero = 0;     // stored nonzero parameters
  std::size_t width = 0;       // d_v (2N+1)^d
  int lift = 0;                // d_v
  int depth = 0;               // L
  std::size_t modes = 0;       // |J|
};

// |J| is the number of grid points (2N+1)^d.
std::size_t nominal_size(int d_a, int d_v, int d_u, int depth, std::size_t grid_points);
SizeReport size_report(const PsiFno& net);

}  // namespace psifno::fno
