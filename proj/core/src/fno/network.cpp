#include "psifno/fno/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psifno/error.hpp"

namespace psifno::fno {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::padded(int r, int c) const {
  if (r < rows || c < cols) throw DimensionMismatch("cannot pad a matrix to a smaller shape");
  Matrix out(r, c);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = (*this)(i, j);
  }
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw DimensionMismatch("matrix product shapes do not agree");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) out(i, j) += v * b(k, j);
    }
  }
  return out;
}

std::vector<double> apply(const Matrix& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.cols) throw DimensionMismatch("matrix-vector shapes do not agree");
  std::vector<double> y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) y[i] += m(i, j) * x[j];
  }
  return y;
}

FourierMultiplier::FourierMultiplier(int dim, int width) : dim_(dim), width_(width) {
  if (dim < 1 || dim > spectral::kMaxDim || width < 0) throw BadParameters("bad multiplier shape");
}

void FourierMultiplier::add(int out, int in, std::vector<Complex> values) {
  if (values.size() != mode_count()) throw DimensionMismatch("multiplier entry has the wrong number of modes");
  for (auto& e : entries_) {
    if (e.out == out && e.in == in) {
      for (std::size_t m = 0; m < values.size(); ++m) e.values[m] += values[m];
      return;
    }
  }
  entries_.push_back({out, in, std::move(values)});
}

void FourierMultiplier::add_symbol(int out, int in, const std::function<Complex(const spectral::Index&)>& symbol) {
  const spectral::Grid g(dim_, width_);
  std::vector<Complex> v(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) v[m] = symbol(g.wavenumber(m));
  add(out, in, std::move(v));
}

double FourierMultiplier::max_abs() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) {
    for (const Complex& z : e.values) s = std::max(s, std::abs(z));
  }
  return s;
}

double FourierMultiplier::hermitian_defect() const noexcept {
  const double scale = max_abs();
  if (scale == 0.0) return 0.0;
  double defect = 0.0;
  const std::size_t n = mode_count();
  for (const auto& e : entries_) {
    for (std::size_t m = 0; m < n; ++m) {
      defect = std::max(defect, std::abs(e.values[n - 1 - m] - std::conj(e.values[m])));
    }
  }
  return defect / scale;
}

PsiFno::PsiFno(spectral::Grid grid, Activation act, Matrix lift, std::vector<FnoLayer> layers, Matrix projection)
    : grid_(grid), act_(act), lift_(std::move(lift)), layers_(std::move(layers)), projection_(std::move(projection)) {
  const int dv = lift_.rows;
  if (projection_.cols != dv) {
    throw DimensionMismatch("projection has " + std::to_string(projection_.cols) + " columns, lift has " +
                            std::to_string(dv) + " rows");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    FnoLayer& layer = layers_[l];
    const std::string where = "layer " + std::to_string(l) + ": ";
    if (layer.W.rows != dv || layer.W.cols != dv) throw DimensionMismatch(where + "W must be d_v x d_v");
    if (layer.b.constant.empty()) layer.b.constant.assign(dv, 0.0);
    if (static_cast<int>(layer.b.constant.size()) != dv) throw DimensionMismatch(where + "bias must have d_v entries");
    for (const auto& f : layer.b.fields) {
      if (f.channel < 0 || f.channel >= dv || f.values.size() != grid_.size()) {
        throw DimensionMismatch(where + "bias field does not match the grid");
      }
    }
    if (layer.P.empty()) continue;
    if (layer.P.dim() != grid_.dim()) throw DimensionMismatch(where + "multiplier dimension differs from grid");
    if (layer.P.width() > grid_.modes()) {
      throw InsufficientResolution(where + "multiplier width " + std::to_string(layer.P.width()) +
                                   " exceeds grid resolution " + std::to_string(grid_.modes()));
    }
    for (const auto& e : layer.P.entries()) {
      if (e.out < 0 || e.out >= dv || e.in < 0 || e.in >= dv) {
        throw DimensionMismatch(where + "multiplier entry outside the channel range");
      }
    }
    if (layer.P.hermitian_defect() > 1e-12) {
      throw HermitianViolation(where + "multiplier must satisfy P(-k) = conj(P(k))");
    }
  }
}

int PsiFno::max_multiplier_width() const noexcept {
  int w = 0;
  for (const auto& l : layers_) {
    if (!l.P.empty()) w = std::max(w, l.P.width());
  }
  return w;
}

std::size_t nominal_size(int d_a, int d_v, int d_u, int depth, std::size_t grid_points) {
  const std::size_t dv = d_v;
  return static_cast<std::size_t>(d_u) * dv + depth * (dv * dv + dv * grid_points + dv * dv * grid_points) +
         static_cast<std::size_t>(d_a) * dv;
}

SizeReport size_report(const PsiFno& net) {
  SizeReport r;
  r.modes = net.grid().size();
  r.lift = net.hidden_channels();
  r.depth = net.depth();
  r.width = static_cast<std::size_t>(r.lift) * r.modes;
  r.size = nominal_size(net.input_channels(), r.lift, net.output_channels(), r.depth, r.modes);

  auto count = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
  };
  r.nonzero = count(net.lift().data) + count(net.projection().data);
  for (const auto& l : net.layers()) {
    r.nonzero += count(l.W.data) + count(l.b.constant);
    for (const auto& f : l.b.fields) r.nonzero += count(f.values);
    for (const auto& e : l.P.entries()) {
      r.nonzero += static_cast<std::size_t>(
          std::count_if(e.values.begin(), e.values.end(), [](const Complex& z) { return z != 0.0; }));
    }
  }
  return r;
}

}  // namespace psifno::fno
