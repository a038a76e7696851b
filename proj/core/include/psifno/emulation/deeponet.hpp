#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psifno/fno/network.hpp"

namespace psifno::emulation {

using spectral::GridField;
using spectral::Point;

// Real orthonormal trigonometric basis on the torus, one function per k in K_N:
// 1/(2π)^{d/2} for k = 0, sqrt(2) cos<k,x>/(2π)^{d/2} above the centre index,
// sqrt(2) sin<-k,x>/(2π)^{d/2} below it.
struct TrigBasisFunction {
  enum class Kind { constant, cosine, sine };
  Kind kind = Kind::constant;
  spectral::Index k{};
  double scale = 0.0;

  double operator()(const Point& y) const;
};

std::vector<TrigBasisFunction> trig_basis(int d, int N);
// max |<e_k, e_l> - δ_kl| by quadrature on the 2N grid.
double gram_defect(std::span<const TrigBasisFunction> basis, int d, int N);

struct DenseLayer {
  fno::Matrix W;
  std::vector<double> b;
  bool activate = true;
};

// tanh random features in (cos y, sin y) fitted to each basis function.
struct ApproximateTrunk {
  fno::Matrix weights;            // features x 2d
  std::vector<double> biases;     // features
  fno::Matrix coefficients;       // |K_N| x features
  double target = 0.0;            // epsilon / B_bar
  double achieved = 0.0;          // max over basis functions, measured on a 4N grid
  double b_bar = 0.0;

  double operator()(int m, const Point& y) const;
};

struct DeepOnetExport {
  int d = 0;
  int N = 0;
  int d_a = 0;
  int d_u = 0;
  fno::Activation activation;
  std::vector<Point> sensors;            // the J_N grid points
  std::vector<DenseLayer> branch;        // hidden layers, then the linear output layer
  std::vector<TrigBasisFunction> trunk;
  std::optional<ApproximateTrunk> approx_trunk;
  fno::PsiFno source;                    // kept for export

  int p() const noexcept { return d_u * static_cast<int>(trunk.size()); }
  std::size_t width() const noexcept;    // widest hidden layer
  int depth() const noexcept { return static_cast<int>(branch.size()) - 1; }

  // Coefficients beta(a), u-channel major. The input is resampled to the sensor grid.
  std::vector<double> branch_forward(const GridField& a) const;
  // sum_k beta_k(a) e_k(y) per output channel; uses the approximate trunk when asked.
  std::vector<double> evaluate(const GridField& a, const Point& y, bool use_approx_trunk = false) const;
};

// B is the input bound of the source net; it is recorded but does not change the exact export.
DeepOnetExport to_deeponet(const fno::PsiFno& net, double B);

// Fits the trunk to epsilon / B_bar with B_bar = (2N+1)^d sup_a |N(a)|_{L2} over the probes.
// The achieved error is recorded, not enforced.
void attach_approximate_trunk(DeepOnetExport& ex, double epsilon, std::span<const GridField> probes,
                              std::uint64_t seed, int features = 1024);

// Writes <base>.json and the branch payload <base>.psifno.
void write_deeponet(const DeepOnetExport& ex, const std::string& base);
DeepOnetExport read_deeponet(const std::string& json_path);

}  // namespace psifno::emulation
