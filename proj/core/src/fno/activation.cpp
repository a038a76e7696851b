#include "psifno/fno/activation.hpp"

#include <cmath>
#include <numbers>

#include "psifno/error.hpp"

namespace psifno::fno {

Activation Activation::from_name(std::string_view name) {
  if (name == "tanh") return Activation(ActivationKind::tanh);
  if (name == "gelu") return Activation(ActivationKind::gelu);
  throw UnknownActivation("unknown activation '" + std::string(name) + "'");
}

std::string Activation::name() const { return kind_ == ActivationKind::tanh ? "tanh" : "gelu"; }

double Activation::derivative(double x, int order) const noexcept {
  if (kind_ == ActivationKind::tanh) {
    const double t = std::tanh(x);
    const double s = 1.0 - t * t;
    switch (order) {
      case 0: return t;
      case 1: return s;
      case 2: return -2.0 * t * s;
      default: return -2.0 * s * (1.0 - 3.0 * t * t);
    }
  }
  // x * Phi(x) with the exact normal CDF.
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  const double Phi = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  switch (order) {
    case 0: return x * Phi;
    case 1: return Phi + x * phi;
    case 2: return phi * (2.0 - x * x);
    default: return x * phi * (x * x - 4.0);
  }
}

}  // namespace psifno::fno
