#pragma once

#include <string>
#include <string_view>

namespace psifno::fno {

enum class ActivationKind { tanh, gelu };

class Activation {
 public:
  Activation() = default;
  explicit Activation(ActivationKind kind) : kind_(kind) {}
  // "tanh" or "gelu"; anything else throws UnknownActivation.
  static Activation from_name(std::string_view name);

  ActivationKind kind() const noexcept { return kind_; }
  std::string name() const;

  double operator()(double x) const noexcept { return derivative(x, 0); }
  // order 0..3
  double derivative(double x, int order) const noexcept;

 private:
  ActivationKind kind_ = ActivationKind::tanh;
};

}  // namespace psifno::fno
