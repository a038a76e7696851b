#include "spectral/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

namespace psifno::spectral::detail {
namespace {

struct Plan {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<std::size_t> lex_to_fft;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) {
      fftw_destroy_plan(plan->fwd);
      fftw_destroy_plan(plan->bwd);
    }
  }

  const Plan& get(int dim, int n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({dim, n});
    if (it != plans_.end()) return *it->second;

    auto plan = std::make_unique<Plan>();
    int dims[3] = {n, n, n};
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan->fwd = fftw_plan_dft(dim, dims, buf, buf, FFTW_FORWARD, flags);
    plan->bwd = fftw_plan_dft(dim, dims, buf, buf, FFTW_BACKWARD, flags);

    const int modes = (n - 1) / 2;
    const Grid g(dim, modes);
    plan->lex_to_fft.resize(total);
    for (std::size_t m = 0; m < total; ++m) {
      Index k = g.wavenumber(m);
      for (int i = 0; i < dim; ++i) k[i] = (k[i] + n) % n;
      plan->lex_to_fft[m] = g.flatten(k);
    }
    return *plans_.emplace(std::make_pair(dim, n), std::move(plan)).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, std::unique_ptr<Plan>> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

std::vector<std::complex<double>>& scratch(std::size_t n) {
  thread_local std::vector<std::complex<double>> buf;
  buf.resize(n);
  return buf;
}

}  // namespace

void forward(const Grid& grid, std::span<const double> values, std::span<std::complex<double>> coeffs) {
  const Plan& plan = cache().get(grid.dim(), grid.points_per_axis());
  const std::size_t n = grid.size();
  auto& buf = scratch(n);
  for (std::size_t j = 0; j < n; ++j) buf[j] = values[j];
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan.fwd, p, p);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < n; ++m) coeffs[m] = buf[plan.lex_to_fft[m]] * scale;
  // exact conjugate symmetry, so that derived coefficients near zero still pass the idft check
  for (std::size_t m = 0; m < n / 2; ++m) {
    const std::complex<double> z = 0.5 * (coeffs[m] + std::conj(coeffs[n - 1 - m]));
    coeffs[m] = z;
    coeffs[n - 1 - m] = std::conj(z);
  }
  coeffs[n / 2] = coeffs[n / 2].real();
}

void inverse(const Grid& grid, std::span<const std::complex<double>> coeffs, std::span<double> values) {
  const Plan& plan = cache().get(grid.dim(), grid.points_per_axis());
  const std::size_t n = grid.size();
  auto& buf = scratch(n);
  for (std::size_t m = 0; m < n; ++m) buf[plan.lex_to_fft[m]] = coeffs[m];
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan.bwd, p, p);
  for (std::size_t j = 0; j < n; ++j) values[j] = buf[j].real();
}

}  // namespace psifno::spectral::detail
