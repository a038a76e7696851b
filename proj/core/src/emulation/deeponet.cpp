#include "psifno/emulation/deeponet.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"
#include "psifno/error.hpp"
#include "psifno/fno/forward.hpp"
#include "psifno/fno/model_io.hpp"
#include "psifno/spectral/ops.hpp"

#if PSIFNO_HAVE_EIGEN
#include <Eigen/Dense>
#endif

namespace psifno::emulation {

using spectral::Grid;
using Complex = std::complex<double>;

double TrigBasisFunction::operator()(const Point& y) const {
  if (kind == Kind::constant) return scale;
  double phase = 0.0;
  for (int i = 0; i < spectral::kMaxDim; ++i) phase += k[i] * y[i];
  return scale * (kind == Kind::cosine ? std::cos(phase) : std::sin(phase));
}

std::vector<TrigBasisFunction> trig_basis(int d, int N) {
  const Grid g(d, N);
  const std::size_t centre = g.size() / 2;
  const double e0 = 1.0 / std::pow(spectral::kTwoPi, d / 2.0);
  std::vector<TrigBasisFunction> out(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    auto& f = out[m];
    if (m == centre) {
      f.scale = e0;
      continue;
    }
    f.scale = std::sqrt(2.0) * e0;
    f.kind = m > centre ? TrigBasisFunction::Kind::cosine : TrigBasisFunction::Kind::sine;
    f.k = g.wavenumber(m > centre ? m : g.mirror(m));
  }
  return out;
}

double gram_defect(std::span<const TrigBasisFunction> basis, int d, int N) {
  const Grid q(d, std::max(2 * N, 1));
  const double w = std::pow(spectral::kTwoPi, d) / q.size();
  std::vector<std::vector<double>> vals(basis.size(), std::vector<double>(q.size()));
  for (std::size_t m = 0; m < basis.size(); ++m) {
    for (std::size_t j = 0; j < q.size(); ++j) vals[m][j] = basis[m](q.coordinate(j));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = a; b < basis.size(); ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) s += vals[a][j] * vals[b][j];
      worst = std::max(worst, std::abs(w * s - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

namespace {

// Real convolution kernel of one multiplier entry on the net grid, indexed by grid offset.
std::vector<double> kernel(const Grid& g, int width, const std::vector<Complex>& values) {
  const Grid wg(g.dim(), width);
  spectral::SpectralCoeffs c(g, 1, false);
  for (std::size_t m = 0; m < wg.size(); ++m) c(0, g.mode_index(wg.wavenumber(m))) = values[m];
  const GridField k = spectral::idft(c);
  std::vector<double> out(k.channel(0).begin(), k.channel(0).end());
  for (double& x : out) x /= static_cast<double>(g.size());
  return out;
}

// flat index of x_j - x_j' on the periodic grid
std::size_t offset(const Grid& g, std::size_t j, std::size_t jp) {
  const int n = g.points_per_axis();
  const auto a = g.digits(j);
  const auto b = g.digits(jp);
  spectral::Index diff{};
  for (int i = 0; i < g.dim(); ++i) diff[i] = ((a[i] - b[i]) % n + n) % n;
  return g.flatten(diff);
}

DenseLayer densify(const Grid& g, const fno::FnoLayer& L) {
  const std::size_t J = g.size();
  const int in = L.in_channels();
  const int out = L.out_channels();
  DenseLayer D{fno::Matrix(out * J, in * J), std::vector<double>(out * J, 0.0), L.apply_activation};
  for (int c = 0; c < out; ++c) {
    for (int ci = 0; ci < in; ++ci) {
      const double w = L.W(c, ci);
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < J; ++j) D.W(c * J + j, ci * J + j) += w;
    }
    for (std::size_t j = 0; j < J; ++j) D.b[c * J + j] = L.b.constant[c];
  }
  for (const auto& f : L.b.fields) {
    for (std::size_t j = 0; j < J; ++j) D.b[f.channel * J + j] += f.values[j];
  }
  for (const auto& e : L.P.entries()) {
    const std::vector<double> kv = kernel(g, L.P.width(), e.values);
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t jp = 0; jp < J; ++jp) D.W(e.out * J + j, e.in * J + jp) += kv[offset(g, j, jp)];
    }
  }
  return D;
}

// Grid values of one channel -> coefficients in the trig basis.
fno::Matrix change_of_basis(const Grid& g) {
  const std::size_t J = g.size();
  const std::size_t centre = J / 2;
  const double vol = std::pow(spectral::kTwoPi, g.dim() / 2.0);
  fno::Matrix T(J, J);
  for (std::size_t m = 0; m < J; ++m) {
    const spectral::Index k = g.wavenumber(m > centre ? m : g.mirror(m));
    for (std::size_t j = 0; j < J; ++j) {
      const Point x = g.coordinate(j);
      double phase = 0.0;
      for (int i = 0; i < g.dim(); ++i) phase += k[i] * x[i];
      double v = vol / J;
      if (m > centre) v *= std::sqrt(2.0) * std::cos(phase);
      if (m < centre) v *= std::sqrt(2.0) * std::sin(phase);
      T(m, j) = v;
    }
  }
  return T;
}

// (A ⊗ I_J) with A given per channel pair
fno::Matrix kron_identity(const fno::Matrix& A, std::size_t J) {
  fno::Matrix M(A.rows * J, A.cols * J);
  for (int r = 0; r < A.rows; ++r) {
    for (int c = 0; c < A.cols; ++c) {
      if (A(r, c) == 0.0) continue;
      for (std::size_t j = 0; j < J; ++j) M(r * J + j, c * J + j) = A(r, c);
    }
  }
  return M;
}

std::vector<double> apply_dense(const DenseLayer& L, const std::vector<double>& v, const fno::Activation& act) {
  std::vector<double> out = L.b;
  for (int r = 0; r < L.W.rows; ++r) {
    const double* row = L.W.data.data() + static_cast<std::size_t>(r) * L.W.cols;
    double s = 0.0;
    for (int c = 0; c < L.W.cols; ++c) s += row[c] * v[c];
    out[r] += s;
  }
  if (L.activate) {
    for (double& x : out) x = act(x);
  }
  return out;
}

}  // namespace

std::size_t DeepOnetExport::width() const noexcept {
  std::size_t w = 0;
  for (std::size_t l = 0; l + 1 < branch.size(); ++l) w = std::max<std::size_t>(w, branch[l].W.rows);
  return w;
}

std::vector<double> DeepOnetExport::branch_forward(const GridField& a) const {
  if (a.channels() != d_a || a.grid().dim() != d) throw DimensionMismatch("branch input has the wrong shape");
  const GridField s = spectral::resample(a, N);
  std::vector<double> v(s.values().begin(), s.values().end());
  for (const auto& L : branch) v = apply_dense(L, v, activation);
  return v;
}

std::vector<double> DeepOnetExport::evaluate(const GridField& a, const Point& y, bool use_approx) const {
  if (use_approx && !approx_trunk) throw BadParameters("no approximate trunk attached");
  const std::vector<double> beta = branch_forward(a);
  const std::size_t K = trunk.size();
  std::vector<double> out(d_u, 0.0);
  for (std::size_t m = 0; m < K; ++m) {
    const double e = use_approx ? (*approx_trunk)(static_cast<int>(m), y) : trunk[m](y);
    for (int c = 0; c < d_u; ++c) out[c] += beta[c * K + m] * e;
  }
  return out;
}

DeepOnetExport to_deeponet(const fno::PsiFno& net, double B) {
  if (!(B > 0.0)) throw BadParameters("input bound must be positive");
  DeepOnetExport ex;
  const Grid& g = net.grid();
  const std::size_t J = g.size();
  ex.d = g.dim();
  ex.N = g.modes();
  ex.d_a = net.input_channels();
  ex.d_u = net.output_channels();
  ex.activation = net.activation();
  ex.source = net;
  for (std::size_t j = 0; j < J; ++j) ex.sensors.push_back(g.coordinate(j));
  ex.trunk = trig_basis(ex.d, ex.N);

  const fno::Matrix T = change_of_basis(g);
  fno::Matrix out_map(ex.d_u * J, net.hidden_channels() * J);
  for (int c = 0; c < ex.d_u; ++c) {
    for (int ci = 0; ci < net.hidden_channels(); ++ci) {
      const double q = net.projection()(c, ci);
      if (q == 0.0) continue;
      for (std::size_t m = 0; m < J; ++m) {
        for (std::size_t j = 0; j < J; ++j) out_map(c * J + m, ci * J + j) = q * T(m, j);
      }
    }
  }

  const fno::Matrix lift = kron_identity(net.lift(), J);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    DenseLayer D = densify(g, net.layers()[l]);
    if (l == 0) D.W = D.W * lift;
    ex.branch.push_back(std::move(D));
  }
  DenseLayer out{ex.branch.empty() ? out_map * lift : out_map, std::vector<double>(ex.d_u * J, 0.0), false};
  ex.branch.push_back(std::move(out));
  ex.source.metadata()["deeponet_B"] = B;
  return ex;
}

double ApproximateTrunk::operator()(int m, const Point& y) const {
  const int d2 = weights.cols;
  double s = 0.0;
  for (int f = 0; f < weights.rows; ++f) {
    double z = biases[f];
    for (int i = 0; i < d2 / 2; ++i) z += weights(f, 2 * i) * std::cos(y[i]) + weights(f, 2 * i + 1) * std::sin(y[i]);
    s += coefficients(m, f) * std::tanh(z);
  }
  return s;
}

void attach_approximate_trunk(DeepOnetExport& ex, double epsilon, std::span<const GridField> probes,
                              std::uint64_t seed, int features) {
#if PSIFNO_HAVE_EIGEN
  if (!(epsilon > 0.0) || features < 1) throw BadParameters("approximate trunk needs epsilon > 0 and features >= 1");
  double sup = 0.0;
  for (const auto& a : probes) sup = std::max(sup, spectral::l2_norm(fno::fno_forward(ex.source, a)));
  ApproximateTrunk t;
  t.b_bar = std::pow(2.0 * ex.N + 1.0, ex.d) * sup;
  t.target = t.b_bar > 0.0 ? epsilon / t.b_bar : epsilon;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d2 = 2 * ex.d;
  t.weights = fno::Matrix(features, d2);
  t.biases.resize(features);
  const double spread = 2.0;
  for (int f = 0; f < features; ++f) {
    for (int i = 0; i < d2; ++i) t.weights(f, i) = spread * normal(rng);
    t.biases[f] = normal(rng);
  }
  auto design = [&](const Grid& q) {
    Eigen::MatrixXd A(q.size(), features);
    for (std::size_t j = 0; j < q.size(); ++j) {
      const Point y = q.coordinate(j);
      for (int f = 0; f < features; ++f) {
        double z = t.biases[f];
        for (int i = 0; i < ex.d; ++i) z += t.weights(f, 2 * i) * std::cos(y[i]) + t.weights(f, 2 * i + 1) * std::sin(y[i]);
        A(j, f) = std::tanh(z);
      }
    }
    return A;
  };
  int fit_modes = std::max(6 * ex.N, 8);
  while (std::pow(2.0 * fit_modes + 1.0, ex.d) < 2.0 * features) ++fit_modes;
  const Grid fit(ex.d, fit_modes);
  const Eigen::MatrixXd A = design(fit);
  Eigen::MatrixXd Y(fit.size(), ex.trunk.size());
  for (std::size_t j = 0; j < fit.size(); ++j) {
    for (std::size_t m = 0; m < ex.trunk.size(); ++m) Y(j, m) = ex.trunk[m](fit.coordinate(j));
  }
  const Eigen::MatrixXd C = A.completeOrthogonalDecomposition().solve(Y);
  t.coefficients = fno::Matrix(ex.trunk.size(), features);
  for (std::size_t m = 0; m < ex.trunk.size(); ++m) {
    for (int f = 0; f < features; ++f) t.coefficients(m, f) = C(f, m);
  }
  const Grid check(ex.d, 4 * std::max(ex.N, 1) + 1);
  const Eigen::MatrixXd R = design(check) * C;
  for (std::size_t j = 0; j < check.size(); ++j) {
    for (std::size_t m = 0; m < ex.trunk.size(); ++m) {
      t.achieved = std::max(t.achieved, std::abs(R(j, m) - ex.trunk[m](check.coordinate(j))));
    }
  }
  ex.approx_trunk = std::move(t);
#else
  (void)ex, (void)epsilon, (void)probes, (void)seed, (void)features;
  throw BadParameters("approximate trunk needs a build with Eigen");
#endif
}

namespace {

const char* kind_name(TrigBasisFunction::Kind k) {
  switch (k) {
    case TrigBasisFunction::Kind::constant: return "constant";
    case TrigBasisFunction::Kind::cosine: return "cos";
    case TrigBasisFunction::Kind::sine: return "sin";
  }
  return "constant";
}

}  // namespace

void write_deeponet(const DeepOnetExport& ex, const std::string& base) {
  const std::filesystem::path payload = base + ".psifno";
  fno::save_model(payload, ex.source);
  nlohmann::json j;
  j["format"] = "psifno-deeponet";
  j["version"] = 1;
  j["d"] = ex.d;
  j["N"] = ex.N;
  j["p"] = ex.p();
  j["d_u"] = ex.d_u;
  j["d_a"] = ex.d_a;
  j["width"] = ex.width();
  j["depth"] = ex.depth();
  auto& sp = j["sensor_points"] = nlohmann::json::array();
  for (const auto& x : ex.sensors) {
    auto pt = nlohmann::json::array();
    for (int i = 0; i < ex.d; ++i) pt.push_back(x[i]);
    sp.push_back(pt);
  }
  auto& tr = j["trunk"] = nlohmann::json::array();
  for (const auto& f : ex.trunk) {
    auto k = nlohmann::json::array();
    for (int i = 0; i < ex.d; ++i) k.push_back(f.k[i]);
    tr.push_back({{"kind", kind_name(f.kind)}, {"k", k}, {"scale", f.scale}});
  }
  j["branch"] = {{"payload", payload.filename().string()},
                 {"format", "PSIFNO1"},
                 {"output", "grid values to trig coefficients, u-channel major"}};
  if (ex.approx_trunk) {
    j["approximate_trunk"] = {{"features", ex.approx_trunk->weights.rows},
                              {"target", ex.approx_trunk->target},
                              {"achieved", ex.approx_trunk->achieved},
                              {"b_bar", ex.approx_trunk->b_bar}};
  }
  std::ofstream out(base + ".json");
  if (!out) throw FormatError("cannot write " + base + ".json");
  out << j.dump(2) << '\n';
}

DeepOnetExport read_deeponet(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw FormatError("cannot open " + json_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad deeponet header: ") + e.what());
  }
  if (j.value("format", "") != "psifno-deeponet") throw FormatError("not a deeponet export");
  const auto payload = std::filesystem::path(json_path).parent_path() / j["branch"]["payload"].get<std::string>();
  const fno::PsiFno net = fno::load_model(payload);
  return to_deeponet(net, net.metadata().count("deeponet_B") ? net.metadata().at("deeponet_B") : 1.0);
}

}  // namespace psifno::emulation
