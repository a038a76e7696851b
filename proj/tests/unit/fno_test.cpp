#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "psifno/error.hpp"
#include "psifno/fno/activation.hpp"
#include "psifno/fno/forward.hpp"
#include "psifno/fno/model_io.hpp"
#include "psifno/fno/network.hpp"
#include "psifno/spectral/ops.hpp"
#include "support.hpp"

using namespace psifno;
using namespace psifno::fno;
using spectral::Grid;
using spectral::GridField;
using spectral::Index;
using spectral::Point;
using testing_support::max_abs;
using testing_support::max_abs_diff;
using testing_support::random_field;

namespace {

Matrix random_matrix(int r, int c, std::mt19937_64& rng, double scale = 0.5) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (double& v : m.data) v = n(rng);
  return m;
}

// Hermitian random multiplier: P(-k) = conj P(k) entrywise.
FourierMultiplier random_multiplier(int d, int width, int channels, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.3);
  FourierMultiplier P(d, width);
  const Grid modes(d, width);
  for (int o = 0; o < channels; ++o) {
    for (int i = 0; i < channels; ++i) {
      std::vector<Complex> v(modes.size());
      for (std::size_t m = 0; m < modes.size(); ++m) {
        const std::size_t mm = modes.mirror(m);
        if (mm < m) continue;
        v[m] = {n(rng), mm == m ? 0.0 : n(rng)};
        v[mm] = std::conj(v[m]);
      }
      P.add(o, i, std::move(v));
    }
  }
  return P;
}

FnoLayer random_layer(const Grid& g, int dv, int width, bool activate, std::mt19937_64& rng) {
  FnoLayer l;
  l.W = random_matrix(dv, dv, rng);
  l.b.constant.resize(dv);
  std::normal_distribution<double> n(0.0, 0.2);
  for (double& v : l.b.constant) v = n(rng);
  BiasField bf;
  bf.channel = 0;
  for (std::size_t j = 0; j < g.size(); ++j) bf.values.push_back(n(rng));
  l.b.fields.push_back(bf);
  l.P = random_multiplier(g.dim(), width, dv, rng);
  l.apply_activation = activate;
  return l;
}

PsiFno random_net(const Grid& g, int da, int dv, int du, int L, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FnoLayer> layers;
  for (int i = 0; i < L; ++i) layers.push_back(random_layer(g, dv, width, i + 1 < L, rng));
  return PsiFno(g, Activation(), random_matrix(dv, da, rng), std::move(layers), random_matrix(du, dv, rng));
}

// W v + b + F^-1(P F v) with the transforms written out as sums.
GridField naive_layer(const FnoLayer& l, const GridField& v, const Activation& act) {
  const Grid& g = v.grid();
  const int dv = l.out_channels();
  std::vector<std::vector<std::complex<double>>> vh;
  for (int c = 0; c < v.channels(); ++c) vh.push_back(testing_support::naive_dft(v, c));
  const Grid modes(g.dim(), l.P.width());
  GridField out(g, dv);
  for (int o = 0; o < dv; ++o) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      double acc = l.b.constant[o];
      for (const auto& f : l.b.fields) {
        if (f.channel == o) acc += f.values[j];
      }
      for (int i = 0; i < l.in_channels(); ++i) acc += l.W(o, i) * v(i, j);
      const Point x = g.coordinate(j);
      std::complex<double> spec = 0.0;
      for (const auto& e : l.P.entries()) {
        if (e.out != o) continue;
        for (std::size_t m = 0; m < modes.size(); ++m) {
          const Index k = modes.wavenumber(m);
          double phase = 0.0;
          for (int a = 0; a < g.dim(); ++a) phase += k[a] * x[a];
          spec += e.values[m] * vh[e.in][g.mode_index(k)] * std::polar(1.0, phase);
        }
      }
      acc += spec.real();
      out(o, j) = l.apply_activation ? act(acc) : acc;
    }
  }
  return out;
}

}  // namespace

TEST(Activation, TanhValues) {
  const Activation t(ActivationKind::tanh);
  EXPECT_EQ(t(0.0), 0.0);
  EXPECT_EQ(t.derivative(0.0, 1), 1.0);
  EXPECT_EQ(t.derivative(0.0, 2), 0.0);
  const double th = std::tanh(1.0);
  EXPECT_NEAR(t.derivative(1.0, 2), -2.0 * th * (1.0 - th * th), 1e-15);
}

TEST(Activation, DerivativesMatchFiniteDifferences) {
  for (auto kind : {ActivationKind::tanh, ActivationKind::gelu}) {
    const Activation a(kind);
    const double h = 1e-5;
    for (double x : {-2.0, -0.7, 0.0, 0.3, 1.0, 2.5}) {
      for (int order = 1; order <= 3; ++order) {
        const double fd = (a.derivative(x + h, order - 1) - a.derivative(x - h, order - 1)) / (2.0 * h);
        EXPECT_NEAR(a.derivative(x, order), fd, 1e-8) << a.name() << " order " << order << " x " << x;
      }
    }
  }
}

TEST(Activation, GeluIsNotPolynomial) {
  // A polynomial has a vanishing derivative of some order; gelu's third derivative keeps changing sign.
  const Activation g(ActivationKind::gelu);
  EXPECT_NE(g.derivative(0.5, 3), 0.0);
  EXPECT_NE(g.derivative(3.0, 3), 0.0);
  EXPECT_NEAR(g(10.0), 10.0, 1e-12);
  EXPECT_NEAR(g(-10.0), 0.0, 1e-12);
}

TEST(Activation, NamesRoundTrip) {
  EXPECT_EQ(Activation::from_name("gelu").kind(), ActivationKind::gelu);
  EXPECT_EQ(Activation::from_name("tanh").name(), "tanh");
  EXPECT_THROW(Activation::from_name("relu"), UnknownActivation);
}

TEST(Size, NominalFormula) {
  EXPECT_EQ(nominal_size(1, 2, 1, 3, 9), 178u);
  EXPECT_EQ(nominal_size(3, 5, 2, 0, 81), 3u * 5u + 2u * 5u);
}

TEST(Size, WidthOfLiftedNet) {
  const Grid g(2, 8);
  const PsiFno net(g, Activation(), Matrix(4, 1), {}, Matrix(1, 4));
  const SizeReport r = size_report(net);
  EXPECT_EQ(r.width, 1156u);
  EXPECT_EQ(r.lift, 4);
  EXPECT_EQ(r.depth, 0);
  EXPECT_EQ(r.modes, 289u);
}

TEST(Size, ReportMatchesFormula) {
  const Grid g(1, 4);
  const PsiFno net = random_net(g, 1, 2, 1, 3, 2, 1);
  EXPECT_EQ(size_report(net).size, 178u);
}

TEST(Layer, SpectralDerivativeLayer) {
  const Grid g(1, 6);
  FnoLayer l;
  l.W = Matrix(1, 1);
  l.P = FourierMultiplier(1, 6);
  l.P.add_symbol(0, 0, [](const Index& k) { return Complex(0.0, k[0]); });
  l.apply_activation = false;
  const GridField v = testing_support::random_field(g, 1, 4);
  EXPECT_LT(max_abs_diff(layer_forward(l, v, Activation()), spectral::derivative(v, 0)), 1e-12 * max_abs(v) * 6);
}

TEST(Layer, LocalLayerIsPointwise) {
  const Grid g(2, 2);
  FnoLayer l;
  l.W = Matrix::identity(2);
  l.b.constant = {0.3, -0.1};
  l.P = FourierMultiplier(2, 0);
  const GridField v = random_field(g, 2, 8);
  const GridField out = layer_forward(l, v, Activation());
  for (int c = 0; c < 2; ++c) {
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_DOUBLE_EQ(out(c, j), std::tanh(v(c, j) + l.b.constant[c]));
  }
}

TEST(Layer, MatchesNaiveTransform) {
  std::mt19937_64 rng(99);
  for (int d = 1; d <= 2; ++d) {
    const Grid g(d, d == 1 ? 7 : 3);
    for (bool act : {false, true}) {
      const FnoLayer l = random_layer(g, 3, 2, act, rng);
      const GridField v = random_field(g, 3, 12 + d);
      EXPECT_LT(max_abs_diff(layer_forward(l, v, Activation()), naive_layer(l, v, Activation())), 1e-10);
    }
  }
}

TEST(Layer, ShapeErrors) {
  const Grid g(1, 3);
  FnoLayer l;
  l.W = Matrix::identity(2);
  l.P = FourierMultiplier(1, 1);
  EXPECT_THROW(layer_forward(l, random_field(g, 3, 1), Activation()), DimensionMismatch);
}

TEST(Network, RejectsNonHermitianMultiplier) {
  const Grid g(1, 3);
  FnoLayer l;
  l.W = Matrix::identity(1);
  l.P = FourierMultiplier(1, 1);
  l.P.add(0, 0, {Complex(0.0, 1.0), Complex(1.0, 0.0), Complex(0.0, 1.0)});
  EXPECT_THROW(PsiFno(g, Activation(), Matrix::identity(1), {l}, Matrix::identity(1)), HermitianViolation);
}

TEST(Network, RejectsTooWideMultiplier) {
  FnoLayer l;
  l.W = Matrix::identity(1);
  l.P = FourierMultiplier(1, 4);
  l.P.add_symbol(0, 0, [](const Index&) { return Complex(1.0); });
  EXPECT_THROW(PsiFno(Grid(1, 3), Activation(), Matrix::identity(1), {l}, Matrix::identity(1)),
               InsufficientResolution);
}

TEST(Forward, IdentityNetInterpolates) {
  const Grid g(2, 3);
  FnoLayer l;
  l.W = Matrix::identity(1);
  l.P = FourierMultiplier(2, 0);
  l.apply_activation = false;
  const PsiFno net(g, Activation(), Matrix::identity(1), {l}, Matrix::identity(1));
  const GridField fine = random_field(Grid(2, 6), 1, 21);
  EXPECT_LT(max_abs_diff(fno_forward(net, fine), spectral::resample(fine, 3)), 1e-13);
}

TEST(Forward, OutputIsReal) {
  // The imaginary residue of the spectral part stays at round-off for Hermitian multipliers.
  const Grid g(2, 3);
  std::mt19937_64 rng(5);
  const FnoLayer l = random_layer(g, 2, 3, false, rng);
  const GridField v = random_field(g, 2, 6);
  for (const auto& e : l.P.entries()) {
    const Grid modes(2, l.P.width());
    const auto vh = spectral::dft(v);
    spectral::SpectralCoeffs prod(g, 1, false);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const std::size_t gm = g.mode_index(modes.wavenumber(m));
      prod(0, gm) = e.values[m] * vh(e.in, gm);
    }
    EXPECT_LE(prod.hermitian_defect(), 1e-10);
  }
}

TEST(Compose, IdentityIsNeutral) {
  const Grid g(1, 4);
  const PsiFno f = random_net(g, 2, 3, 2, 2, 2, 31);
  FnoLayer l;
  l.W = Matrix::identity(2);
  l.P = FourierMultiplier(1, 0);
  l.apply_activation = false;
  const PsiFno id(g, Activation(), Matrix::identity(2), {l}, Matrix::identity(2));
  const GridField a = random_field(g, 2, 32);
  EXPECT_LT(max_abs_diff(fno_forward(compose(id, f), a), fno_forward(f, a)), 1e-12);
}

TEST(Compose, DepthAddsAndForwardMatchesSequential) {
  const Grid g(2, 3);
  const PsiFno A = random_net(g, 2, 3, 1, 2, 2, 41);
  const PsiFno B = random_net(g, 1, 4, 2, 3, 1, 42);
  const PsiFno C = random_net(g, 1, 2, 1, 1, 3, 43);
  const PsiFno AB = compose(A, B);
  EXPECT_EQ(AB.depth(), A.depth() + B.depth());
  EXPECT_LE(AB.hidden_channels(), std::max(A.hidden_channels(), B.hidden_channels()));
  for (int probe = 0; probe < 3; ++probe) {
    const GridField x = random_field(g, 1, 50 + probe);
    const GridField seq = fno_forward(C, fno_forward(A, fno_forward(B, x)));
    const GridField left = fno_forward(compose(C, compose(A, B)), x);
    const GridField right = fno_forward(compose(compose(C, A), B), x);
    EXPECT_LE(max_abs_diff(left, seq), 1e-12 * std::max(1.0, max_abs(seq)));
    EXPECT_LE(max_abs_diff(right, seq), 1e-12 * std::max(1.0, max_abs(seq)));
  }
  EXPECT_THROW(compose(B, B), DimensionMismatch);
}

TEST(Forward, OffGridEvaluationInterpolates) {
  const Grid g(1, 4);
  const PsiFno net = random_net(g, 1, 2, 1, 2, 2, 61);
  const GridField a = random_field(g, 1, 62);
  const GridField out = fno_forward(net, a);
  const Point y{1.2345, 0.0, 0.0};
  EXPECT_NEAR(fno_evaluate_at(net, a, y)[0], spectral::interpolate(out, y)[0], 1e-13);
}

// Same weights, constant biases, widening grids: outputs converge for smooth input.
TEST(Forward, ResolutionSelfConsistency) {
  std::mt19937_64 rng(71);
  const int dv = 2;
  const Matrix R = random_matrix(dv, 1, rng);
  const Matrix Q = random_matrix(1, dv, rng);
  std::vector<FnoLayer> proto;
  for (int i = 0; i < 2; ++i) {
    FnoLayer l = random_layer(Grid(1, 2), dv, 2, true, rng);
    l.b.fields.clear();
    proto.push_back(l);
  }
  auto a_at = [](int N) {
    return GridField::sample_scalar(Grid(1, N), [](const Point& x) { return std::exp(std::sin(x[0])); });
  };
  std::vector<double> diffs;
  for (int N : {4, 8, 16, 32}) {
    const PsiFno coarse(Grid(1, N), Activation(), R, proto, Q);
    const PsiFno fine(Grid(1, 2 * N), Activation(), R, proto, Q);
    const GridField c = spectral::resample(fno_forward(coarse, a_at(N)), 2 * N);
    const GridField f = fno_forward(fine, a_at(2 * N));
    diffs.push_back(spectral::l2_norm(c - f));
  }
  for (std::size_t i = 1; i < diffs.size(); ++i) EXPECT_LT(diffs[i], diffs[i - 1]) << i;
  EXPECT_LT(diffs.back(), 1e-8);
}

TEST(ModelIo, RoundTripIsExact) {
  const Grid g(2, 2);
  PsiFno net = random_net(g, 2, 3, 1, 2, 2, 81);
  net.metadata()["product_h"] = 0.125;
  const auto path = std::filesystem::temp_directory_path() / "psifno-model-io.psifno";
  save_model(path, net);
  const PsiFno back = load_model(path);
  EXPECT_EQ(back.grid(), net.grid());
  EXPECT_EQ(back.depth(), net.depth());
  EXPECT_EQ(back.metadata().at("product_h"), 0.125);
  const GridField a = random_field(g, 2, 82);
  EXPECT_EQ(max_abs_diff(fno_forward(back, a), fno_forward(net, a)), 0.0);
}

TEST(ModelIo, RejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "psifno-model-garbage.psifno";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a model";
  }
  EXPECT_THROW(load_model(path), FormatError);
}
