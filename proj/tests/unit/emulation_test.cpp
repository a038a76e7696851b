#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "psifno/darcy.hpp"
#include "psifno/emulation/darcy_emulator.hpp"
#include "psifno/emulation/deeponet.hpp"
#include "psifno/emulation/fourier_emulator.hpp"
#include "psifno/emulation/ns_emulator.hpp"
#include "psifno/emulation/product_net.hpp"
#include "psifno/error.hpp"
#include "psifno/fno/forward.hpp"
#include "psifno/spectral/ops.hpp"
#include "support.hpp"

using namespace psifno;
using namespace psifno::emulation;
using fno::Complex;
using spectral::Grid;
using spectral::Index;
using spectral::Point;
using testing_support::max_abs;
using testing_support::max_abs_diff;

namespace {

// Band-limited to N, scaled to the given L2 norm.
GridField probe(int d, int N, int channels, double norm, std::uint64_t seed) {
  GridField f = testing_support::random_field(Grid(d, N), channels, seed);
  f *= norm / spectral::l2_norm(f);
  return f;
}

fno::FnoLayer derivative_layer(int d, int width) {
  fno::FnoLayer l;
  l.W = fno::Matrix(1, 1);
  l.P = fno::FourierMultiplier(d, width);
  l.P.add_symbol(0, 0, [](const Index& k) { return Complex(0.0, k[0]); });
  l.apply_activation = false;
  return l;
}

}  // namespace

TEST(ProductNet, KnownProduct) {
  ProductNetSpec s;
  s.B = 4.0;
  s.epsilon = 1e-4;
  const ProductNet p = build_product_net(fno::Activation(), s);
  EXPECT_LE(std::abs(p(2.0, 3.0) - 6.0), 1e-4);
  EXPECT_LE(p.error, 1e-4);
  EXPECT_GT(p.h, 0.0);
  EXPECT_LE(p.h, 1.0);
}

TEST(ProductNet, ZeroFactorAndSymmetry) {
  ProductNetSpec s;
  s.B = 2.0;
  s.epsilon = 1e-5;
  const ProductNet p = build_product_net(fno::Activation(), s);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng);
    const double b = u(rng);
    EXPECT_LE(std::abs(p(0.0, b)), 1e-5);
    EXPECT_LE(std::abs(p(a, b) - p(b, a)), 2e-5);
    EXPECT_LE(std::abs(p(a, b) - a * b), 1e-5);
  }
}

TEST(ProductNet, GeluWorksToo) {
  ProductNetSpec s;
  s.B = 1.0;
  s.epsilon = 1e-4;
  s.x0 = 0.0;  // gelu''(0) != 0
  const ProductNet p = build_product_net(fno::Activation(fno::ActivationKind::gelu), s);
  EXPECT_LE(std::abs(p(0.5, -0.7) + 0.35), 1e-4);
}

TEST(ProductNet, ImpossibleAccuracyFails) {
  ProductNetSpec s;
  s.B = 1e4;
  s.epsilon = 1e-12;
  EXPECT_THROW(build_product_net(fno::Activation(), s), CalibrationFailed);
}

TEST(IdentityNet, OddAndAccurate) {
  const IdentityNet id = calibrate_identity(fno::Activation(), 1e-8);
  EXPECT_EQ(id(0.0), 0.0);
  for (double t : {-1.0, -0.3, 0.2, 1.0}) EXPECT_NEAR(id(t), t, 1e-8);
}

TEST(AffineApprox, IdentityTarget) {
  const Grid g(1, 4);
  AffineApproxSpec s;
  s.target.W = fno::Matrix::identity(1);
  s.target.P = fno::FourierMultiplier(1, 0);
  s.target.apply_activation = false;
  s.grid = g;
  s.B = 1.0;
  s.epsilon = 1e-6;
  const fno::PsiFno net = build_affine_approx(fno::Activation(), s);
  EXPECT_EQ(net.depth(), 1);
  EXPECT_TRUE(net.layers()[0].apply_activation);
  for (int q = 0; q < 100; ++q) {
    const GridField v = probe(1, 4, 1, 1.0, 500 + q);
    EXPECT_LE(max_abs_diff(fno::fno_forward(net, v), v), 1e-6);
  }
}

TEST(AffineApprox, DerivativeTarget) {
  const Grid g(1, 4);
  AffineApproxSpec s;
  s.target = derivative_layer(1, 4);
  s.grid = g;
  s.B = 1.0;
  s.epsilon = 1e-6;
  const fno::PsiFno net = build_affine_approx(fno::Activation(), s);
  for (int q = 0; q < 20; ++q) {
    const GridField v = probe(1, 4, 1, 1.0, 600 + q);
    EXPECT_LE(max_abs_diff(fno::fno_forward(net, v), spectral::derivative(v, 0)), 1e-6);
  }
}

TEST(Bounds, PointwiseBoundHolds) {
  for (int d = 1; d <= 2; ++d) {
    for (int q = 0; q < 20; ++q) {
      const GridField v = probe(d, 3, 1, 1.0, 700 + q);
      EXPECT_LE(max_abs(v), pointwise_bound(d, 3, 1.0));
      EXPECT_LE(max_abs(spectral::derivative(v, 0)), derivative_pointwise_bound(d, 3, 1.0));
    }
  }
}

class DarcyNonlinearity : public ::testing::TestWithParam<bool> {};

TEST_P(DarcyNonlinearity, MatchesSpectralOracle) {
  const int d = 2;
  const int N = 3;
  const double B = 1.0;
  EmulatorOptions o;
  o.epsilon = 1e-3;
  o.strict = GetParam();
  const fno::PsiFno net = build_nonlinearity_net_darcy(d, N, B, o);
  EXPECT_EQ(net.grid(), Grid(d, 2 * N));
  for (int q = 0; q < 100; ++q) {
    const GridField a = probe(d, N, 1, B, 800 + q);
    const GridField u = probe(d, N, 1, B, 900 + q);
    GridField ref(Grid(d, N), d);
    for (int i = 0; i < d; ++i) {
      const GridField p = spectral::dealiased_product(a, spectral::derivative(u, i));
      for (std::size_t j = 0; j < p.values().size(); ++j) ref(i, j) = p.values()[j];
    }
    const GridField in = spectral::stack_channels(spectral::resample(a, 2 * N), spectral::resample(u, 2 * N));
    const GridField got = spectral::resample(fno::fno_forward(net, in), N);
    EXPECT_LE(spectral::l2_norm(got - ref), o.epsilon) << q;
  }
  const GridField zero(Grid(d, 2 * N), 1);
  const GridField u = spectral::resample(probe(d, N, 1, B, 1), 2 * N);
  EXPECT_LE(spectral::l2_norm(fno::fno_forward(net, spectral::stack_channels(zero, u))), o.epsilon);
}

INSTANTIATE_TEST_SUITE_P(Modes, DarcyNonlinearity, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "strict" : "exact_linear"; });

TEST(DarcyNonlinearityScaling, WidthTracksGridDepthConstant) {
  EmulatorOptions o;
  o.epsilon = 1e-3;
  std::vector<fno::SizeReport> r;
  for (int N : {4, 8, 16}) r.push_back(fno::size_report(build_nonlinearity_net_darcy(2, N, 1.0, o)));
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_EQ(r[i].depth, r[0].depth);
    EXPECT_EQ(r[i].lift, r[0].lift);
  }
  const double c0 = static_cast<double>(r[0].width) / std::pow(2 * 4 * 2 + 1, 2);
  const double c2 = static_cast<double>(r[2].width) / std::pow(2 * 16 * 2 + 1, 2);
  EXPECT_DOUBLE_EQ(c0, c2);
}

TEST(DarcyEmulator, UnitCoefficientReproducesCosine) {
  const int N = 4;
  const Grid fine(2, 2 * N);
  DarcyEmulatorSpec s;
  s.f = GridField::sample_scalar(fine, [](const Point& x) { return std::cos(x[0]); });
  s.N = N;
  s.options.epsilon = 1e-3;
  const fno::PsiFno net = build_darcy_emulator(s);
  const GridField one = GridField::sample_scalar(fine, [](const Point&) { return 1.0; });
  const GridField expect = GridField::sample_scalar(Grid(2, N), [](const Point& x) { return std::cos(x[0]); });
  EXPECT_LE(darcy::h1_error(fno::fno_forward(net, one), expect), 1e-3);
}

TEST(DarcyEmulator, TracksSolverOnRandomCoefficients) {
  const int N = 4;
  const Grid fine(2, 2 * N);
  DarcyEmulatorSpec s;
  s.f = darcy::manufactured_source(darcy::trig_coefficient(fine, 0.3));
  s.N = N;
  s.options.epsilon = 1e-3;
  const fno::PsiFno net = build_darcy_emulator(s);
  for (int q = 0; q < 5; ++q) {
    const GridField a = darcy::random_decay_coefficient(fine, 0.5, 0.5, 4, 40 + q);
    const darcy::DarcySolution sol = darcy::solve({a, s.f, 0.5, 1, N});
    EXPECT_LE(darcy::h1_error(fno::fno_forward(net, a), sol.u), 1e-3);
  }
}

class NsNonlinearity : public ::testing::TestWithParam<bool> {};

TEST_P(NsNonlinearity, MatchesSpectralOracle) {
  const int N = 3;
  EmulatorOptions o;
  o.epsilon = 1e-3;
  o.strict = GetParam();
  const fno::PsiFno net = build_ns_nonlinearity_net(2, N, 1.0, o);
  auto eval = [&](const GridField& u, const GridField& w) {
    const GridField in = spectral::stack_channels(spectral::resample(u, 2 * N), spectral::resample(w, 2 * N));
    return spectral::resample(fno::fno_forward(net, in), N);
  };
  for (int q = 0; q < 100; ++q) {
    const GridField u = ns::random_divergence_free(Grid(2, N), 1.0, 1.0, 100 + q);
    const GridField w = ns::random_divergence_free(Grid(2, N), 1.0, 1.0, 300 + q);
    EXPECT_LE(spectral::l2_norm(eval(u, w) - ns::advection(u, w)), o.epsilon) << q;
  }
  const GridField shear = GridField::sample(Grid(2, N), 2, [](const Point& x, std::span<double> out) {
    out[0] = std::sin(x[1]) / std::numbers::pi;
    out[1] = 0.0;
  });
  EXPECT_LE(spectral::l2_norm(eval(shear, shear)), o.epsilon);
  EXPECT_LE(spectral::l2_norm(eval(GridField(Grid(2, N), 2), shear)), o.epsilon);
}

INSTANTIATE_TEST_SUITE_P(Modes, NsNonlinearity, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "strict" : "exact_linear"; });

TEST(NsEmulator, ZeroDataAndShortTrajectory) {
  const int N = 4;
  ns::NsConfig c;
  c.N = N;
  c.nu = 0.05;
  c.u0 = ns::taylor_green(2, c.nu, 0.0, N);
  c.U = spectral::l2_norm(c.u0);
  c.tau = 0.9 * ns::max_cfl_timestep(c.U, N, 2);
  c.T = 2 * c.tau;
  NsEmulatorSpec s;
  s.config = c;
  s.options.epsilon = 1e-3;
  const fno::PsiFno net = build_ns_emulator(s);
  const int kappa = static_cast<int>(net.metadata().at("kappa"));
  EXPECT_EQ(net.depth(), 1 + 3 * 2 * kappa);

  EXPECT_LE(spectral::l2_norm(fno::fno_forward(net, GridField(Grid(2, N), 2))), 1e-3);
  const ns::Trajectory tr = ns::run(c, ns::Scheme::first);
  const GridField got = fno::fno_forward(net, c.u0);
  EXPECT_LE(spectral::l2_norm(got - spectral::resample(tr.states.back().u, 2 * N)), 1e-3);
}

TEST(NsEmulator, StepLipschitzIsNearOne) {
  ns::NsConfig c;
  c.N = 4;
  c.nu = 0.05;
  c.U = 1.0;
  c.tau = 0.9 * ns::max_cfl_timestep(1.0, 4, 2);
  c.T = c.tau;
  c.u0 = ns::random_divergence_free(Grid(2, 4), 1.0, 1.0, 2);
  const std::vector<GridField> probes{c.u0};
  const double lip = measure_step_lipschitz(c, probes, 3);
  EXPECT_GT(lip, 0.5);
  EXPECT_LT(lip, 1.5);
}

TEST(FourierEmulator, ConstantAndCosine) {
  EmulatorOptions o;
  o.epsilon = 1e-3;
  const int N = 2;
  const fno::PsiFno ft = build_ft_emulator(1, N, 5.0, o);
  const GridField c = GridField::sample_scalar(Grid(1, N), [](const Point&) { return 0.7; });
  const auto cc = coefficients_from_channels(fno::fno_forward(ft, c), 1, N);
  for (int k = -N; k <= N; ++k) {
    EXPECT_NEAR(std::abs(cc.at(0, {k, 0, 0}) - (k == 0 ? 0.7 : 0.0)), 0.0, 1e-3);
  }
  const GridField cosx = GridField::sample_scalar(Grid(1, N), [](const Point& x) { return std::cos(x[0]); });
  const GridField out = fno::fno_forward(ft, cosx);
  // Every channel is a constant field.
  for (int ch = 0; ch < out.channels(); ++ch) {
    const auto v = out.channel(ch);
    for (double x : v) EXPECT_NEAR(x, v[0], 1e-12);
  }
  const auto cf = coefficients_from_channels(out, 1, N);
  EXPECT_NEAR(cf.at(0, {1, 0, 0}).real(), 0.5, 1e-3);
  EXPECT_NEAR(cf.at(0, {-1, 0, 0}).real(), 0.5, 1e-3);
}

TEST(FourierEmulator, ChannelLayoutRoundTrip) {
  const GridField v = testing_support::random_field(Grid(2, 2), 1, 5);
  const auto c = spectral::dft(v);
  const auto back = coefficients_from_channels(coefficient_channels(c), 2, 2);
  for (std::size_t m = 0; m < c.grid().size(); ++m) EXPECT_LE(std::abs(back(0, m) - c(0, m)), 1e-15);
}

TEST(FourierEmulator, RoundTripAndConjugateSlot) {
  EmulatorOptions o;
  o.epsilon = 1e-3;
  const int d = 2;
  const int N = 2;
  const fno::PsiFno ft = build_ft_emulator(d, N, 1.0, o);
  const fno::PsiFno ift = build_ift_emulator(d, N, 1.0, o);
  const fno::PsiFno both = fno::compose(ift, ft);
  const int channels = 2 * static_cast<int>(Grid(d, N).size());
  fno::FnoLayer idl;
  idl.W = fno::Matrix::identity(channels);
  idl.P = fno::FourierMultiplier(d, 0);
  idl.apply_activation = false;
  const fno::PsiFno user(Grid(d, N), fno::Activation(), fno::Matrix::identity(channels), {idl},
                         fno::Matrix::identity(channels));
  const fno::PsiFno conj = fourier_conjugate(user, N, 1.0, o);
  for (int q = 0; q < 10; ++q) {
    const GridField v = probe(d, N, 1, 1.0, 1100 + q);
    const auto ref = spectral::dft(v);
    const auto rt = spectral::dft(fno::fno_forward(both, v));
    const auto cj = spectral::dft(fno::fno_forward(conj, v));
    for (std::size_t m = 0; m < ref.grid().size(); ++m) {
      EXPECT_LE(std::abs(rt(0, m) - ref(0, m)), o.epsilon);
      EXPECT_LE(std::abs(cj(0, m) - ref(0, m)), o.epsilon);
    }
  }
}

TEST(DeepOnet, TrunkIsOrthonormal) {
  for (int d = 1; d <= 3; ++d) {
    const auto basis = trig_basis(d, 2);
    EXPECT_EQ(basis.size(), Grid(d, 2).size());
    EXPECT_LE(gram_defect(basis, d, 2), 1e-10);
  }
}

TEST(DeepOnet, IdentityNetExportInterpolates) {
  const Grid g(2, 3);
  fno::FnoLayer l;
  l.W = fno::Matrix::identity(1);
  l.P = fno::FourierMultiplier(2, 0);
  l.apply_activation = false;
  const fno::PsiFno net(g, fno::Activation(), fno::Matrix::identity(1), {l}, fno::Matrix::identity(1));
  const DeepOnetExport ex = to_deeponet(net, 1.0);
  EXPECT_EQ(ex.width(), fno::size_report(net).width);
  EXPECT_EQ(ex.depth(), net.depth());
  EXPECT_EQ(ex.p(), static_cast<int>(g.size()));
  EXPECT_EQ(ex.sensors.size(), g.size());
  const GridField a = testing_support::random_field(g, 1, 12);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(0.0, spectral::kTwoPi);
  for (int q = 0; q < 20; ++q) {
    const Point y{ang(rng), ang(rng), 0.0};
    EXPECT_NEAR(ex.evaluate(a, y)[0], spectral::interpolate(a, y)[0], 1e-10);
  }
}

TEST(DeepOnet, ExportReloads) {
  const Grid g(1, 3);
  fno::FnoLayer l;
  l.W = fno::Matrix::identity(2);
  l.b.constant = {0.1, -0.2};
  l.P = fno::FourierMultiplier(1, 2);
  l.P.add_symbol(0, 1, [](const Index& k) { return Complex(1.0 / (1.0 + k[0] * k[0]), 0.0); });
  const fno::PsiFno net(g, fno::Activation(), fno::Matrix(2, 1), {l}, fno::Matrix(1, 2));
  fno::Matrix R(2, 1);
  R(0, 0) = 1.0;
  R(1, 0) = -0.5;
  fno::Matrix Q(1, 2);
  Q(0, 0) = 0.3;
  Q(0, 1) = 0.9;
  const fno::PsiFno net2(g, fno::Activation(), R, net.layers(), Q);
  const DeepOnetExport ex = to_deeponet(net2, 1.0);
  const auto dir = std::filesystem::temp_directory_path() / "psifno-deeponet-test";
  std::filesystem::create_directories(dir);
  write_deeponet(ex, (dir / "ex").string());
  const DeepOnetExport back = read_deeponet((dir / "ex.json").string());
  const GridField a = testing_support::random_field(g, 1, 13);
  const Point y{1.1, 0.0, 0.0};
  EXPECT_EQ(back.evaluate(a, y)[0], ex.evaluate(a, y)[0]);
  EXPECT_NEAR(ex.evaluate(a, y)[0], fno::fno_evaluate_at(net2, a, y)[0], 1e-12);
}
