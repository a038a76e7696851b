#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "psifno/error.hpp"
#include "psifno/spectral/io.hpp"
#include "psifno/spectral/ops.hpp"
#include "support.hpp"

using namespace psifno;
using namespace psifno::spectral;
using testing_support::max_abs;
using testing_support::max_abs_diff;
using testing_support::random_band_limited;
using testing_support::random_field;

namespace {

GridField cos_x(int N) {
  return GridField::sample_scalar(Grid(1, N), [](const Point& x) { return std::cos(x[0]); });
}

}  // namespace

TEST(Grid, RejectsEvenPointCounts) {
  EXPECT_THROW(Grid::from_points(1, 8), BadParameters);
  EXPECT_EQ(Grid::from_points(2, 9).modes(), 4);
}

TEST(Grid, ModeIndexRoundTrip) {
  const Grid g(3, 2);
  for (std::size_t m = 0; m < g.size(); ++m) {
    EXPECT_EQ(g.mode_index(g.wavenumber(m)), m);
    const Index k = g.wavenumber(m);
    const Index neg{-k[0], -k[1], -k[2]};
    EXPECT_EQ(g.mirror(m), g.mode_index(neg));
  }
}

TEST(Dft, ConstantField) {
  const Grid g(2, 3);
  const GridField f = GridField::sample_scalar(g, [](const Point&) { return 2.5; });
  const SpectralCoeffs c = dft(f);
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double expect = g.wavenumber(m) == Index{0, 0, 0} ? 2.5 : 0.0;
    EXPECT_NEAR(std::abs(c(0, m) - expect), 0.0, 1e-14);
  }
}

TEST(Dft, CosineHasHalfCoefficients) {
  for (int N = 1; N <= 5; ++N) {
    const SpectralCoeffs c = dft(cos_x(N));
    for (int k = -N; k <= N; ++k) {
      const double expect = std::abs(k) == 1 ? 0.5 : 0.0;
      EXPECT_NEAR(std::abs(c.at(0, {k, 0, 0}) - expect), 0.0, 1e-14) << "N=" << N << " k=" << k;
    }
  }
}

TEST(Dft, MatchesNaiveTransform) {
  for (int d = 1; d <= 3; ++d) {
    for (int N : {0, 1, 2, 4}) {
      if (d == 3 && N > 2) continue;
      const GridField f = random_field(Grid(d, N), 2, 100 + 10 * d + N);
      const SpectralCoeffs c = dft(f);
      for (int ch = 0; ch < 2; ++ch) {
        const auto ref = testing_support::naive_dft(f, ch);
        for (std::size_t m = 0; m < ref.size(); ++m) EXPECT_NEAR(std::abs(c(ch, m) - ref[m]), 0.0, 1e-13);
      }
    }
  }
}

TEST(Idft, OfHalfCoefficientsIsCosine) {
  const Grid g(1, 3);
  SpectralCoeffs c(g, 1);
  c(0, g.mode_index({1, 0, 0})) = 0.5;
  c(0, g.mode_index({-1, 0, 0})) = 0.5;
  EXPECT_LT(max_abs_diff(idft(c), cos_x(3)), 1e-14);
}

TEST(Idft, RejectsNonHermitianCoefficients) {
  const Grid g(1, 2);
  SpectralCoeffs c(g, 1);
  c.set_real(false);
  c(0, g.mode_index({1, 0, 0})) = {0.0, 1.0};
  c.set_real(true);
  EXPECT_THROW(idft(c), HermitianViolation);
}

TEST(Dft, RoundTripAllDimensions) {
  for (int d = 1; d <= 3; ++d) {
    const int max_N = d == 3 ? 8 : 16;
    for (int N = 1; N <= max_N; ++N) {
      const GridField f = random_field(Grid(d, N), 1, 7 * N + d);
      const GridField back = idft(dft(f));
      EXPECT_LE(max_abs_diff(back, f), 1e-12 * max_abs(f)) << "d=" << d << " N=" << N;
      const SpectralCoeffs c = dft(f);
      EXPECT_LE(c.hermitian_defect(), 1e-12);
      const SpectralCoeffs again = dft(back);
      double diff = 0.0;
      double scale = 0.0;
      for (std::size_t i = 0; i < c.data().size(); ++i) {
        diff = std::max(diff, std::abs(c.data()[i] - again.data()[i]));
        scale = std::max(scale, std::abs(c.data()[i]));
      }
      EXPECT_LE(diff, 1e-12 * scale);
    }
  }
}

TEST(Sobolev, TwoCosineHasNormTwoRootPi) {
  const GridField f = 2.0 * cos_x(4);
  for (double s : {0.0, 0.5, 1.0, 3.0}) {
    EXPECT_NEAR(sobolev_norm(f, {s, false}), 2.0 * std::sqrt(std::numbers::pi), 1e-12) << "s=" << s;
  }
  EXPECT_EQ(sobolev_norm(GridField(Grid(2, 3), 1), {1.0, false}), 0.0);
}

TEST(Sobolev, ParsevalMatchesQuadrature) {
  for (int d = 1; d <= 3; ++d) {
    const Grid g(d, 4);
    const GridField f = random_band_limited(g, 2, 2, 40 + d);
    double sum = 0.0;
    for (double v : f.values()) sum += v * v;
    const double quad = std::sqrt(std::pow(kTwoPi, d) / static_cast<double>(g.size()) * sum);
    EXPECT_NEAR(sobolev_norm(f, {0.0, false}), quad, 1e-10 * quad);
    EXPECT_NEAR(l2_norm(f), quad, 1e-10 * quad);
  }
}

TEST(Sobolev, HomogeneousIgnoresMean) {
  const Grid g(2, 3);
  GridField f = random_band_limited(g, 1, 2, 5);
  const double before = sobolev_norm(f, {1.0, true});
  for (double& v : f.values()) v += 3.0;
  EXPECT_NEAR(sobolev_norm(f, {1.0, true}), before, 1e-12 * before);
}

TEST(Project, KeepsLowModes) {
  const Grid g(1, 2);
  const GridField f =
      GridField::sample_scalar(g, [](const Point& x) { return 1.0 + std::cos(x[0]) + std::sin(2.0 * x[0]); });
  const SpectralCoeffs p = project(dft(f), 1);
  const GridField expect =
      GridField::sample_scalar(g, [](const Point& x) { return 1.0 + std::cos(x[0]); });
  EXPECT_EQ(p.modes(), 1);
  EXPECT_LT(max_abs_diff(idft(regrid(p, 2)), expect), 1e-14);
  EXPECT_THROW(project(dft(f), 3), BadTruncation);
}

TEST(Project, ZeroMeanOfConstantVanishes) {
  const GridField f = GridField::sample_scalar(Grid(2, 2), [](const Point&) { return 4.0; });
  EXPECT_LT(max_abs(idft(project(dft(f), 2, true))), 1e-15);
}

TEST(Resample, SameResolutionIsIdentity) {
  const GridField f = random_field(Grid(2, 3), 1, 3);
  EXPECT_LT(max_abs_diff(resample(f, 3), f), 1e-13);
}

TEST(Resample, RefinesCosineExactly) {
  EXPECT_LT(max_abs_diff(resample(cos_x(2), 4), cos_x(4)), 1e-12);
}

TEST(Derivative, ClosedForms) {
  const Grid g1(1, 5);
  const auto sin1 = GridField::sample_scalar(g1, [](const Point& x) { return std::sin(x[0]); });
  const auto cos1 = GridField::sample_scalar(g1, [](const Point& x) { return std::cos(x[0]); });
  EXPECT_LT(max_abs_diff(derivative(sin1, 0), cos1), 1e-12);
  const auto c = GridField::sample_scalar(g1, [](const Point&) { return 1.0; });
  EXPECT_LT(max_abs(derivative(c, 0)), 1e-14);

  const Grid g2(2, 4);
  const auto f = GridField::sample_scalar(g2, [](const Point& x) { return std::cos(x[0] + x[1]); });
  const auto df = GridField::sample_scalar(g2, [](const Point& x) { return -std::sin(x[0] + x[1]); });
  EXPECT_LT(max_abs_diff(derivative(f, 0), df), 1e-12);
}

TEST(DealiasedProduct, CosineSquaredTruncates) {
  const GridField p = dealiased_product(cos_x(1), cos_x(1));
  for (double v : p.values()) EXPECT_NEAR(v, 0.5, 1e-14);
}

TEST(DealiasedProduct, OneIsNeutral) {
  const Grid g(2, 3);
  const GridField v = random_field(g, 2, 9);
  const GridField one = GridField::sample_scalar(g, [](const Point&) { return 1.0; });
  EXPECT_LT(max_abs_diff(dealiased_product(one, v), v), 1e-13);
}

// Truncated convolution of coefficient sequences, computed directly.
TEST(DealiasedProduct, MatchesBruteForceConvolution) {
  for (int d = 1; d <= 2; ++d) {
    for (int N = 1; N <= (d == 1 ? 16 : 6); ++N) {
      const Grid g(d, N);
      const GridField u = random_field(g, 1, 200 + N);
      const GridField v = random_field(g, 1, 300 + N);
      const auto uh = testing_support::naive_dft(u, 0);
      const auto vh = testing_support::naive_dft(v, 0);
      std::vector<std::complex<double>> conv(g.size());
      for (std::size_t a = 0; a < g.size(); ++a) {
        for (std::size_t b = 0; b < g.size(); ++b) {
          const Index ka = g.wavenumber(a);
          const Index kb = g.wavenumber(b);
          const Index k{ka[0] + kb[0], ka[1] + kb[1], 0};
          if (g.contains_mode(k)) conv[g.mode_index(k)] += uh[a] * vh[b];
        }
      }
      const SpectralCoeffs got = dft(dealiased_product(u, v));
      double diff = 0.0;
      double scale = 0.0;
      for (std::size_t m = 0; m < g.size(); ++m) {
        diff = std::max(diff, std::abs(got(0, m) - conv[m]));
        scale = std::max(scale, std::abs(conv[m]));
      }
      EXPECT_LE(diff, 1e-10 * scale) << "d=" << d << " N=" << N;
    }
  }
}

TEST(Leray, AnnihilatesGradients) {
  const Grid g(2, 4);
  const GridField grad = gradient(GridField::sample_scalar(g, [](const Point& x) { return std::cos(x[0]); }));
  EXPECT_LT(max_abs(leray_project(grad)), 1e-14);
}

TEST(Leray, FixesDivergenceFreeFields) {
  const GridField u = GridField::sample(Grid(2, 4), 2, [](const Point& x, std::span<double> out) {
    out[0] = std::sin(x[1]);
    out[1] = 0.0;
  });
  EXPECT_LT(max_abs_diff(leray_project(u), u), 1e-14);
}

TEST(Leray, IdempotentAndDivergenceFree) {
  for (int d = 2; d <= 3; ++d) {
    for (int N = 1; N <= (d == 2 ? 8 : 4); ++N) {
      const GridField u = random_field(Grid(d, N), d, 50 * d + N);
      const GridField p = leray_project(u);
      const GridField pp = leray_project(p);
      EXPECT_LE(max_abs_diff(p, pp), 1e-12 * max_abs(p));
      EXPECT_LE(max_divergence(p), 1e-10 * std::max(1.0, max_abs(p)));
      EXPECT_LE(std::abs(channel_means(p)[0]), 1e-14);
    }
  }
}

TEST(InverseLaplacian, ClosedForms) {
  const Grid g(2, 4);
  const auto c1 = GridField::sample_scalar(g, [](const Point& x) { return std::cos(x[0]); });
  const auto c2 = GridField::sample_scalar(g, [](const Point& x) { return std::cos(2.0 * x[0]); });
  EXPECT_LT(max_abs_diff(inverse_laplacian(c1), c1), 1e-14);
  EXPECT_LT(max_abs_diff(inverse_laplacian(c2), 0.25 * c2), 1e-14);

  GridField shifted = c1;
  for (double& v : shifted.values()) v += 2.0;
  std::vector<double> removed;
  EXPECT_LT(max_abs_diff(inverse_laplacian(shifted, &removed), c1), 1e-13);
  ASSERT_EQ(removed.size(), 1u);
  EXPECT_NEAR(removed[0], 2.0, 1e-14);
}

TEST(Helmholtz, ClosedForms) {
  const Grid g(2, 3);
  const GridField f = random_field(g, 1, 17);
  EXPECT_LT(max_abs_diff(helmholtz_inverse(f, 0.0), f), 1e-13);
  const auto c1 = GridField::sample_scalar(g, [](const Point& x) { return std::cos(x[0]); });
  EXPECT_LT(max_abs_diff(helmholtz_inverse(c1, 1.0), 0.5 * c1), 1e-14);
  EXPECT_THROW(helmholtz_inverse(f, -1.0), BadParameters);
}

TEST(Interpolate, MatchesClosedFormOffGrid) {
  const Grid g(2, 3);
  const auto f = GridField::sample_scalar(g, [](const Point& x) { return std::sin(2.0 * x[0] - x[1]); });
  const Point y{0.123, 4.567, 0.0};
  EXPECT_NEAR(interpolate(f, y)[0], std::sin(2.0 * y[0] - y[1]), 1e-13);
}

// |f_k| = (1+|k|)^-(s + d/2 + 0.5) gives a tail decaying like M^-s.
TEST(SpectralDecay, TruncationErrorRate) {
  const int d = 1;
  const double s = 2.0;
  const Grid g(d, 256);
  SpectralCoeffs c(g, 1);
  for (std::size_t m = 0; m < g.size(); ++m) {
    const double k = std::abs(g.wavenumber(m)[0]);
    c(0, m) = std::pow(1.0 + k, -(s + d / 2.0 + 0.5));
  }
  std::vector<double> logM;
  std::vector<double> logE;
  for (int M : {8, 16, 32, 64}) {
    SpectralCoeffs tail = c;
    for (std::size_t m = 0; m < g.size(); ++m) {
      if (std::abs(g.wavenumber(m)[0]) <= M) tail(0, m) = 0.0;
    }
    logM.push_back(std::log(M));
    logE.push_back(std::log(sobolev_norm(tail, {0.0, false})));
  }
  const double slope = -(logE.back() - logE.front()) / (logM.back() - logM.front());
  EXPECT_GE(slope, s - 0.1);
}

TEST(FieldIo, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "psifno-field-io";
  std::filesystem::create_directories(dir);
  const GridField f = random_field(Grid(2, 3), 3, 77);
  write_field(dir / "u", f);
  const GridField g = read_field(dir / "u");
  EXPECT_EQ(g.grid(), f.grid());
  EXPECT_EQ(g.channels(), 3);
  EXPECT_EQ(max_abs_diff(f, g), 0.0);
}
