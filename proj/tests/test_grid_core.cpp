#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "flaghp/error.hpp"
#include "flaghp/fft.hpp"
#include "flaghp/grid.hpp"
#include "flaghp/io.hpp"
#include "flaghp/ops.hpp"
#include "flaghp/sampled_function.hpp"
#include "flaghp/signal.hpp"

using namespace flaghp;
namespace fs = std::filesystem;

namespace {

SampledFunction random_function(const Grid& g, unsigned seed, bool complex_values = true) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(g.size());
  for (auto& z : v) z = cplx(d(rng), complex_values ? d(rng) : 0.0);
  return SampledFunction(g, Domain::base, std::move(v));
}

// O(N^4) two-dimensional DFT with exponent -i.
std::vector<cplx> naive_dft2(const SampledFunction& f) {
  const int N = f.grid().samples_per_axis();
  std::vector<cplx> out(f.size());
  for (int k1 = 0; k1 < N; ++k1)
    for (int k2 = 0; k2 < N; ++k2) {
      cplx acc{};
      for (int x1 = 0; x1 < N; ++x1)
        for (int x2 = 0; x2 < N; ++x2) {
          const double ph = -2.0 * std::numbers::pi * (double(k1) * x1 + double(k2) * x2) / N;
          acc += f[static_cast<std::size_t>(x1 * N + x2)] * std::polar(1.0, ph);
        }
      out[static_cast<std::size_t>(k1 * N + k2)] = acc;
    }
  return out;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flaghp-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Grid, MakeGridValidates) {
  EXPECT_NO_THROW(make_grid(1, 1, 6));
  EXPECT_THROW(make_grid(0, 1, 6), ConfigError);
  EXPECT_THROW(make_grid(1, 1, 2), ConfigError);
  EXPECT_THROW(make_grid(1, 1, 6, -1.0), ConfigError);
}

TEST(Grid, GeometryHelpers) {
  const Grid g = make_grid(1, 1, 5, 2.0);
  EXPECT_EQ(g.samples_per_axis(), 32);
  EXPECT_EQ(g.size(), 1024u);
  EXPECT_DOUBLE_EQ(g.spacing(), 2.0 / 32);
  EXPECT_DOUBLE_EQ(g.cell_volume(), (2.0 / 32) * (2.0 / 32));
  EXPECT_DOUBLE_EQ(g.volume(2), 4.0);
  EXPECT_EQ(signed_index(17, 32), -15);
  EXPECT_DOUBLE_EQ(frequency(g, 31), -0.5);
  const auto st = strides(3, 4);
  EXPECT_EQ(st[0], 16u);
  EXPECT_EQ(st[2], 1u);
}

TEST(SampledFunction, RejectsNonFiniteValues) {
  const Grid g = make_grid(1, 1, 3);
  std::vector<cplx> v(g.size());
  v[5] = cplx(std::nan(""), 0.0);
  EXPECT_THROW(SampledFunction(g, Domain::base, v), Error);
  EXPECT_THROW(SampledFunction(g, Domain::base, std::vector<cplx>(3)), Error);
}

TEST(SampledFunction, LiftedShapeAppendsSecondFactorAxes) {
  const Grid g = make_grid(1, 1, 3);
  const SampledFunction f(g, Domain::lifted);
  EXPECT_EQ(f.rank(), 3);
  EXPECT_EQ(f.size(), 512u);
}

TEST(SampledFunction, ShiftComposesAndInverts) {
  const Grid g = make_grid(1, 1, 4);
  const SampledFunction f = random_function(g, 3);
  const int a[] = {3, -5}, b[] = {-3, 5};
  EXPECT_EQ(shifted(shifted(f, a), b), f);
  const SampledFunction s = shifted(f, a);
  EXPECT_EQ(s[static_cast<std::size_t>(3 * 16 + 11)], f[0]);
}

TEST(Fft, MatchesNaiveDft) {
  const Grid g = make_grid(1, 1, 3);
  const SampledFunction f = random_function(g, 11);
  const auto fast = fft::spectrum(f);
  const auto slow = naive_dft2(f);
  for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_LT(std::abs(fast[i] - slow[i]), 1e-11);
}

TEST(Fft, ParsevalAndRoundTrip) {
  const Grid g = make_grid(1, 1, 6);
  const SampledFunction f = random_function(g, 5);
  const auto spec = fft::spectrum(f);
  double e_space = 0.0, e_freq = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    e_space += std::norm(f[i]);
    e_freq += std::norm(spec[i]);
  }
  EXPECT_NEAR(e_freq / static_cast<double>(f.size()), e_space, 1e-10 * e_space);
  const SampledFunction back = fft::from_spectrum(g, Domain::base, spec);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(std::abs(back[i] - f[i]), 1e-13);
}

TEST(Ops, ConvolutionMatchesBruteForce) {
  const Grid g = make_grid(1, 1, 3, 2.0);
  const SampledFunction f = random_function(g, 1);
  const SampledFunction k = random_function(g, 2);
  const SampledFunction c = convolve(f, k);
  const int N = g.samples_per_axis();
  for (int x1 = 0; x1 < N; ++x1)
    for (int x2 = 0; x2 < N; ++x2) {
      cplx acc{};
      for (int y1 = 0; y1 < N; ++y1)
        for (int y2 = 0; y2 < N; ++y2) {
          const int d1 = (x1 - y1 + N) % N, d2 = (x2 - y2 + N) % N;
          acc += f[static_cast<std::size_t>(y1 * N + y2)] * k[static_cast<std::size_t>(d1 * N + d2)];
        }
      acc *= g.cell_volume();
      EXPECT_LT(std::abs(c[static_cast<std::size_t>(x1 * N + x2)] - acc), 1e-12);
    }
}

TEST(Ops, LpNormsAndInnerProduct) {
  const Grid g = make_grid(1, 1, 5, 2.0);
  SampledFunction one(g);
  for (auto& z : one.values()) z = 1.0;
  EXPECT_NEAR(lp_norm(one, 2.0), 2.0, 1e-14);   // sqrt(area 4)
  EXPECT_NEAR(lp_norm(one, 0.5), 16.0, 1e-12);  // 4^(1/0.5)
  EXPECT_NEAR(lp_norm_pow(one, 0.7), 4.0, 1e-12);
  EXPECT_THROW(lp_norm(one, 0.0), ConfigError);
  const SampledFunction f = random_function(g, 9);
  EXPECT_NEAR(inner(f, f).real(), std::pow(lp_norm(f, 2.0), 2), 1e-10);
}

TEST(Ops, MultiplierOfOnesIsIdentity) {
  const Grid g = make_grid(1, 1, 4);
  const SampledFunction f = random_function(g, 4);
  const std::vector<double> ones(g.size(), 1.0);
  const SampledFunction r = apply_multiplier(f, ones);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(std::abs(r[i] - f[i]), 1e-13);
}

TEST(Ops, CentralDifferenceOfSine) {
  const Grid g = make_grid(1, 1, 6);
  const int N = g.samples_per_axis();
  const double h = g.spacing();
  std::vector<cplx> v(g.size());
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) v[static_cast<std::size_t>(i * N + j)] = std::sin(2 * std::numbers::pi * j * h);
  const int shape[] = {N, N};
  const auto d1 = central_difference(v, shape, 1, 1, h);
  const auto d0 = central_difference(v, shape, 0, 1, h);
  const double factor = std::sin(2 * std::numbers::pi * h) / h;  // exact discrete symbol
  for (int j = 0; j < N; ++j) {
    EXPECT_NEAR(d1[static_cast<std::size_t>(5 * N + j)].real(),
                factor * std::cos(2 * std::numbers::pi * j * h), 1e-10);
    EXPECT_NEAR(std::abs(d0[static_cast<std::size_t>(5 * N + j)]), 0.0, 1e-12);
  }
}

TEST(Io, RoundTripIsBitwise) {
  const fs::path dir = temp_dir("io");
  const Grid g = make_grid(1, 1, 4, 1.5);
  const SampledFunction f = random_function(g, 8);
  io::write_function(dir / "f.bin", f);
  EXPECT_TRUE(fs::exists(io::sidecar_path(dir / "f.bin")));
  EXPECT_EQ(io::read_function(dir / "f.bin"), f);
}

TEST(Io, TruncatedAndForeignFilesAreRejected) {
  const fs::path dir = temp_dir("io-bad");
  const Grid g = make_grid(1, 1, 3);
  io::write_function(dir / "f.bin", random_function(g, 1));
  std::string raw = io::read_text(dir / "f.bin");
  io::write_text(dir / "short.bin", raw.substr(0, raw.size() - 8));
  EXPECT_THROW(io::read_function(dir / "short.bin"), IoError);
  raw[0] = 'X';
  io::write_text(dir / "magic.bin", raw);
  EXPECT_THROW(io::read_function(dir / "magic.bin"), IoError);
  EXPECT_THROW(io::read_function(dir / "absent.bin"), IoError);
}

TEST(Io, ScalarHelpersAreLittleEndian) {
  std::string buf;
  io::append_u32(buf, 0x01020304u);
  io::append_f64(buf, -2.5);
  EXPECT_EQ(static_cast<unsigned char>(buf[0]), 0x04);
  EXPECT_EQ(io::read_u32_at(buf, 0), 0x01020304u);
  EXPECT_EQ(io::read_f64_at(buf, 4), -2.5);
  EXPECT_THROW(io::read_f64_at(buf, 8), IoError);
}

TEST(Signal, GaussianIntegratesToAmplitude) {
  // Periodic trapezoidal quadrature of a smooth periodic function is
  // spectrally accurate, so the mass is exact to round-off.
  const Grid g = make_grid(1, 1, 7);
  SignalSpec s = parse_signal_spec("gaussian-bump;center=0.4,0.6;widths=0.05,0.03;amplitude=2.5");
  const SampledFunction f = synthesize(s, g);
  cplx mass{};
  for (const auto& z : f.values()) mass += z;
  mass *= g.cell_volume();
  EXPECT_NEAR(mass.real(), 2.5, 1e-12);
}

TEST(Signal, SpecTextRoundTrips) {
  for (const char* text :
       {"gaussian-bump;center=0.25,0.75;widths=0.05", "band-limited-random;band=4,16;band2=4,8;seed=9",
        "tensor-oscillation;widths=0.1;frequency=8,6", "indicator-smooth;widths=0.2,0.15",
        "delta;center=0.5,0.5;amplitude=3"}) {
    const SignalSpec s = parse_signal_spec(text);
    EXPECT_EQ(parse_signal_spec(format_signal_spec(s)), s) << text;
  }
  EXPECT_THROW(parse_signal_spec("wavelet;widths=1"), ConfigError);
  EXPECT_THROW(parse_signal_spec("gaussian-bump;widths=abc"), ConfigError);
}

TEST(Signal, SynthesisIsDeterministic) {
  const Grid g = make_grid(1, 1, 6);
  const SignalSpec s = parse_signal_spec("band-limited-random;band=4,16;band2=4,16;seed=3");
  EXPECT_EQ(synthesize(s, g), synthesize(s, g));
}

TEST(Signal, BandLimitedRandomIsResolutionIndependent) {
  const SignalSpec s = parse_signal_spec("band-limited-random;band=4,12;band2=4,12;seed=21");
  const SampledFunction coarse = synthesize(s, make_grid(1, 1, 6));
  const SampledFunction fine = synthesize(s, make_grid(1, 1, 7));
  EXPECT_LT(std::abs(fft::spectrum(coarse)[0]), 1e-12);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      EXPECT_NEAR(std::abs(coarse[static_cast<std::size_t>(i * 64 + j)] -
                           fine[static_cast<std::size_t>(2 * i * 128 + 2 * j)]),
                  0.0, 1e-12);
    }
}

TEST(Signal, InvalidParametersAreConfigErrors) {
  const Grid g = make_grid(1, 1, 5);
  EXPECT_THROW(synthesize(parse_signal_spec("gaussian-bump;widths=0.001"), g), ConfigError);
  EXPECT_THROW(synthesize(parse_signal_spec("band-limited-random;band=4,40"), g), ConfigError);
  EXPECT_THROW(synthesize(parse_signal_spec("tensor-oscillation;widths=0.1;frequency=20"), g),
               ConfigError);
  EXPECT_THROW(synthesize(parse_signal_spec("gaussian-bump;widths=0.1,0.1,0.1"), g), ConfigError);
}

TEST(Signal, DeltaHasUnitMass) {
  const Grid g = make_grid(1, 1, 5);
  const SampledFunction f = synthesize(parse_signal_spec("delta;center=0.5,0.25"), g);
  EXPECT_DOUBLE_EQ(f[static_cast<std::size_t>(16 * 32 + 8)].real() * g.cell_volume(), 1.0);
}
