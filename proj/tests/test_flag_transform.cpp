#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "flaghp/config.hpp"
#include "flaghp/error.hpp"
#include "flaghp/flag_transform.hpp"
#include "flaghp/ops.hpp"
#include "flaghp/signal.hpp"

using namespace flaghp;

namespace {

std::shared_ptr<const FilterBank> bank_for(const Grid& g, ScaleRange jr, ScaleRange kr,
                                           Profile p = Profile::meyer_smooth) {
  return std::make_shared<const FilterBank>(build_filter_bank(g, jr, kr, p));
}

double rel_l2(const SampledFunction& a, const SampledFunction& b) {
  return lp_norm(a - b, 2.0) / lp_norm(b, 2.0);
}

}  // namespace

TEST(Tiling, RectanglesPartitionTheGrid) {
  const Grid g = make_grid(1, 1, 5);
  for (const ScalePair sp : {ScalePair{0, 0}, ScalePair{2, 1}, ScalePair{1, 3}, ScalePair{3, 3}}) {
    std::vector<int> hits(g.size(), 0);
    double measure = 0.0;
    const TileLayout layout = tile_layout(g, sp);
    const auto rects = tiling(g, sp);
    ASSERT_EQ(rects.size(), layout.tiles);
    for (std::size_t id = 0; id < rects.size(); ++id) {
      EXPECT_EQ(rects[id], rectangle_of_tile(layout, id));
      measure += rectangle_measure(g, rects[id]);
      for (std::size_t cell : rectangle_cells(g, rects[id])) {
        ++hits[cell];
        EXPECT_EQ(layout.tile_of(cell, g.samples_per_axis()), id);
      }
    }
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_NEAR(measure, g.volume(2), 1e-12);
  }
}

TEST(Tiling, PositionAndIdAreInverse) {
  const TileLayout layout = tile_layout(make_grid(1, 1, 6), {3, 1});
  for (std::size_t id = 0; id < layout.tiles; ++id) EXPECT_EQ(layout.id(layout.position(id)), id);
}

TEST(Analyze, CoefficientsAreKernelConvolutions) {
  const Grid g = make_grid(1, 1, 5);
  const auto bank = bank_for(g, {0, 2}, {0, 2});
  const SampledFunction f = synthesize(parse_signal_spec("gaussian-bump;center=0.4,0.6;widths=0.06"), g);
  const FlagCoefficients c = analyze(f, bank);
  EXPECT_EQ(c.coeffs.size(), 9u);
  for (const ScalePair sp : bank->scale_pairs()) {
    const SampledFunction brute = convolve(f, kernel_space_side(*bank, sp));
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LT(std::abs(brute[i] - c.at(sp)[i]), 1e-11);
  }
}

TEST(Analyze, CalderonReconstructionOnTheCorpus) {
  const Grid g = make_grid(1, 1, 6);
  const RunConfig cfg = default_config();
  for (const Profile prof : {Profile::meyer_smooth, Profile::shannon_sharp}) {
    const auto bank = bank_for(g, {1, 3}, {1, 3}, prof);
    for (std::size_t i = 0; i < cfg.corpus.size(); ++i) {
      const SampledFunction f = synthesize(corpus_entry(cfg, i), g);
      const FlagCoefficients c = analyze(f, bank);
      EXPECT_LE(rel_l2(reconstruct(c), f), 1e-9) << "corpus " << i;
      const SampledFunction split = reconstruct(c, false) + coarse_remainder(c);
      EXPECT_LE(rel_l2(split, f), 1e-12);
    }
  }
}

TEST(Analyze, EnergyIdentityForInBandSignals) {
  const Grid g = make_grid(1, 1, 7);
  const auto bank = bank_for(g, {1, 3}, {1, 3});
  for (const char* spec : {"band-limited-random;band=4,16;band2=4,16;seed=7",
                           "band-limited-random;band=6,12;band2=4,8;seed=3"}) {
    const SampledFunction f = synthesize(parse_signal_spec(spec), g);
    const double e = lp_norm(f, 2.0);
    EXPECT_NEAR(hp_norm(f, bank, 2.0), e, 1e-9 * e) << spec;
  }
  // Out-of-band content is not seen by the square function.
  const SampledFunction low = synthesize(parse_signal_spec("band-limited-random;band=0.5,1.5;seed=2"), g);
  EXPECT_LT(hp_norm(low, bank, 2.0), 1e-12);
}

TEST(Analyze, SquareFunctionIsThePointwiseL2Aggregate) {
  const Grid g = make_grid(1, 1, 5);
  const auto bank = bank_for(g, {0, 2}, {0, 2});
  const SampledFunction f = synthesize(parse_signal_spec("tensor-oscillation;widths=0.1;frequency=4,3"), g);
  const FlagCoefficients c = analyze(f, bank);
  const SampledFunction s = square_function(c);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double acc = 0.0;
    for (const auto& [sp, v] : c.coeffs) acc += std::norm(v[i]);
    EXPECT_NEAR(s[i].real(), std::sqrt(acc), 1e-13);
  }
}

TEST(Analyze, MaximalSquareFunctionMatchesBruteForce) {
  const Grid g = make_grid(1, 1, 4);
  const int N = g.samples_per_axis();
  const auto bank = bank_for(g, {0, 1}, {0, 1});
  const SampledFunction f = synthesize(parse_signal_spec("gaussian-bump;center=0.3,0.55;widths=0.08"), g);
  const FlagCoefficients c = analyze(f, bank);
  const SampledFunction gs = maximal_square_function(c);
  const SampledFunction s = square_function(c);
  for (int x1 = 0; x1 < N; ++x1)
    for (int x2 = 0; x2 < N; ++x2) {
      double acc = 0.0;
      for (const auto& [sp, v] : c.coeffs) {
        const TileShape t = tile_shape(g, sp);
        const int r = sup_oversampling(g, 4.0 * std::ldexp(1.0, sp.j));
        const std::vector<cplx> fine = trig_upsample(v.values(), 2, N, r);
        const int M = N * r;
        const int n1 = N / t.cells_i, n2 = N / t.cells_j;
        const int p1 = x1 / t.cells_i, p2 = x2 / t.cells_j;
        double mx = 0.0;
        for (int y1 = 0; y1 < M; ++y1)
          for (int y2 = 0; y2 < M; ++y2) {
            const int d1 = ((y1 / (r * t.cells_i) - p1) % n1 + n1) % n1;
            const int d2 = ((y2 / (r * t.cells_j) - p2) % n2 + n2) % n2;
            const bool near1 = d1 <= 1 || d1 == n1 - 1;
            const bool near2 = d2 <= 1 || d2 == n2 - 1;
            if (near1 && near2) mx = std::max(mx, std::abs(fine[static_cast<std::size_t>(y1 * M + y2)]));
          }
        acc += mx * mx;
      }
      const std::size_t i = static_cast<std::size_t>(x1 * N + x2);
      EXPECT_NEAR(gs[i].real(), std::sqrt(acc), 1e-13);
      EXPECT_GE(gs[i].real() + 1e-15, s[i].real());
    }
}

TEST(Analyze, TileSupremaDoNotDependOnResolution) {
  // Sampled near the Nyquist rate, the grid maxima of the finest band miss
  // the peaks; the interpolated suprema agree across resolutions.
  const char* spec = "gaussian-bump;center=0.3,0.7;widths=0.05,0.02";
  std::vector<double> norms;
  for (const int L : {6, 7, 8}) {
    const Grid g = make_grid(1, 1, L);
    const FlagCoefficients c = analyze(synthesize(parse_signal_spec(spec), g), bank_for(g, {1, 3}, {1, 3}));
    norms.push_back(lp_norm(maximal_square_function(c), 2.0));
  }
  EXPECT_NEAR(norms[1] / norms[0], 1.0, 0.02);
  EXPECT_NEAR(norms[2] / norms[0], 1.0, 0.02);
}

TEST(Upsample, InterpolatesTrigonometricPolynomials) {
  const int n = 8, r = 4;
  auto poly = [](double x, double y) {
    const double tau = 2.0 * std::numbers::pi;
    return cplx(std::cos(tau * (3 * x - 2 * y)), 0.5 * std::sin(tau * (x + 3 * y))) + cplx(0.25, 0.0);
  };
  std::vector<cplx> v(n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) v[static_cast<std::size_t>(a * n + b)] = poly(double(a) / n, double(b) / n);
  const std::vector<cplx> fine = trig_upsample(v, 2, n, r);
  ASSERT_EQ(fine.size(), static_cast<std::size_t>(n * n * r * r));
  const int M = n * r;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      EXPECT_LT(std::abs(fine[static_cast<std::size_t>(a * M + b)] - poly(double(a) / M, double(b) / M)), 1e-13);
    }
  // A pure Nyquist mode is split symmetrically and stays real.
  std::vector<cplx> alt(n);
  for (int a = 0; a < n; ++a) alt[static_cast<std::size_t>(a)] = (a % 2) ? -1.0 : 1.0;
  const std::vector<cplx> up = trig_upsample(alt, 1, n, 2);
  for (int a = 0; a < 2 * n; ++a) {
    EXPECT_NEAR(up[static_cast<std::size_t>(a)].real(), std::cos(std::numbers::pi * a / 2.0), 1e-14);
    EXPECT_NEAR(up[static_cast<std::size_t>(a)].imag(), 0.0, 1e-14);
  }
}

TEST(Analyze, TranslationCovariance) {
  const Grid g = make_grid(1, 1, 6);
  const SampledFunction f = synthesize(parse_signal_spec("gaussian-bump;center=0.4,0.6;widths=0.05"), g);
  const int shift[] = {7, -3};
  const SampledFunction fs = shifted(f, shift);
  for (const Profile prof : {Profile::meyer_smooth, Profile::shannon_sharp}) {
    const auto bank = bank_for(g, {1, 3}, {1, 3}, prof);
    const FlagCoefficients a = analyze(f, bank), b = analyze(fs, bank);
    for (const auto& [sp, v] : a.coeffs) {
      const SampledFunction moved = shifted(v, shift);
      double worst = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(moved[i] - b.at(sp)[i]));
      EXPECT_LE(worst, 1e-12) << to_string(prof) << " j=" << sp.j << " k=" << sp.k;
    }
  }
}

TEST(Analyze, CoefficientDumpRoundTrip) {
  const Grid g = make_grid(1, 1, 5);
  const auto bank = bank_for(g, {0, 2}, {1, 2});
  const SampledFunction f = synthesize(parse_signal_spec("delta;center=0.5,0.5"), g);
  const FlagCoefficients c = analyze(f, bank);
  const auto dir = std::filesystem::temp_directory_path() / "flaghp-test-coeffs";
  std::filesystem::remove_all(dir);
  write_coefficients(dir, c);
  const FlagCoefficients back = read_coefficients(dir, bank);
  EXPECT_EQ(back.coeffs, c.coeffs);
  EXPECT_EQ(back.coarse, c.coarse);
}

TEST(Analyze, NormRejectsNonPositiveP) {
  const Grid g = make_grid(1, 1, 5);
  const auto bank = bank_for(g, {0, 2}, {0, 2});
  const SampledFunction f(g);
  EXPECT_THROW(hp_norm(f, bank, 0.0), ConfigError);
  EXPECT_EQ(hp_norm(f, bank, 0.5), 0.0);
}
