#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "flaghp/atomizer.hpp"
#include "flaghp/config.hpp"
#include "flaghp/error.hpp"
#include "flaghp/ops.hpp"
#include "flaghp/validation.hpp"
#include "json.hpp"

using namespace flaghp;

namespace {

struct Fixture {
  Grid grid = make_grid(1, 1, 6);
  std::shared_ptr<const FilterBank> bank =
      std::make_shared<const FilterBank>(build_filter_bank(grid, {1, 3}, {1, 3}, Profile::meyer_smooth));
};

SampledFunction corpus_signal(const Grid& g, std::size_t i) {
  return synthesize(corpus_entry(default_config(), i), g);
}

}  // namespace

TEST(Levels, NestedAndEnlarged) {
  Fixture fx;
  const FlagCoefficients c = analyze(corpus_signal(fx.grid, 4), fx.bank);
  const SampledFunction gs = maximal_square_function(c);
  const LevelFamily lv = build_level_family(gs, AtomizerConfig{});
  ASSERT_FALSE(lv.empty());
  EXPECT_EQ(lv.at(lv.i_min), superlevel(gs, 0.0));
  for (int i = lv.i_min; i <= lv.i_max; ++i) {
    EXPECT_TRUE(lv.at(i).subset_of(lv.tilde_at(i)));
    if (i > lv.i_min) {
      EXPECT_EQ(lv.at(i), superlevel(gs, std::ldexp(1.0, i)));
      EXPECT_TRUE(lv.at(i).subset_of(lv.at(i - 1)));
    }
  }
  EXPECT_TRUE(lv.at(lv.i_max).count() > 0);
  EXPECT_TRUE(superlevel(gs, std::ldexp(1.0, lv.i_max + 1)).empty());
  const auto map = level_map(lv);
  for (std::size_t x = 0; x < map.size(); ++x) {
    if (map[x] >= lv.i_min) {
      EXPECT_TRUE(lv.at(map[x]).contains(x));
      if (map[x] < lv.i_max) {
        EXPECT_FALSE(lv.at(map[x] + 1).contains(x));
      }
    }
  }
  EXPECT_GE(lv.enlargement_constant(), 1.0);
}

TEST(Levels, ZeroFunctionHasNoLevels) {
  Fixture fx;
  const LevelFamily lv = build_level_family(SampledFunction(fx.grid), AtomizerConfig{});
  EXPECT_TRUE(lv.empty());
}

TEST(Assignment, MatchesBruteForceMajorityRule) {
  Fixture fx;
  const FlagCoefficients c = analyze(corpus_signal(fx.grid, 5), fx.bank);
  const LevelFamily lv = build_level_family(maximal_square_function(c), AtomizerConfig{});
  const RectangleAssignment as = assign_rectangles(lv, *fx.bank, 0.5);
  std::size_t assigned = 0, total = 0;
  for (const ScalePair sp : fx.bank->scale_pairs()) {
    for (const FlagRectangle& r : tiling(fx.grid, sp)) {
      ++total;
      const auto cells = rectangle_cells(fx.grid, r);
      int level = lv.i_min - 1;
      for (int i = lv.i_min; i <= lv.i_max; ++i) {
        if (static_cast<double>(lv.at(i).count_in(cells)) > 0.5 * static_cast<double>(cells.size())) level = i;
      }
      for (int i = lv.i_min; i <= lv.i_max; ++i) {
        const auto& list = as.at(i);
        const bool member = std::find(list.begin(), list.end(), r) != list.end();
        EXPECT_EQ(member, i == level);
      }
      if (level >= lv.i_min) ++assigned;
    }
  }
  EXPECT_EQ(as.unassigned, total - assigned);
}

TEST(Particles, SumOverAllRectanglesIsTheCalderonSum) {
  Fixture fx;
  const SampledFunction f = corpus_signal(fx.grid, 7);
  const FlagCoefficients c = analyze(f, fx.bank);
  SampledFunction sum(fx.grid);
  for (const ScalePair sp : fx.bank->scale_pairs()) {
    for (const FlagRectangle& r : tiling(fx.grid, sp)) sum += build_particle(c, r);
  }
  EXPECT_LE(lp_norm(sum - reconstruct(c, false), 2.0), 1e-12 * lp_norm(f, 2.0));
}

TEST(Particles, EnergyAndMasking) {
  Fixture fx;
  const FlagCoefficients c = analyze(corpus_signal(fx.grid, 4), fx.bank);
  const FlagRectangle r = tiling(fx.grid, {2, 1})[5];
  SampledFunction masked(fx.grid);
  double energy = 0.0;
  for (std::size_t cell : rectangle_cells(fx.grid, r)) {
    masked[cell] = c.at(r.sp)[cell];
    energy += std::norm(masked[cell]) * fx.grid.cell_volume();
  }
  EXPECT_NEAR(rectangle_energy(c, r), energy, 1e-15 + 1e-12 * energy);
  const SampledFunction a = build_particle(c, r), b = synthesize_pair(*fx.bank, r.sp, masked);
  EXPECT_LE(lp_norm(a - b, 2.0), 1e-14);
}

TEST(Particles, Incomparability) {
  const Grid g = make_grid(1, 1, 6);
  const FlagRectangle a = tiling(g, {1, 1})[0], b = tiling(g, {3, 2})[0];
  EXPECT_DOUBLE_EQ(rect_incomparability(g, a, a), 1.0);
  EXPECT_DOUBLE_EQ(rect_incomparability(g, a, b), rect_incomparability(g, b, a));
  EXPECT_LT(rect_incomparability(g, a, b), 1.0);
  EXPECT_DOUBLE_EQ(rect_incomparability(0.5, 0.5, 0.125, 0.25), 0.25 * 0.5);
}

TEST(Decompose, ReassemblesTheCorpus) {
  Fixture fx;
  for (std::size_t i = 0; i < default_corpus().size(); ++i) {
    const SampledFunction f = corpus_signal(fx.grid, i);
    const auto plan = std::make_shared<const DecompositionPlan>(plan_decomposition(f, fx.bank, AtomizerConfig{}));
    for (const double p : {0.6, 0.8, 1.0}) {
      const AtomicDecomposition d = calibrate(plan, p);
      ASSERT_FALSE(d.atoms.empty());
      EXPECT_LE(d.reassembly_residual, 1e-8) << "corpus " << i << " p " << p;
      SampledFunction sum = atomic_sum(d);
      sum += d.coarse_remainder;
      EXPECT_LE(lp_norm(sum - f, 2.0) / lp_norm(f, 2.0), 1e-8);
    }
  }
}

TEST(Decompose, CalibrationIsTightAndFollowsTheLevelFormula) {
  Fixture fx;
  const SampledFunction f = corpus_signal(fx.grid, 9);
  const AtomicDecomposition d = decompose(f, fx.bank, 0.8);
  double tight = 0.0;
  for (std::size_t n = 0; n < d.atoms.size(); ++n) {
    const Atom& a = d.atoms[n];
    const double expected = d.C * std::ldexp(1.0, a.i) * std::pow(a.level->omega_measure, 1.0 / d.p);
    EXPECT_NEAR(a.lambda, expected, 1e-12 * expected);
    EXPECT_NEAR(a.normalization * a.lambda, 1.0, 1e-14);
    const double size = lp_norm(a.values, 2.0) * std::pow(a.level->omega_tilde_measure, 0.5 - 1.0 / d.p);
    EXPECT_LE(size, 1.0 + 1e-12);
    tight = std::max({tight, size, check_dR_sum(d, n)});
  }
  // The smallest admissible C makes one of the two bounds active.
  EXPECT_NEAR(tight, 1.0, 1e-9);
  EXPECT_EQ(d.C, std::max(d.C_l2, d.C_12));
  double s = 0.0;
  for (const Atom& a : d.atoms) s += std::pow(a.lambda, d.p);
  EXPECT_NEAR(d.sum_lambda_p, s, 1e-12 * s);
}

TEST(Decompose, ZeroSignalGivesNoAtoms) {
  Fixture fx;
  const AtomicDecomposition d = decompose(SampledFunction(fx.grid), fx.bank, 1.0);
  EXPECT_TRUE(d.atoms.empty());
  EXPECT_EQ(d.sum_lambda_p, 0.0);
  EXPECT_EQ(d.reassembly_residual, 0.0);
  const auto j = nlohmann::json::parse(decomposition_manifest(d));
  EXPECT_TRUE(j["atoms"].empty());
}

TEST(Decompose, ExponentOutsideTheAtomicRangeIsRejected) {
  Fixture fx;
  const SampledFunction f = corpus_signal(fx.grid, 0);
  EXPECT_THROW(decompose(f, fx.bank, 1.5), ConfigError);
  EXPECT_THROW(decompose(f, fx.bank, 0.0), ConfigError);
}

TEST(Decompose, ManifestIsDeterministic) {
  Fixture fx;
  const SampledFunction f = corpus_signal(fx.grid, 6);
  EXPECT_EQ(decomposition_manifest(decompose(f, fx.bank, 0.6)),
            decomposition_manifest(decompose(f, fx.bank, 0.6)));
}

namespace {

struct TranslateRun {
  double ratio[3];
  double dominant_share[3];
};

// One space-side kernel of the (2,2) pair, translated off the grid origin.
TranslateRun kernel_translate(int L) {
  const Grid g = make_grid(1, 1, L);
  auto bank = std::make_shared<const FilterBank>(build_filter_bank(g, {1, 3}, {1, 3}, Profile::meyer_smooth));
  const int N = g.samples_per_axis();
  const int offset[] = {N / 3, N / 5};
  const SampledFunction f = shifted(kernel_space_side(*bank, {2, 2}), offset);
  const auto plan = std::make_shared<const DecompositionPlan>(plan_decomposition(f, bank, AtomizerConfig{}));
  TranslateRun out{};
  const double ps[] = {0.6, 0.8, 1.0};
  for (int n = 0; n < 3; ++n) {
    const AtomicDecomposition d = calibrate(plan, ps[n]);
    double top = 0.0;
    for (const Atom& a : d.atoms) top = std::max(top, std::pow(a.lambda, d.p));
    out.ratio[n] = d.sum_lambda_p / d.hp_norm_p;
    out.dominant_share[n] = top / d.sum_lambda_p;
  }
  return out;
}

const TranslateRun& kernel_translate_cached(int L) {
  static std::map<int, TranslateRun> cache;
  auto it = cache.find(L);
  if (it == cache.end()) it = cache.emplace(L, kernel_translate(L)).first;
  return it->second;
}

}  // namespace

TEST(KernelTranslate, OneLevelDominatesAndTheRatioIsResolutionStable) {
  // Regression values recorded from the L = 7 run for p = 0.6, 0.8, 1.
  const double golden[] = {229.8, 881.0, 3172.0};
  for (const int L : {6, 7, 8}) {
    const TranslateRun& r = kernel_translate_cached(L);
    for (int n = 0; n < 3; ++n) {
      EXPECT_GT(r.dominant_share[n], 0.5) << "L " << L;
      EXPECT_NEAR(r.ratio[n], golden[n], 0.05 * golden[n]) << "L " << L << " p index " << n;
    }
  }
}

TEST(KernelTranslate, RatioLiesInTheFixedBracket) {
  // The bracket [1e-2, 1e2] is the expected range for a single kernel
  // translate. With the measured kernel constant of the Meyer bank the
  // ratio sits above it; this test reports that honestly.
  const TranslateRun& r = kernel_translate_cached(7);
  for (int n = 0; n < 3; ++n) {
    EXPECT_GE(r.ratio[n], 1e-2) << "p index " << n;
    EXPECT_LE(r.ratio[n], 1e2) << "p index " << n;
  }
}
