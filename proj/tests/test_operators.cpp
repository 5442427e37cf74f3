#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <limits>
#include <map>

#include "flaghp/config.hpp"
#include "flaghp/error.hpp"
#include "flaghp/io.hpp"
#include "flaghp/operators.hpp"
#include "flaghp/ops.hpp"

using namespace flaghp;
namespace fs = std::filesystem;

namespace {

const Grid& grid6() {
  static const Grid g = make_grid(1, 1, 6);
  return g;
}

SampledFunction bump(const Grid& g) {
  return synthesize(parse_signal_spec("gaussian-bump;center=0.3,0.6;widths=0.07"), g);
}

struct Decs {
  std::vector<AtomicDecomposition> d;
  std::vector<const AtomicDecomposition*> ptrs;
};

const Decs& corpus_decompositions(double p) {
  static std::map<double, Decs> cache;
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  auto bank = std::make_shared<const FilterBank>(build_filter_bank(grid6(), {1, 3}, {1, 3}, Profile::meyer_smooth));
  Decs out;
  for (const std::size_t i : {0u, 4u, 9u}) {
    out.d.push_back(decompose(synthesize(corpus_entry(default_config(), i), grid6()), bank, p));
  }
  for (const auto& d : out.d) out.ptrs.push_back(&d);
  return cache.emplace(p, std::move(out)).first->second;
}

}  // namespace

TEST(Multiplier, IdentityIsBitwiseAndZeroVanishes) {
  const SampledFunction f = bump(grid6());
  const SampledFunction id = apply(build_multiplier(OperatorKind::identity, grid6()), f);
  EXPECT_TRUE(std::equal(id.values().begin(), id.values().end(), f.values().begin()));
  const SampledFunction z = apply(build_multiplier(OperatorKind::zero, grid6()), f);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(z[i], cplx(0.0, 0.0));
}

TEST(Multiplier, MarcinkiewiczSymbolValues) {
  const Grid& g = grid6();
  const int N = g.samples_per_axis();
  const MultiplierOperator op = build_multiplier(OperatorKind::marcinkiewicz_flag, g);
  ASSERT_EQ(op.symbol.size(), g.size());
  EXPECT_EQ(op.symbol[0], cplx(0.0, 0.0));
  for (int a = 0; a < N; a += 5)
    for (int b = 0; b < N; b += 3) {
      if (a == 0 && b == 0) continue;
      const double x1 = frequency(g, a), x2 = frequency(g, b);
      const double expected = x2 * x2 / (x1 * x1 + x2 * x2);
      EXPECT_NEAR(op.symbol[static_cast<std::size_t>(a * N + b)].real(), expected, 1e-15);
      EXPECT_EQ(op.symbol[static_cast<std::size_t>(a * N + b)].imag(), 0.0);
    }
  EXPECT_LE(op.l2_norm, 1.0);
  EXPECT_GT(op.l2_norm, 0.99);
}

TEST(Multiplier, RieszLikeIsUnimodularOffTheOrigin) {
  const Grid& g = grid6();
  const int N = g.samples_per_axis();
  const MultiplierOperator op = build_multiplier(OperatorKind::riesz_like, g);
  EXPECT_EQ(op.symbol[0], cplx(0.0, 0.0));
  // On the second-factor axis (xi1 = 0) the symbol is -i sign(xi2).
  for (int b = 1; b < N; ++b) {
    const double x2 = frequency(g, b);
    EXPECT_NEAR(std::abs(op.symbol[static_cast<std::size_t>(b)] - cplx(0.0, -x2 / std::abs(x2))), 0.0, 1e-15);
  }
  const SampledFunction f = bump(g);
  const SampledFunction rf = apply(op, f);
  EXPECT_LE(lp_norm(rf, 2.0), lp_norm(f, 2.0) * (1.0 + 1e-12));
}

TEST(Multiplier, NonFiniteSymbolsAreRejected) {
  const Grid& g = grid6();
  std::vector<cplx> sym(g.size(), cplx(1.0, 0.0));
  sym[17] = cplx(std::numeric_limits<double>::infinity(), 0.0);
  EXPECT_THROW(custom_multiplier(g, sym), ConfigError);
  sym[17] = cplx(0.0, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(custom_multiplier(g, sym), ConfigError);
}

TEST(Multiplier, SymbolFileRoundTripAndInfRejection) {
  const Grid& g = grid6();
  const fs::path dir = fs::temp_directory_path() / "flaghp-test-symbol";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const MultiplierOperator op = build_multiplier(OperatorKind::marcinkiewicz_flag, g);
  save_symbol(dir / "m.bin", op);
  const MultiplierOperator back = load_symbol(dir / "m.bin");
  EXPECT_EQ(back.symbol, op.symbol);
  EXPECT_EQ(back.grid, g);

  // A file carrying an infinite entry is refused on load.
  save_symbol(dir / "bad.bin", op);
  {
    std::fstream file(dir / "bad.bin", std::ios::in | std::ios::out | std::ios::binary);
    file.seekp(static_cast<std::streamoff>(io::kHeaderBytes + 8 * 10));
    const double inf = std::numeric_limits<double>::infinity();
    file.write(reinterpret_cast<const char*>(&inf), sizeof inf);
  }
  EXPECT_THROW(load_symbol(dir / "bad.bin"), ConfigError);
}

TEST(Multiplier, CompositionMultipliesSymbols) {
  const Grid& g = grid6();
  const MultiplierOperator a = build_multiplier(OperatorKind::marcinkiewicz_flag, g);
  const MultiplierOperator b = build_multiplier(OperatorKind::riesz_like, g);
  const MultiplierOperator ab = compose(a, b);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(ab.symbol[i], a.symbol[i] * b.symbol[i]);
  const SampledFunction f = bump(g);
  EXPECT_LE(lp_norm(apply(ab, f) - apply(a, apply(b, f)), 2.0), 1e-13 * lp_norm(f, 2.0));
}

TEST(Multiplier, DerivativeRatiosAreBounded) {
  const Grid& g = grid6();
  const double m = symbol_derivative_ratio(build_multiplier(OperatorKind::marcinkiewicz_flag, g));
  EXPECT_TRUE(std::isfinite(m));
  EXPECT_GT(m, 0.0);
  EXPECT_LT(m, 10.0);
  EXPECT_EQ(symbol_derivative_ratio(build_multiplier(OperatorKind::identity, g)), 0.0);
}

TEST(UniformAtoms, MarcinkiewiczIsFiniteAndIdentityMatchesBaseline) {
  for (const double p : {0.6, 1.0}) {
    const Decs& decs = corpus_decompositions(p);
    const UniformAtomReport r =
        uniform_atom_test(build_multiplier(OperatorKind::marcinkiewicz_flag, grid6()), decs.ptrs, p);
    EXPECT_TRUE(std::isfinite(r.sup_lp));
    EXPECT_TRUE(std::isfinite(r.sup_hp));
    EXPECT_GT(r.sup_lp, 0.0);
    std::size_t atoms = 0;
    for (const auto& d : decs.d) atoms += d.atoms.size();
    EXPECT_EQ(r.rows.size(), atoms);

    const UniformAtomReport id = uniform_atom_test(build_multiplier(OperatorKind::identity, grid6()), decs.ptrs, p);
    double base = 0.0;
    for (const auto& d : decs.d)
      for (const Atom& a : d.atoms) base = std::max(base, lp_norm(a.values, p));
    EXPECT_EQ(id.sup_lp, base);
  }
}

TEST(Transfer, SubadditivityChainHolds) {
  const MultiplierOperator ops[] = {build_multiplier(OperatorKind::marcinkiewicz_flag, grid6()),
                                    build_multiplier(OperatorKind::riesz_like, grid6()),
                                    build_multiplier(OperatorKind::identity, grid6())};
  for (const double p : {0.6, 0.8, 1.0}) {
    for (const auto& d : corpus_decompositions(p).d) {
      for (const auto& op : ops) {
        const TransferReport t = transfer_check(op, d);
        EXPECT_GT(t.lhs, 0.0);
        EXPECT_LE(t.ratio, 1.0 + 1e-9) << to_string(op.kind) << " p " << p;
        EXPECT_LE(t.chain_ratio, 1.0 + 1e-9);
        EXPECT_LE(t.chain, t.sup_bound * (1.0 + 1e-12));
      }
    }
  }
}

TEST(Transfer, ZeroOperatorGivesZeroRatio) {
  const TransferReport t = transfer_check(build_multiplier(OperatorKind::zero, grid6()), corpus_decompositions(0.8).d[0]);
  EXPECT_EQ(t.lhs, 0.0);
  EXPECT_EQ(t.ratio, 0.0);
}

TEST(OperatorKind, NamesRoundTrip) {
  for (const OperatorKind k : {OperatorKind::identity, OperatorKind::zero, OperatorKind::marcinkiewicz_flag,
                               OperatorKind::riesz_like, OperatorKind::custom}) {
    EXPECT_EQ(parse_operator_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_operator_kind("hilbert"), ConfigError);
}
