#include <gtest/gtest.h>

#include "oracles.hpp"
#include "padic/recovery.hpp"

using namespace padic;

namespace {

std::vector<Frac> powers(int first, int last) {
  std::vector<Frac> out;
  for (int m = first; m <= last; ++m) out.push_back(pow2(m));
  return out;
}

CoeffMap sparse_series(std::mt19937_64& g, const GridConfig& cfg, int rank, CoeffMode mode, int terms) {
  CoeffMap c(cfg, mode);
  for (int t = 0; t < terms; ++t) {
    MultiIndex n;
    for (int j = 0; j < cfg.dims(); ++j) n.push_back(oracle::pick(g, 0, cfg.seq(j).modulus(rank) - 1));
    c.set(n, Complex(oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)));
  }
  return c;
}

}  // namespace

TEST(FinalWindow, LastThirdWithTwoMembersMinimum) {
  EXPECT_EQ(final_window_start(1), 0u);
  EXPECT_EQ(final_window_start(3), 1u);
  EXPECT_EQ(final_window_start(9), 6u);
  EXPECT_EQ(final_window_start(10), 6u);
}

TEST(RecoverAdditive, ZeroSeries) {
  GridConfig cfg({BranchSeq({2, 3, 2})});
  const auto psi = additive_fn(CoeffMap(cfg, CoeffMode::haar));
  const auto rep = recover_additive(psi, HFamily::constant(cfg, powers(1, 6)), uniform_cell(1, {1}));
  for (const auto& e : rep.estimates) EXPECT_EQ(e, Complex{});
  EXPECT_EQ(rep.reference, Complex{});
  EXPECT_TRUE(rep.matched());
  EXPECT_TRUE(rep.hypothesis_ok);
}

TEST(RecoverAdditive, RandomCellsUnderConstantFamily) {
  auto g = oracle::rng(37);
  GridConfig cfg({BranchSeq({3, 2, 3}), BranchSeq({2, 2, 2})});
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = additive_fn(sparse_series(g, cfg, 3, CoeffMode::haar, 6));
    const auto fam = HFamily::constant(cfg, powers(0, 8));
    for (int c = 0; c < 10; ++c) {
      const int k = static_cast<int>(oracle::pick(g, 0, 3));
      const auto box = cell_at(cfg, k, oracle::pick(g, 0, cell_count(cfg, k) - 1));
      ConditionReport cond;
      const auto rep = recover_additive(psi, fam, box, 1e-9, &cond);
      EXPECT_TRUE(cond.pass());
      EXPECT_TRUE(rep.matched());
      EXPECT_NEAR(std::abs(rep.estimates.back() - psi_eval(psi, box)), 0.0, 1e-9);
    }
  }
}

TEST(RecoverAdditive, MixedRankBox) {
  auto g = oracle::rng(41);
  GridConfig cfg({BranchSeq({2, 2, 2}), BranchSeq({3, 3})});
  const auto psi = additive_fn(sparse_series(g, cfg, 2, CoeffMode::price, 5));
  const Cell box{{2, 0}, {3, 0}};
  const auto rep = recover_additive(psi, HFamily::constant(cfg, powers(0, 6)), box);
  EXPECT_TRUE(rep.matched());
  Complex parts{};
  for (const auto& c : decompose_box(cfg, box)) parts += psi_eval(psi, c);
  EXPECT_NEAR(std::abs(rep.reference - parts), 0.0, 1e-12);
}

TEST(RecoverAdditive, SmallFamilyIsFlagged) {
  GridConfig cfg({BranchSeq({2, 2})});
  CoeffMap c(cfg, CoeffMode::haar);
  c.set({3}, Complex(4.0, 0.0));
  const auto rep = recover_additive(additive_fn(c), HFamily::constant(cfg, {Frac(1), Frac(1, 1)}), root_cell(cfg));
  EXPECT_FALSE(rep.hypothesis_ok);
  EXPECT_FALSE(rep.warnings.empty());
}

TEST(LambdaCondition, Examples) {
  GridConfig cfg({BranchSeq({2, 2})});
  const auto zero = lambda_condition_check(additive_fn(CoeffMap(cfg, CoeffMode::haar)), powers(0, 3));
  for (const auto& v : zero) EXPECT_EQ(v, Frac(0));
  CoeffMap one(cfg, CoeffMode::haar);
  one.set({0}, Complex(1.0, 0.0));
  EXPECT_EQ(lambda_condition_check(additive_fn(one), {Frac(2)}), std::vector<Frac>{Frac(0)});
  EXPECT_EQ(lambda_condition_check(additive_fn(one), {Frac(1, 2)}), std::vector<Frac>{Frac(1, 2)});
}

TEST(ConditionCheck, BoundedMajorantPasses) {
  GridConfig cfg({BranchSeq({3, 3})});
  CoeffMap c(cfg, CoeffMode::haar);
  c.set({0}, Complex(0.5, 0.0));
  c.set({4}, Complex(0.25, 0.0));
  const auto rep = condition_check(additive_fn(c), HFamily::constant(cfg, powers(2, 6)));
  for (const auto& t : rep.tails) EXPECT_EQ(t, Frac(0));
  EXPECT_TRUE(rep.pass());
}

TEST(RecoverCoeff, ConstantFunction) {
  GridConfig cfg({BranchSeq({3, 2})});
  const auto f = StepFunction<Complex>::constant(cfg, Complex(2.0, -1.0));
  const auto fam = HFamily::constant(cfg, powers(0, 5));
  const auto h = recover_haar_coeff(f, {0}, fam);
  const auto p = recover_price_coeff(f, {0}, fam);
  EXPECT_NEAR(std::abs(h.estimates.back() - Complex(2.0, -1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(p.estimates.back() - Complex(2.0, -1.0)), 0.0, 1e-12);
  EXPECT_TRUE(h.matched());
  EXPECT_TRUE(p.matched());
}

TEST(RecoverCoeff, PlantedHaarAndPriceCoefficients) {
  auto g = oracle::rng(43);
  for (const auto& cfg : {GridConfig({BranchSeq({2, 2, 2})}), GridConfig({BranchSeq({3, 3})}),
                          GridConfig({BranchSeq({2, 3}), BranchSeq({3, 2})})}) {
    const int R = 2;
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = sparse_series(g, cfg, R, CoeffMode::haar, 4);
      const auto b = sparse_series(g, cfg, R, CoeffMode::price, 4);
      const auto fa = partial_sum(a, R);
      const auto fb = partial_sum(b, R);
      const auto fam = HFamily::constant(cfg, powers(0, 10));
      for (const auto& [n, v] : a.entries()) {
        const auto rep = recover_haar_coeff(fa, n, fam, 1e-8, v);
        EXPECT_TRUE(rep.matched());
        EXPECT_NEAR(std::abs(rep.estimates.back() - v), 0.0, 1e-8);
      }
      for (const auto& [n, v] : b.entries()) {
        const auto rep = recover_price_coeff(fb, n, fam, 1e-8, v);
        EXPECT_TRUE(rep.matched());
        const auto via = price_coeff_via_gamma(fb, n, fam, 1e-8, v);
        EXPECT_TRUE(via.matched());
        EXPECT_NEAR(std::abs(via.estimates.back() - rep.estimates.back()), 0.0, 1e-9);
      }
    }
  }
}

TEST(RecoverCoeff, HaarCutoffScalesWithSupNorm) {
  GridConfig cfg({BranchSeq({2, 2, 2})});
  CoeffMap a(cfg, CoeffMode::haar);
  a.set({5}, Complex(1.0, 0.0));
  const auto f = partial_sum(a, 3);
  const auto rep = recover_haar_coeff(f, {5}, HFamily::constant(cfg, {Frac(1), Frac(2)}));
  EXPECT_EQ(rep.estimates.front(), Complex{});
  EXPECT_NEAR(std::abs(rep.estimates.back() - Complex(1.0, 0.0)), 0.0, 1e-12);
  const auto unscaled = truncate(zip_with(f, f, [](const Complex& x, const Complex& y) { return x * std::conj(y); }),
                                 StepFunction<Frac>::constant(cfg, Frac(2)));
  EXPECT_EQ(integral(unscaled), Complex{});
}
