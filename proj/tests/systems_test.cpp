#include <gtest/gtest.h>

#include "oracles.hpp"
#include "padic/systems.hpp"

using namespace padic;

namespace {

std::vector<oracle::Cx> library_haar(const BranchSeq& seq, std::int64_t n, int rank) {
  std::vector<oracle::Cx> out;
  for (const auto& v : haar_table(seq, n, rank)) out.push_back(v.to_complex());
  return out;
}

std::vector<oracle::Cx> library_price(const BranchSeq& seq, std::int64_t k, int rank) {
  std::vector<oracle::Cx> out;
  for (const auto& v : price_table(seq, k, rank)) out.push_back(v.to_complex());
  return out;
}

std::vector<int> digits(std::initializer_list<int> d) { return d; }

}  // namespace

TEST(HaarCodec, DecodeExamples) {
  EXPECT_EQ(haar_decode(BranchSeq({2, 2, 2}), 3), (HaarIndex{1, 1, 1}));
  EXPECT_EQ(haar_decode(BranchSeq({3, 3}), 2), (HaarIndex{0, 0, 2}));
  EXPECT_EQ(haar_decode(BranchSeq({2, 2}), 1), (HaarIndex{0, 0, 1}));
  EXPECT_THROW(haar_decode(BranchSeq({2, 2}), 0), std::invalid_argument);
  EXPECT_THROW(haar_decode(BranchSeq({2, 2}), 4), std::out_of_range);
}

TEST(HaarCodec, RoundTripOverAllIndices) {
  for (const auto& p : {std::vector<int>{2, 3, 2}, std::vector<int>{3, 3, 3}, std::vector<int>{5, 2, 3}}) {
    BranchSeq seq(p);
    for (std::int64_t n = 1; n < seq.modulus(3); ++n) EXPECT_EQ(haar_encode(seq, haar_decode(seq, n)), n);
  }
}

TEST(GenHaar, PointExamples) {
  const auto c0 = gen_haar_eval(BranchSeq({3, 3}), 0, digits({1, 2}));
  EXPECT_EQ(c0.radicand(), 1u);
  EXPECT_EQ(c0.phase(), Phase());

  const auto v = gen_haar_eval(BranchSeq({3, 3}), 1, digits({2, 0}));
  EXPECT_EQ(v.radicand(), 1u);
  EXPECT_EQ(v.phase(), Phase(2, 3));

  EXPECT_TRUE(gen_haar_eval(BranchSeq({2, 2, 2}), 3, digits({0, 0})).is_zero());
}

TEST(ClassicalHaar, TableValues) {
  const auto a = classical_haar_eval(0, 1, digits({0, 1}));
  EXPECT_EQ(a.radicand(), 1u);
  EXPECT_EQ(a.phase(), Phase());

  const auto b = classical_haar_eval(1, 2, digits({1, 0}));
  EXPECT_EQ(b.radicand(), 2u);
  EXPECT_EQ(b.phase(), Phase());

  const auto c = classical_haar_eval(1, 2, digits({1, 1}));
  EXPECT_EQ(c.radicand(), 2u);
  EXPECT_EQ(c.phase(), Phase(1, 2));
}

TEST(Price, PointExamples) {
  const auto a = price_eval(BranchSeq({2, 2}), 0, digits({1, 1}));
  EXPECT_EQ(a.phase(), Phase());
  EXPECT_EQ(price_eval(BranchSeq({2, 2}), 1, digits({1, 0})).phase(), Phase(1, 2));
  EXPECT_EQ(price_eval(BranchSeq({3, 3}), 2, digits({2, 0})).phase(), Phase(1, 3));
  EXPECT_EQ(price_eval(BranchSeq({3, 3}), 2, digits({2, 0})).radicand(), 1u);
}

TEST(Tables, MatchOracles) {
  for (const auto& p : {std::vector<int>{2, 3, 2}, std::vector<int>{3, 3, 3}, std::vector<int>{2, 2, 2, 2}}) {
    BranchSeq seq(p);
    const int R = 3;
    for (std::int64_t n = 0; n < seq.modulus(R); ++n) {
      const auto h = library_haar(seq, n, R);
      const auto hp = oracle::tabulate(p, R, [&](const oracle::Digits& x) { return oracle::haar(p, n, x); });
      const auto q = library_price(seq, n, R);
      const auto qp = oracle::tabulate(p, R, [&](const oracle::Digits& x) { return oracle::price(p, n, x); });
      for (std::size_t c = 0; c < h.size(); ++c) {
        EXPECT_NEAR(std::abs(h[c] - hp[c]), 0.0, 1e-12) << "haar n=" << n << " cell " << c;
        EXPECT_NEAR(std::abs(q[c] - qp[c]), 0.0, 1e-12) << "price k=" << n << " cell " << c;
      }
    }
  }
}

TEST(TensorSteps, Examples) {
  auto cfg = GridConfig::uniform(2, BranchSeq({2, 2}));
  const auto one = to_complex(tensor_haar_step(cfg, {0, 0}));
  for (const auto& v : one.values()) EXPECT_EQ(v, Complex(1.0, 0.0));

  auto line = GridConfig({BranchSeq({2, 2})});
  const auto r = to_complex(tensor_haar_step(line, {1}));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], Complex(1.0, 0.0));
  EXPECT_EQ(r[1], Complex(-1.0, 0.0));

  const auto t = to_complex(tensor_haar_step(cfg, {1, 1}));
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0], Complex(1.0, 0.0));
  EXPECT_EQ(t[1], Complex(-1.0, 0.0));
  EXPECT_EQ(t[2], Complex(-1.0, 0.0));
  EXPECT_EQ(t[3], Complex(1.0, 0.0));
}

TEST(TensorSteps, ProductOfOneDimensionalOracles) {
  std::vector<int> p1{2, 3}, p2{3, 2};
  GridConfig cfg({BranchSeq(p1), BranchSeq(p2)});
  for (std::int64_t a = 0; a < 6; ++a) {
    for (std::int64_t b = 0; b < 6; ++b) {
      const auto h = to_complex(tensor_haar_step(cfg, {a, b}, 2));
      const auto q = to_complex(tensor_price_step(cfg, {a, b}, 2));
      for (std::size_t c = 0; c < h.size(); ++c) {
        const auto cell = h.cell(c);
        const auto x = oracle::digits_of(p1, cell.index[0], 2);
        const auto y = oracle::digits_of(p2, cell.index[1], 2);
        EXPECT_NEAR(std::abs(h[c] - oracle::haar(p1, a, x) * oracle::haar(p2, b, y)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(q[c] - oracle::price(p1, a, x) * oracle::price(p2, b, y)), 0.0, 1e-12);
      }
    }
  }
}

TEST(InnerProduct, Orthonormality) {
  for (const auto& p : {std::vector<int>{2, 2, 2, 2}, std::vector<int>{3, 3, 3}, std::vector<int>{2, 3, 2, 3}}) {
    GridConfig cfg({BranchSeq(p)});
    const int R = 3;
    const auto M = BranchSeq(p).modulus(R);
    std::vector<StepFunction<Complex>> chi, psi;
    for (std::int64_t n = 0; n < M; ++n) {
      chi.push_back(to_complex(tensor_haar_step(cfg, {n}, R)));
      psi.push_back(to_complex(tensor_price_step(cfg, {n}, R)));
    }
    for (std::int64_t n = 0; n < M; ++n) {
      for (std::int64_t m = 0; m < M; ++m) {
        const double delta = n == m ? 1.0 : 0.0;
        EXPECT_NEAR(std::abs(inner_product(chi[n], chi[m]) - delta), 0.0, 1e-10);
        EXPECT_NEAR(std::abs(inner_product(psi[n], psi[m]) - delta), 0.0, 1e-10);
      }
    }
  }
}

TEST(InnerProduct, MismatchedGridsThrow) {
  auto a = StepFunction<Complex>::constant(GridConfig({BranchSeq({2})}), Complex(1.0, 0.0));
  auto b = StepFunction<Complex>::constant(GridConfig({BranchSeq({3})}), Complex(1.0, 0.0));
  EXPECT_THROW(inner_product(a, b), std::invalid_argument);
}

TEST(NumberingBridge, ClassicalAgreesWithGeneralizedOnDyadicGrid) {
  BranchSeq seq(std::vector<int>(6, 2));
  for (int k = 0; k < 5; ++k) {
    for (std::int64_t i = 1; i <= (std::int64_t{1} << k); ++i) {
      const auto n = classical_to_haar_index(k, i);
      EXPECT_EQ(haar_decode(seq, n).r, i - 1);
      EXPECT_EQ(haar_index_to_classical(n), std::make_pair(k, i));
      for (std::int64_t c = 0; c < 64; ++c) {
        const auto x = digits_of_interval(seq, c, 6);
        EXPECT_EQ(classical_haar_eval(k, i, x), gen_haar_eval(seq, n, x));
        const double mid = (static_cast<double>(c) + 0.5) / 64.0;
        EXPECT_EQ(classical_haar_eval(k, i, x).to_complex().real(), oracle::classical(k, i, mid));
      }
    }
  }
}

TEST(Gamma, DyadicBlockOneIsUnimodular) {
  const auto g = gamma_matrix(BranchSeq({2, 2}), 1);
  ASSERT_EQ(g.size(), 1);
  EXPECT_NEAR(std::norm(g.at(1, 1)), 1.0, 1e-12);
}

TEST(Gamma, TernaryBlockMatchesThreeCellSums) {
  std::vector<int> p{3, 3};
  const auto g = gamma_matrix(BranchSeq(p), 1);
  ASSERT_EQ(g.size(), 2);
  for (std::int64_t k = 1; k <= 2; ++k) {
    for (std::int64_t l = 1; l <= 2; ++l) {
      oracle::Cx s = 0.0;
      for (int x = 0; x < 3; ++x) s += oracle::price(p, k, {x}) * std::conj(oracle::haar(p, l, {x}));
      EXPECT_NEAR(std::abs(g.at(k, l) - s / 3.0), 0.0, 1e-12);
    }
  }
}

TEST(Gamma, BlocksAreUnitaryAndReconstructPrice) {
  for (const auto& p : {std::vector<int>{2, 2, 2, 2}, std::vector<int>{3, 3, 3}, std::vector<int>{2, 3, 2, 3}}) {
    BranchSeq seq(p);
    for (int b = 1; b <= 3; ++b) {
      const auto g = gamma_matrix(seq, b);
      const auto lo = g.first();
      const auto hi = lo + g.size();
      for (auto k = lo; k < hi; ++k) {
        for (auto q = lo; q < hi; ++q) {
          Complex s{};
          for (auto l = lo; l < hi; ++l) s += g.at(k, l) * std::conj(g.at(q, l));
          EXPECT_NEAR(std::abs(s - (k == q ? 1.0 : 0.0)), 0.0, 1e-10);
        }
        const auto psi = oracle::tabulate(p, b, [&](const oracle::Digits& x) { return oracle::price(p, k, x); });
        std::vector<oracle::Cx> rebuilt(psi.size(), 0.0);
        for (auto l = lo; l < hi; ++l) {
          const auto chi = oracle::tabulate(p, b, [&](const oracle::Digits& x) { return oracle::haar(p, l, x); });
          for (std::size_t c = 0; c < psi.size(); ++c) rebuilt[c] += g.at(k, l) * chi[c];
        }
        for (std::size_t c = 0; c < psi.size(); ++c) EXPECT_NEAR(std::abs(rebuilt[c] - psi[c]), 0.0, 1e-9);
      }
    }
  }
}

TEST(Gamma, ConjugatedCoefficientsDoNotReconstruct) {
  std::vector<int> p{3, 3};
  const auto g = gamma_matrix(BranchSeq(p), 2);
  double worst = 0.0;
  for (auto k = g.first(); k < g.first() + g.size(); ++k) {
    const auto psi = oracle::tabulate(p, 2, [&](const oracle::Digits& x) { return oracle::price(p, k, x); });
    std::vector<oracle::Cx> rebuilt(psi.size(), 0.0);
    for (auto l = g.first(); l < g.first() + g.size(); ++l) {
      const auto chi = oracle::tabulate(p, 2, [&](const oracle::Digits& x) { return oracle::haar(p, l, x); });
      for (std::size_t c = 0; c < psi.size(); ++c) rebuilt[c] += std::conj(g.at(k, l)) * chi[c];
    }
    for (std::size_t c = 0; c < psi.size(); ++c) worst = std::max(worst, std::abs(rebuilt[c] - psi[c]));
  }
  EXPECT_GT(worst, 0.5);
}

TEST(Gamma, RejectsBadBlock) {
  EXPECT_THROW(gamma_matrix(BranchSeq({2, 2}), 0), std::out_of_range);
  EXPECT_THROW(gamma_matrix(BranchSeq({2, 2}), 3), std::out_of_range);
}

TEST(UnitValues, ExactArithmetic) {
  const UnitValue a(2, Phase(1, 3));
  const UnitValue b(8, Phase(2, 3));
  const auto c = a * b;
  EXPECT_EQ(c.radicand(), 16u);
  EXPECT_EQ(c.phase(), Phase());
  ASSERT_TRUE(c.exact_real().has_value());
  EXPECT_EQ(*c.exact_real(), Frac(4));
  EXPECT_EQ((a * a.conj()).phase(), Phase());
  EXPECT_FALSE(a.exact_real().has_value());
}
