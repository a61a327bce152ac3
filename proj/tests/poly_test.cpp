#include "certnet/poly.hpp"

#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

namespace certnet {
namespace {

Polynomial RandomPoly(std::mt19937_64& rng, int n, int deg, int terms) {
  std::uniform_int_distribution<int> e(0, deg);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  Polynomial p(n);
  for (int k = 0; k < terms; ++k) {
    std::vector<int> ex(n);
    int tot = 0;
    for (int i = 0; i < n; ++i) {
      ex[i] = std::min(e(rng), deg - tot);
      tot += ex[i];
    }
    p.AddTerm(Monomial(ex), c(rng));
  }
  return p;
}

// Integer-coefficient random polynomial: arithmetic on it is exact.
Polynomial RandomIntPoly(std::mt19937_64& rng, int n, int deg, int terms) {
  std::uniform_int_distribution<int> c(-5, 5);
  Polynomial p = RandomPoly(rng, n, deg, terms);
  Polynomial q(n);
  for (const auto& [m, v] : p.terms()) q.AddTerm(m, c(rng));
  return q;
}

TEST(PolyTest, MonomialProduct) {
  Polynomial a = Polynomial::Var(2, 0), b = Polynomial::Var(2, 1);
  Polynomial ab = a * b;
  ASSERT_EQ(ab.terms().size(), 1u);
  EXPECT_EQ(ab.coefficient(Monomial({1, 1})), 1.0);
}

TEST(PolyTest, CancellationRemovesTerm) {
  Polynomial x = Polynomial::Var(1, 0);
  Polynomial p = x * x - Polynomial::Constant(1, 1.0);
  Polynomial r = p + Polynomial::Constant(1, 1.0);
  ASSERT_EQ(r.terms().size(), 1u);
  EXPECT_EQ(r.coefficient(Monomial({2})), 1.0);
  EXPECT_EQ(r.coefficient(Monomial({0})), 0.0);
}

TEST(PolyTest, SquareMatchesBruteForceExpansion) {
  Polynomial x = Polynomial::Var(1, 0);
  Polynomial p = x + Polynomial::Constant(1, 1.0);
  Polynomial sq = p * p;
  // term-by-term oracle: sum over exponent pairs (a, b) of coef_a * coef_b.
  std::map<int, double> oracle;
  const double coef[2] = {1.0, 1.0};
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b) oracle[a + b] += coef[a] * coef[b];
  Polynomial expect(1);
  for (auto [e, c] : oracle) expect.AddTerm(Monomial({e}), c);
  EXPECT_TRUE(sq == expect);
}

TEST(PolyTest, Evaluation) {
  Polynomial p = Polynomial::Var(2, 0) * Polynomial::Var(2, 1);
  std::vector<double> x = {2.0, 3.0};
  EXPECT_EQ(p.Evaluate(x), 6.0);
  EXPECT_EQ(Polynomial(3).Evaluate(std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_THROW(p.Evaluate(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(PolyTest, EvaluationMatchesNaiveSum) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  Polynomial p = RandomPoly(rng, 3, 3, 15);
  double worst = 0;
  for (int s = 0; s < 100; ++s) {
    std::vector<double> x = {u(rng), u(rng), u(rng)};
    double naive = 0;
    for (const auto& [m, c] : p.terms())
      naive += c * std::pow(x[0], m[0]) * std::pow(x[1], m[1]) * std::pow(x[2], m[2]);
    worst = std::max(worst, std::abs(naive - p.Evaluate(x)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(PolyTest, BasisOrderAndCounts) {
  auto b = MonomialBasis(2, 1);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], Monomial({0, 0}));
  EXPECT_EQ(b[1], Monomial({1, 0}));
  EXPECT_EQ(b[2], Monomial({0, 1}));
  auto b2 = MonomialBasis(2, 2);
  ASSERT_EQ(b2.size(), 6u);
  EXPECT_EQ(b2[3], Monomial({2, 0}));
  EXPECT_EQ(b2[4], Monomial({1, 1}));
  EXPECT_EQ(b2[5], Monomial({0, 2}));
  // exhaustive enumeration oracle
  int count = 0;
  for (int a = 0; a <= 2; ++a)
    for (int c = 0; c <= 2; ++c)
      for (int d = 0; d <= 2; ++d)
        if (a + c + d <= 2) ++count;
  EXPECT_EQ(MonomialBasis(3, 2).size(), static_cast<size_t>(count));
  EXPECT_EQ(count, 10);
}

TEST(PolyTest, BasisCountIsBinomial) {
  auto binom = [](int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<size_t>(std::llround(r));
  };
  for (int n = 1; n <= 6; ++n)
    for (int d = 0; d <= 6; ++d) {
      auto b = MonomialBasis(n, d);
      EXPECT_EQ(b.size(), binom(n + d, d)) << n << " " << d;
      for (size_t i = 1; i < b.size(); ++i)
        EXPECT_TRUE(GradedLexLess()(b[i - 1], b[i]));
    }
}

TEST(PolyTest, CoefficientExtraction) {
  Polynomial x = Polynomial::Var(1, 0);
  Polynomial p = x * x + x * 2.0;
  EXPECT_EQ(p.terms().size(), 2u);
  EXPECT_EQ(p.coefficient(Monomial({2})), 1.0);
  EXPECT_EQ(p.coefficient(Monomial({1})), 2.0);
  EXPECT_TRUE(Polynomial(1).terms().empty());
}

TEST(PolyTest, ConstructExtractRoundTrip) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 1000; ++k) {
    Polynomial p = RandomPoly(rng, 3, 4, 8);
    Polynomial q(3, p.terms());
    EXPECT_TRUE(p == q);
  }
}

TEST(PolyTest, RingAxiomsExact) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    Polynomial a = RandomIntPoly(rng, 3, 3, 6);
    Polynomial b = RandomIntPoly(rng, 3, 3, 6);
    Polynomial c = RandomIntPoly(rng, 3, 3, 6);
    EXPECT_TRUE((a + b) + c == a + (b + c));
    EXPECT_TRUE(a * (b + c) == a * b + a * c);
    EXPECT_TRUE(a * b == b * a);
  }
}

TEST(PolyTest, EvaluationIsMultiplicative) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    Polynomial a = RandomPoly(rng, 2, 3, 5);
    Polynomial b = RandomPoly(rng, 2, 3, 5);
    std::vector<double> x = {u(rng), u(rng)};
    const double lhs = (a * b).Evaluate(x);
    const double rhs = a.Evaluate(x) * b.Evaluate(x);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + std::abs(rhs)));
  }
}

TEST(PolyTest, MismatchedArityThrows) {
  EXPECT_THROW(Polynomial::Var(2, 0) + Polynomial::Var(3, 0), std::invalid_argument);
}

TEST(PolyTest, JsonRoundTrip) {
  std::mt19937_64 rng(9);
  Polynomial p = RandomPoly(rng, 3, 3, 10);
  nlohmann::json j = p;
  EXPECT_EQ(j["num_vars"], 3);
  Polynomial q = j.get<Polynomial>();
  EXPECT_TRUE(p == q);
  // graded-lex term order in the serialized form
  for (size_t i = 1; i < j["terms"].size(); ++i) {
    Monomial a(j["terms"][i - 1]["exp"].get<std::vector<int>>());
    Monomial b(j["terms"][i]["exp"].get<std::vector<int>>());
    EXPECT_TRUE(GradedLexLess()(a, b));
  }
}

TEST(PolyTest, CompiledVectorMatchesPolynomials) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Polynomial> ps = {RandomPoly(rng, 3, 3, 6), RandomPoly(rng, 3, 2, 4)};
  CompiledPolyVector cv(ps);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd x(3);
    x << u(rng), u(rng), u(rng);
    Eigen::VectorXd v = cv.Evaluate(x);
    for (size_t r = 0; r < ps.size(); ++r)
      EXPECT_NEAR(v[r], ps[r].Evaluate(x), 1e-12);
  }
}

TEST(PolyTest, PolyMatrixProduct) {
  PolyMatrix a(1, 2, 2);
  a(0, 0) = Polynomial::Var(2, 0);
  a(0, 1) = Polynomial::Var(2, 1);
  PolyMatrix b = a.Transpose();
  PolyMatrix ab = a * b;
  std::vector<double> x = {2.0, -1.0};
  EXPECT_DOUBLE_EQ(ab(0, 0).Evaluate(x), 5.0);
  Eigen::MatrixXd k(2, 1);
  k << 1.0, 3.0;
  EXPECT_DOUBLE_EQ((a * k)(0, 0).Evaluate(x), -1.0);
}

}  // namespace
}  // namespace certnet
