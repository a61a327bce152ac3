#include "certnet/dictionary.hpp"

#include <gtest/gtest.h>

namespace certnet {
namespace {

TEST(DictionaryTest, LorenzDegreeTwo) {
  Dictionary d = Dictionary::Build(3, 2);
  ASSERT_EQ(d.size(), 9);
  EXPECT_EQ(d[0], Monomial({1, 0, 0}));
  EXPECT_EQ(d[2], Monomial({0, 0, 1}));
  EXPECT_EQ(d[3], Monomial({2, 0, 0}));
  std::vector<Monomial> truth = {Monomial({1, 0, 0}), Monomial({0, 1, 0}),
                                 Monomial({0, 0, 1}), Monomial({1, 0, 1}),
                                 Monomial({1, 1, 0})};
  EXPECT_TRUE(d.Contains(truth));
  EXPECT_FALSE(d.Contains({Monomial({3, 0, 0})}));
}

TEST(DictionaryTest, DuffingDegreeThree) {
  Dictionary d = Dictionary::Build(2, 3);
  EXPECT_EQ(d.size(), 9);
  EXPECT_TRUE(d.Contains({Monomial({1, 0}), Monomial({0, 1}), Monomial({3, 0})}));
}

TEST(DictionaryTest, SmallCases) {
  Dictionary d = Dictionary::Build(1, 1);
  ASSERT_EQ(d.size(), 1);
  EXPECT_EQ(d[0], Monomial({1}));
  EXPECT_THROW(Dictionary::Build(2, 0), std::invalid_argument);
  EXPECT_THROW(Dictionary(1, {Monomial({0})}), std::invalid_argument);
}

TEST(DictionaryTest, FactorizeExamples) {
  Dictionary d(2, {Monomial({1, 0}), Monomial({0, 1}), Monomial({1, 1})});
  PolyMatrix u = d.Factorize();
  EXPECT_TRUE(u(0, 0) == Polynomial::Constant(2, 1.0));
  EXPECT_TRUE(u(0, 1).is_zero());
  EXPECT_TRUE(u(1, 1) == Polynomial::Constant(2, 1.0));
  EXPECT_TRUE(u(2, 0) == Polynomial::Var(2, 1));
  EXPECT_TRUE(u(2, 1).is_zero());

  PolyMatrix u1 = Dictionary(1, {Monomial({1})}).Factorize();
  EXPECT_TRUE(u1(0, 0) == Polynomial::Constant(1, 1.0));
  PolyMatrix u2 = Dictionary(1, {Monomial({2})}).Factorize();
  EXPECT_TRUE(u2(0, 0) == Polynomial::Var(1, 0));
}

TEST(DictionaryTest, FactorizationIdentityAndRowStructure) {
  for (int n = 1; n <= 4; ++n)
    for (int deg = 1; deg <= 4; ++deg) {
      Dictionary d = Dictionary::Build(n, deg);
      PolyMatrix u = d.Factorize();
      PolyMatrix x(n, 1, n);
      for (int j = 0; j < n; ++j) x(j, 0) = Polynomial::Var(n, j);
      PolyMatrix ux = u * x;
      for (int k = 0; k < d.size(); ++k) {
        EXPECT_TRUE((ux(k, 0) - Polynomial::FromMonomial(d[k])).is_zero());
        int nonzero = 0;
        for (int j = 0; j < n; ++j)
          if (!u(k, j).is_zero()) {
            ++nonzero;
            EXPECT_EQ(u(k, j).degree(), d[k].degree() - 1);
          }
        EXPECT_EQ(nonzero, 1);
      }
    }
}

TEST(DictionaryTest, StableOrderAndJson) {
  Dictionary a = Dictionary::Build(3, 3), b = Dictionary::Build(3, 3);
  EXPECT_EQ(a.monomials(), b.monomials());
  nlohmann::json j = a;
  Dictionary c = j.get<Dictionary>();
  EXPECT_EQ(a.monomials(), c.monomials());
}

}  // namespace
}  // namespace certnet
