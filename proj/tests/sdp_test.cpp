#include "certnet/sdp.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "planted_lmi.hpp"

namespace certnet {
namespace {

TEST(SdpTest, ScalarBound) {
  LmiProblem p;
  const int y = p.AddVariables(1);
  const int b = p.AddPsdBlock(2);
  for (int i = 0; i < 2; ++i) {
    p.AddBlockEntry(b, i, i, LmiProblem::kConstant, 1.0);
    p.AddBlockEntry(b, i, i, y, -1.0);
  }
  p.SetObjective(y, 1.0);
  LmiSolution s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal) << s.message;
  EXPECT_NEAR(s.y[0], 1.0, 1e-6);
}

TEST(SdpTest, ConstantNegativeIsInfeasible) {
  LmiProblem p;
  p.AddVariables(1);
  const int b = p.AddPsdBlock(1);
  p.AddBlockEntry(b, 0, 0, LmiProblem::kConstant, -1.0);
  EXPECT_EQ(Solve(p).status, SolveStatus::kInfeasible);
}

TEST(SdpTest, InfeasibleWithVariables) {
  // [[y, 0], [0, -1 - y]] >= 0 has no solution.
  LmiProblem p;
  const int y = p.AddVariables(1);
  const int b = p.AddPsdBlock(2);
  p.AddBlockEntry(b, 0, 0, y, 1.0);
  p.AddBlockEntry(b, 1, 1, y, -1.0);
  p.AddBlockEntry(b, 1, 1, LmiProblem::kConstant, -1.0);
  EXPECT_EQ(Solve(p).status, SolveStatus::kInfeasible);
}

TEST(SdpTest, FeasibleIntervalMatchesGrid) {
  // [[1, y], [y, 1]] >= 0: maximize and minimize y, compare with a grid.
  auto bound = [](double sign) {
    LmiProblem p;
    const int y = p.AddVariables(1);
    const int b = p.AddPsdBlock(2);
    p.AddBlockEntry(b, 0, 0, LmiProblem::kConstant, 1.0);
    p.AddBlockEntry(b, 1, 1, LmiProblem::kConstant, 1.0);
    p.AddBlockEntry(b, 0, 1, y, 1.0);
    p.SetObjective(y, sign);
    LmiSolution s = Solve(p);
    EXPECT_EQ(s.status, SolveStatus::kOptimal);
    return s.y[0];
  };
  const double hi = bound(1.0), lo = bound(-1.0);
  double glo = 1e9, ghi = -1e9;
  for (int k = -2000; k <= 2000; ++k) {
    const double y = k * 1e-3;
    Eigen::Matrix2d m;
    m << 1, y, y, 1;
    if (PsdCheck(m, 0.0).psd) {
      glo = std::min(glo, y);
      ghi = std::max(ghi, y);
    }
  }
  EXPECT_NEAR(hi, ghi, 1e-3);
  EXPECT_NEAR(lo, glo, 1e-3);
}

TEST(SdpTest, EqualitiesAreEliminated) {
  // maximize y0 + y1 s.t. y0 + 2 y1 = 1, y0 <= 3 (diag), y1 >= -5
  LmiProblem p;
  const int v = p.AddVariables(2);
  p.AddEquality({{v, 1.0}, {v + 1, 2.0}}, 1.0);
  p.AddBounds(v, -10.0, 3.0);
  p.AddLowerBound(v + 1, -5.0);
  p.SetObjective(v, 1.0);
  p.SetObjective(v + 1, 1.0);
  LmiSolution s = Solve(p);
  ASSERT_EQ(s.status, SolveStatus::kOptimal) << s.message;
  EXPECT_NEAR(s.y[0], 3.0, 1e-5);
  EXPECT_NEAR(s.y[1], -1.0, 1e-5);
  EXPECT_LE(s.equality_residual, 1e-10);
}

TEST(SdpTest, InconsistentEqualities) {
  LmiProblem p;
  const int v = p.AddVariables(2);
  p.AddEquality({{v, 1.0}, {v + 1, 1.0}}, 1.0);
  p.AddEquality({{v, 2.0}, {v + 1, 2.0}}, 3.0);
  const int b = p.AddPsdBlock(1);
  p.AddBlockEntry(b, 0, 0, LmiProblem::kConstant, 1.0);
  EXPECT_EQ(Solve(p).status, SolveStatus::kInfeasible);
}

TEST(SdpTest, PlantedOptima) {
  for (int seed = 0; seed < 20; ++seed) {
    PlantedLmi pl = MakePlantedLmi(seed);
    LmiSolution s = Solve(pl.problem);
    ASSERT_TRUE(s.ok()) << "seed " << seed << " " << s.message;
    const double rel = std::abs(s.objective - pl.optimum) / std::max(1.0, std::abs(pl.optimum));
    EXPECT_LE(rel, 1e-5) << "seed " << seed;
    // self-consistency of the reported residuals
    EXPECT_GE(s.min_eigenvalue, -1e-8);
    EXPECT_LE(s.equality_residual, 1e-7);
  }
}

TEST(SdpTest, GapDecreasesMonotonically) {
  for (int seed = 0; seed < 20; ++seed) {
    PlantedLmi pl = MakePlantedLmi(seed);
    LmiSolution s = Solve(pl.problem);
    ASSERT_GE(s.gap_history.size(), 2u);
    // history[0] is the starting point; every accepted step must shrink <X,S>.
    for (size_t i = 2; i < s.gap_history.size(); ++i)
      EXPECT_LE(s.gap_history[i], s.gap_history[i - 1] * (1 + 1e-9)) << seed << " " << i;
  }
}

TEST(SdpTest, PsdCheck) {
  auto r = PsdCheck(Eigen::Matrix3d::Identity(), 1e-8);
  EXPECT_TRUE(r.psd);
  EXPECT_NEAR(r.min_eigenvalue, 1.0, 1e-14);
  Eigen::Matrix2d m;
  m << 1, 0, 0, -1e-3;
  EXPECT_FALSE(PsdCheck(m, 1e-8).psd);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(6, 4);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  auto r2 = PsdCheck(a.transpose() * a, 0.0);
  EXPECT_GE(r2.min_eigenvalue, -1e-10);
  Eigen::Matrix2d asym;
  asym << 1, 2, 0, 1;
  EXPECT_THROW(PsdCheck(asym, 1e-8), std::invalid_argument);
}

}  // namespace
}  // namespace certnet
