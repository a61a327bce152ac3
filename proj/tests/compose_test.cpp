#include <gtest/gtest.h>

#include <random>

#include "certnet/compose.hpp"

namespace certnet {
namespace {

NetworkSpec Spec(const std::string& bench, int q) { return Benchmark(bench, q); }

std::vector<CertSummary> Uniform(int q, CertSummary s) { return std::vector<CertSummary>(q, s); }

TEST(GainMatrix, TwoSubsystemRing) {
  auto certs = Uniform(2, {0.99, 0.01, 1.0, 1.0, 2.0});
  GainMatrix g = BuildGainMatrix(certs, Spec("duffing_ring", 2));
  Eigen::MatrixXd d = g.delta;
  Eigen::Matrix2d want;
  want << 0, 0.01, 0.01, 0;
  EXPECT_LT((d - want).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(g.eps_hat[0], 0.99);
}

TEST(GainMatrix, SparsityFollowsEdges) {
  const int q = 7;
  auto certs = Uniform(q, {0.5, 0.2, 2.0, 1.0, 2.0});
  for (const char* bench : {"duffing_ring", "duffing_binary", "lorenz_fully"}) {
    NetworkSpec s = Spec(bench, q);
    GainMatrix g = BuildGainMatrix(certs, s);
    Eigen::MatrixXd d = g.delta;
    for (int i = 0; i < q; ++i) {
      EXPECT_EQ(d(i, i), 0.0);
      auto nb = Neighbors(s, i);
      for (int j = 0; j < q; ++j) {
        const bool edge = std::find(nb.begin(), nb.end(), j) != nb.end();
        EXPECT_DOUBLE_EQ(d(i, j), edge ? 0.1 : 0.0) << bench << " " << i << "," << j;
      }
    }
  }
}

TEST(GainMatrix, StarHubColumnCarriesAllGains) {
  const int q = 5;
  NetworkSpec s = Spec("lu_star", q);
  std::vector<CertSummary> certs = Uniform(q, {0.99, 0.0, 1.0, 1.0, 2.0});
  for (int i = 1; i < q; ++i) certs[i].rho = 0.01 * i;
  certs[0].phi = 4.0;
  GainMatrix g = BuildGainMatrix(certs, s);
  Eigen::MatrixXd d = g.delta;
  for (int i = 1; i < q; ++i) EXPECT_DOUBLE_EQ(d(i, 0), 0.01 * i / 4.0);
  EXPECT_DOUBLE_EQ(d.rightCols(q - 1).norm(), 0.0);
  ComposeReport r = CheckCompose(g, certs);
  EXPECT_NEAR(r.varpi[0], -0.99 + 0.1 / 4.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.varpi[3], -0.99);
}

TEST(CheckCompose, DecoupledRateShrinksByMargin) {
  auto certs = Uniform(2, {0.99, 0.0, 1.0, 1.0, 2.0});
  ComposeReport r = CheckCompose(BuildGainMatrix(certs, Spec("duffing_ring", 2)), certs);
  ASSERT_TRUE(r.pass);
  EXPECT_NEAR(r.eps, 0.9801, 1e-15);
  EXPECT_DOUBLE_EQ(r.gamma, 2.0);
  EXPECT_DOUBLE_EQ(r.beta, 4.0);
}

TEST(CheckCompose, LevelSetFailure) {
  auto certs = Uniform(3, {0.99, 0.01, 1.0, 1.0, 0.5});
  ComposeReport r = CheckCompose(BuildGainMatrix(certs, Spec("duffing_ring", 3)), certs);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.failure_reason.find("level-sets"), std::string::npos);
  EXPECT_EQ(r.eps, 0.0);
}

TEST(CheckCompose, SmallGainFailure) {
  auto certs = Uniform(4, {0.05, 0.5, 1.0, 1.0, 2.0});
  ComposeReport r = CheckCompose(BuildGainMatrix(certs, Spec("lorenz_fully", 4)), certs);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.failure_reason.find("small-gain"), std::string::npos);
  EXPECT_NEAR(r.max_varpi, -0.05 + 3 * 0.5, 1e-14);
}

TEST(CheckCompose, RejectsBadInput) {
  auto certs = Uniform(2, {0.99, 0.01, 0.0, 1.0, 2.0});
  EXPECT_THROW(BuildGainMatrix(certs, Spec("duffing_ring", 2)), std::invalid_argument);
  EXPECT_THROW(BuildGainMatrix(Uniform(3, {}), Spec("duffing_ring", 2)), std::invalid_argument);
}

// With B_j >= phi_j |x_j|^2, the column-sum condition bounds the summed
// dissipation terms by -eps * sum_i B_i.
TEST(CheckCompose, ChainInequalityHoldsOnSamples) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* bench : {"duffing_ring", "lorenz_fully", "chen_fully", "duffing_binary"}) {
    NetworkSpec s = Spec(bench, 6);
    const int n = s.model(0).n();
    std::vector<Eigen::MatrixXd> P(s.Q);
    std::vector<CertSummary> certs(s.Q);
    for (int i = 0; i < s.Q; ++i) {
      Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng); });
      P[i] = a * a.transpose() + 0.3 * Eigen::MatrixXd::Identity(n, n);
      const double phi = (1 - 1e-9) * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(P[i]).eigenvalues()[0];
      certs[i] = {0.99 - 0.1 * (i % 3), 0.02 * (1 + i % 2), phi, 1.0, 2.0};
    }
    ComposeReport r = CheckCompose(BuildGainMatrix(certs, s), certs);
    ASSERT_TRUE(r.pass) << bench << " " << r.failure_reason;
    for (int k = 0; k < 1000; ++k) {
      std::vector<Eigen::VectorXd> x(s.Q);
      for (auto& xi : x) xi = 10.0 * Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
      double lhs = 0, btot = 0;
      for (int i = 0; i < s.Q; ++i) {
        const double bi = x[i].dot(P[i] * x[i]);
        btot += bi;
        lhs -= certs[i].eps * bi;
        for (int j : Neighbors(s, i)) lhs += certs[i].rho * x[j].squaredNorm();
      }
      ASSERT_LE(lhs, -r.eps * btot + 1e-6 * (1 + std::abs(btot))) << bench;
    }
  }
}

TEST(SummarizeNetwork, RhoFollowsNeighborCount) {
  NetworkSpec s = Spec("lu_star", 4);
  CsbcCertificate c;
  c.pi = 0.5;
  c.phi = 2;
  c.eps = 0.9;
  auto sum = SummarizeNetwork(s, {c});
  const SubsystemModel& m = s.model(0);
  EXPECT_EQ(sum[0].rho, 0.0);
  for (int i = 1; i < 4; ++i) EXPECT_DOUBLE_EQ(sum[i].rho, InteractionGain(m.CouplingMatrix(1), 0.5));
  EXPECT_THROW(SummarizeNetwork(s, {}), std::invalid_argument);
}

TEST(NetworkCbc, BlockQuadraticAndStackedController) {
  Network net(Spec("duffing_ring", 3));
  CsbcCertificate c;
  c.P = Eigen::Matrix2d{{2, 0.5}, {0.5, 1}};
  // nu(x) = (-x1 - x2^2, 3 x2)
  c.controller = {Polynomial::Var(2, 0) * -1.0 - Polynomial::Var(2, 1) * Polynomial::Var(2, 1),
                  Polynomial::Var(2, 1) * 3.0};
  ComposeReport rep;
  rep.pass = true;
  rep.eps = 0.5;
  NetworkCbc cbc(net, {c}, rep);
  Eigen::VectorXd x(6);
  x << 1, 2, -1, 0, 0.5, -0.5;
  double want = 0;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector2d xi = x.segment<2>(2 * i);
    EXPECT_DOUBLE_EQ(cbc.SubValue(i, x), xi.dot(c.P * xi));
    want += xi.dot(c.P * xi);
  }
  EXPECT_DOUBLE_EQ(cbc.Value(x), want);
  Eigen::VectorXd nu;
  cbc.Control(x, nu);
  ASSERT_EQ(nu.size(), 6);
  Eigen::VectorXd want_nu(6);
  want_nu << -1 - 4, 6, 1, 0, -0.5 - 0.25, -1.5;
  EXPECT_LT((nu - want_nu).norm(), 1e-15);
  rep.pass = false;
  EXPECT_THROW(NetworkCbc(net, {c}, rep), std::invalid_argument);
}

TEST(ComposeReport, Json) {
  auto certs = Uniform(2, {0.99, 0.0, 1.0, 1.0, 0.5});
  ComposeReport r = CheckCompose(BuildGainMatrix(certs, Spec("duffing_ring", 2)), certs);
  nlohmann::json j = r;
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_EQ(j["varpi"].size(), 2u);
  EXPECT_TRUE(j.contains("failure_reason"));
}

}  // namespace
}  // namespace certnet
