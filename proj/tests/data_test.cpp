#include <gtest/gtest.h>

#include <random>

#include "certnet/data.hpp"
#include "random_subsystem.hpp"

namespace certnet {
namespace {

DataConfig Config(const NetworkSpec& s, std::uint64_t seed) {
  DataConfig c;
  c.samples = s.defaults.samples;
  c.noise_bound = s.defaults.noise_bound;
  c.tau = s.defaults.tau;
  c.input_amplitude = s.defaults.input_amplitude;
  c.start_shrink = s.defaults.start_shrink;
  c.experiments = s.defaults.experiments;
  c.seed = seed;
  return c;
}

Eigen::MatrixXd DictA(const SubsystemModel& m) {
  Dictionary d = m.SynthesisDictionary();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m.n(), d.size());
  for (int k = 0; k < m.monomials.size(); ++k) a.col(d.IndexOf(m.monomials[k])) = m.A.col(k);
  return a;
}

SubsystemModel ScalarStable() {
  SubsystemModel m;
  m.name = "scalar";
  m.monomials = Dictionary(1, {Monomial({1})});
  m.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  m.B = Eigen::MatrixXd::Identity(1, 1);
  m.coupling = Eigen::MatrixXd::Zero(1, 1);
  m.dict_degree = 1;
  m.state = {SetKind::kState, {{Eigen::VectorXd::Constant(1, -5), Eigen::VectorXd::Constant(1, 5)}}};
  m.initial = {SetKind::kInitial, {{Eigen::VectorXd::Constant(1, -1), Eigen::VectorXd::Constant(1, 1)}}};
  m.unsafe = {SetKind::kUnsafe, {{Eigen::VectorXd::Constant(1, 3), Eigen::VectorXd::Constant(1, 5)}}};
  return m;
}

TEST(BuildN0, SmallCases) {
  Dictionary d(1, {Monomial({1})});
  Eigen::MatrixXd x0(1, 3);
  x0 << 1, 2, 3;
  RankReport rep;
  Eigen::MatrixXd n0 = BuildN0(x0, d, &rep);
  EXPECT_EQ(n0, x0);
  EXPECT_EQ(rep.rank, 1);
  EXPECT_TRUE(rep.full_row_rank);

  Dictionary d2 = Dictionary::Build(2, 2);
  Eigen::MatrixXd dup(2, 8);
  for (int t = 0; t < 8; ++t) dup.col(t) = Eigen::Vector2d(0.3, -1.2);
  BuildN0(dup, d2, &rep);
  EXPECT_FALSE(rep.full_row_rank);
  EXPECT_EQ(rep.rank, 1);
}

TEST(Collect, NoiseFreeIdentity) {
  NetworkSpec s = Benchmark("lorenz_ring", 6);
  DataConfig c = Config(s, 5);
  c.noise_bound = 0.0;
  TrajectoryData td = CollectInNetwork(s, 2, c);
  const SubsystemModel& m = s.model(2);
  Eigen::MatrixXd pred = DictA(m) * td.N0 + m.B * td.U0 + m.CouplingMatrix(1) * td.W0;
  EXPECT_LE((pred - td.X1).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE(td.rank_ok);
  EXPECT_EQ(td.rank, 9);
}

TEST(Collect, LorenzFullyNoiseGram) {
  NetworkSpec s = Benchmark("lorenz_fully", 20);
  DataConfig c = Config(s, 1);
  ASSERT_EQ(c.samples, 15);
  TrajectoryData td = CollectInNetwork(s, 0, c);
  EXPECT_LE((td.NoiseGram() - 0.45 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(td.W0.rows(), 19 * 3);
  // Gamma Gamma' <= Xi Xi'.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(td.NoiseGram() - td.Gamma * td.Gamma.transpose());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
  for (int t = 0; t < td.T(); ++t) EXPECT_LE(td.Gamma.col(t).squaredNorm(), 0.03 + 1e-15);
}

TEST(Collect, TooFewSamplesRejected) {
  NetworkSpec s = Benchmark("lorenz_ring", 4);
  DataConfig c = Config(s, 1);
  c.samples = 9;
  try {
    CollectInNetwork(s, 1, c);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("T >= N + 1"), std::string::npos);
  }
}

TEST(Collect, NoiseBoundHoldsAcrossBenchmarks) {
  for (const auto& name : BenchmarkNames()) {
    NetworkSpec s = Benchmark(name, name == "heterogeneous_line" ? 9 : 6);
    TrajectoryData td = CollectInNetwork(s, 1, Config(s, 3));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(td.NoiseGram() - td.Gamma * td.Gamma.transpose());
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12) << name;
    EXPECT_TRUE(td.rank_ok) << name;
    // N0 column t equals Upsilon(x_t) x_t.
    PolyMatrix ups = s.model(1).SynthesisDictionary().Factorize();
    for (int t = 0; t < td.T(); ++t) {
      Eigen::VectorXd x = td.X0.col(t);
      ASSERT_LE((ups.Evaluate(x) * x - td.N0.col(t)).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Collect, Deterministic) {
  NetworkSpec s = Benchmark("duffing_ring", 5);
  TrajectoryData a = CollectInNetwork(s, 1, Config(s, 9)), b = CollectInNetwork(s, 1, Config(s, 9));
  EXPECT_EQ(a.X1, b.X1);
  EXPECT_EQ(a.Gamma, b.Gamma);
  TrajectoryData c = CollectInNetwork(s, 1, Config(s, 10));
  EXPECT_NE(a.X0, c.X0);
}

TEST(Lemma1, ScalarNoiseFree) {
  SubsystemModel m = ScalarStable();
  DataConfig c;
  c.samples = 2;
  c.tau = 0.05;
  c.seed = 4;
  TrajectoryData td = Collect(m, 0, c, nullptr);
  PolyMatrix S = RightInverseTransform(td, m.SynthesisDictionary());
  EXPECT_LE(VerifyLemma1(m, td, S, 200, 1), 1e-9);
}

TEST(Lemma1, NoisyWithAndWithoutHiddenNoise) {
  NetworkSpec s = Benchmark("duffing_ring", 5);
  TrajectoryData td = CollectInNetwork(s, 1, Config(s, 2));
  const SubsystemModel& m = s.model(1);
  PolyMatrix S = RightInverseTransform(td, m.SynthesisDictionary());
  EXPECT_LE(VerifyLemma1(m, td, S, 500, 1), 1e-8);
  EXPECT_GT(VerifyLemma1(m, td, S, 500, 1, false), 1e-6);
}

TEST(Lemma1, RandomSubsystemsNoiseFreeAndNoisy) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 50; ++k) {
    const SubsystemModel m = RandomSubsystem(rng, false);
    const TrajectoryData td = RandomSubsystemData(m, false, 100 + k);
    ASSERT_TRUE(td.rank_ok) << k;
    EXPECT_EQ(td.T(), m.SynthesisDictionary().size() + 1);
    const PolyMatrix S = RightInverseTransform(td, m.SynthesisDictionary());
    EXPECT_LE(VerifyLemma1(m, td, S, 200, k), 1e-8) << k;
  }
  for (int k = 0; k < 50; ++k) {
    const SubsystemModel m = RandomSubsystem(rng, true);
    const TrajectoryData td = RandomSubsystemData(m, true, 200 + k);
    ASSERT_TRUE(td.rank_ok) << k;
    const PolyMatrix S = RightInverseTransform(td, m.SynthesisDictionary());
    EXPECT_LE(VerifyLemma1(m, td, S, 200, k), 1e-7) << k;
  }
}

TEST(Lemma1, RejectsWrongTransform) {
  NetworkSpec s = Benchmark("duffing_ring", 5);
  TrajectoryData td = CollectInNetwork(s, 1, Config(s, 2));
  const SubsystemModel& m = s.model(1);
  PolyMatrix S = RightInverseTransform(td, m.SynthesisDictionary());
  S(0, 0) += Polynomial::Constant(2, 1.0);
  EXPECT_THROW(VerifyLemma1(m, td, S, 10, 1), std::invalid_argument);
}

TEST(Dataset, JsonRoundTrip) {
  NetworkSpec s = Benchmark("duffing_ring", 5);
  TrajectoryData td = CollectInNetwork(s, 1, Config(s, 2));
  nlohmann::json j = td;
  TrajectoryData back = nlohmann::json::parse(j.dump()).get<TrajectoryData>();
  EXPECT_EQ(back.X1, td.X1);
  EXPECT_EQ(back.N0, td.N0);
  EXPECT_EQ(back.rank, td.rank);
}

}  // namespace
}  // namespace certnet
