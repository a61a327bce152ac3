#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "certnet/csbc.hpp"

namespace certnet {
namespace {

Box MakeBox(std::vector<double> lo, std::vector<double> hi) {
  return {Eigen::Map<Eigen::VectorXd>(lo.data(), lo.size()), Eigen::Map<Eigen::VectorXd>(hi.data(), hi.size())};
}

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

SynthesisProblem ProblemFor(const NetworkSpec& s, int i, std::uint64_t seed) {
  const SubsystemModel& m = s.model(i);
  return {CollectInNetwork(s, i, Config(s, seed)), m.SynthesisDictionary(),
          m.CouplingMatrix(NumNeighbors(s, i)), m.state, m.initial, m.unsafe};
}

Eigen::VectorXd RandomIn(std::mt19937_64& rng, const Box& b) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(b.dim());
  for (int k = 0; k < b.dim(); ++k) x[k] = b.lo[k] + (b.hi[k] - b.lo[k]) * u(rng);
  return x;
}

double Eval(const std::vector<Polynomial>& ps, int k, const Eigen::VectorXd& x) { return ps[k].Evaluate(x); }

struct DuffingFixture {
  NetworkSpec spec = Benchmark("duffing_ring", 5);
  SynthesisProblem prob = ProblemFor(spec, 1, 2);
  SynthResult res;
  double seconds = 0;

  DuffingFixture() {
    const auto t0 = std::chrono::steady_clock::now();
    res = Synthesize(prob, SynthConfig{}, "duffing");
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

const DuffingFixture& Duffing() {
  static const DuffingFixture f;
  return f;
}

TEST(InteractionGain, Formula) {
  EXPECT_EQ(InteractionGain(Eigen::MatrixXd::Zero(3, 3), 0.8), 0.0);
  EXPECT_EQ(InteractionGain(Eigen::MatrixXd(3, 0), 0.8), 0.0);
  const double rho = InteractionGain(-0.01 * Eigen::MatrixXd::Identity(3, 3), 0.8);
  EXPECT_NEAR(rho, 1.25e-4, 1e-16);
  EXPECT_THROW(InteractionGain(Eigen::MatrixXd::Identity(2, 2), 0.0), std::invalid_argument);
}

TEST(InteractionGain, StackedCouplingMatchesOracle) {
  const NetworkSpec spec = Benchmark("lorenz_fully");
  const Eigen::MatrixXd D = spec.model(0).CouplingMatrix(999);
  ASSERT_EQ(D.cols(), 2997);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const double s = svd.singularValues()[0];
  EXPECT_LE(std::abs(InteractionGain(D, 0.85) - s * s / 0.85), 1e-12);
  // |[c I, ..., c I]|^2 = 999 c^2.
  EXPECT_NEAR(InteractionGain(D, 1.0), 999 * 4e-10, 1e-18);
}

TEST(Phase2, EigenvalueAndCornerOracles) {
  SynthesisProblem p;
  p.dict = Dictionary::Build(2, 1);
  p.initial = {SetKind::kInitial, {MakeBox({-1, -1}, {1, 1})}};
  p.unsafe = {SetKind::kUnsafe, {MakeBox({2, 2}, {3, 3})}};
  LevelSets ls = Phase2(p, Eigen::MatrixXd::Identity(2, 2), SynthConfig{});
  EXPECT_NEAR(ls.gamma, 2.0, 1e-5);
  EXPECT_NEAR(ls.beta, 8.0, 1e-5);
  EXPECT_GE(ls.gamma, 2.0 - 1e-7);  // upper bound from a feasible point
  EXPECT_LE(ls.beta, 8.0 + 1e-7);
  for (const auto& w : ls.witnesses) EXPECT_TRUE(RecheckWitness(w).ok()) << w.label;

  Eigen::MatrixXd c = Eigen::Vector2d(0.5, 0.25).asDiagonal();
  ls = Phase2(p, c, SynthConfig{});
  EXPECT_NEAR(ls.phi, 2.0, 1e-8);
  EXPECT_LE(ls.phi, 2.0);

  // Several unsafe boxes: the smallest lower bound wins.
  p.unsafe.boxes.push_back(MakeBox({-3, 1}, {-2, 2}));
  ls = Phase2(p, Eigen::MatrixXd::Identity(2, 2), SynthConfig{});
  EXPECT_NEAR(ls.beta, 5.0, 1e-5);

  EXPECT_THROW(Phase2(p, Eigen::Vector2d(1.0, 1e-10).asDiagonal().toDenseMatrix(), SynthConfig{}),
               std::invalid_argument);
}

TEST(Phase1, ScalarNoiseFreeHandInstance) {
  SubsystemModel m;
  m.name = "scalar";
  m.monomials = Dictionary(1, {Monomial({1})});
  m.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  m.B = Eigen::MatrixXd::Identity(1, 1);
  m.coupling = Eigen::MatrixXd::Zero(1, 1);
  m.dict_degree = 1;
  m.state = {SetKind::kState, {MakeBox({-5}, {5})}};
  m.initial = {SetKind::kInitial, {MakeBox({-1}, {1})}};
  m.unsafe = {SetKind::kUnsafe, {MakeBox({3}, {5})}};
  DataConfig c;
  c.samples = 2;
  c.tau = 0.05;
  c.seed = 4;
  SynthesisProblem p{Collect(m, 0, c, nullptr), m.SynthesisDictionary(), Eigen::MatrixXd(1, 0),
                     m.state, m.initial, m.unsafe};
  SynthResult r = Synthesize(p, SynthConfig{});
  ASSERT_EQ(r.status, SynthStatus::kOk) << r.message;
  EXPECT_EQ(r.cert.H.degree(), 0);
  EXPECT_DOUBLE_EQ(r.cert.eps, 0.99);
  EXPECT_EQ(r.cert.rho, 0.0);
  EXPECT_LE(EqualityResidual(p.data.N0, p.dict, r.cert.H, r.cert.C), 1e-8);
  // Closed loop x' = -x + nu(x) decays: 2 P x x' <= -eps P x^2.
  for (double x = -5; x <= 5; x += 0.25) {
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
    const double lie = 2 * r.cert.P(0, 0) * x * (-x + Eval(r.cert.controller, 0, xv));
    EXPECT_LE(lie, -r.cert.eps * r.cert.Barrier(xv) + 1e-9) << x;
  }
}

TEST(Phase1, RejectsRankDeficientData) {
  SynthesisProblem p = ProblemFor(Benchmark("duffing_ring", 4), 1, 3);
  p.data.rank_ok = false;
  EXPECT_THROW(Phase1(p, SynthConfig{}), std::invalid_argument);
}

TEST(Phase1, DuffingFeasibleAtLargestRate) {
  const DuffingFixture& f = Duffing();
  ASSERT_EQ(f.res.status, SynthStatus::kOk) << f.res.message;
  const CsbcCertificate& c = f.res.cert;
  EXPECT_DOUBLE_EQ(c.eps, 0.99);
  EXPECT_GT(c.beta, c.gamma);
  EXPECT_GT(c.pi, 1e-6);
  EXPECT_LE(f.seconds, 60.0);
  EXPECT_NEAR(c.rho, 0.01 / c.pi, 1e-15);
  EXPECT_LE(EqualityResidual(f.prob.data.N0, f.prob.dict, c.H, c.C), 1e-8);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.C);
  EXPECT_GE(es.eigenvalues().minCoeff(), 1e-3 * (1 - 1e-6));
  for (const auto& w : c.gram_witnesses) {
    const GramCheck g = RecheckWitness(w);
    EXPECT_LE(g.residual, 1e-6) << w.label;
    EXPECT_GE(g.min_eigenvalue, -1e-8) << w.label;
  }
}

TEST(Phase1, FeasibilityIsMonotoneInRate) {
  const DuffingFixture& f = Duffing();
  EXPECT_TRUE(Phase1AtEps(f.prob, 0.5, SynthConfig{}).feasible);
}

TEST(Certificate, SampledSchurComplementAndLowerBound) {
  const DuffingFixture& f = Duffing();
  const CsbcCertificate& c = f.res.cert;
  const PolyMatrix m = DissipationMatrix(f.prob, c.eps, c.C, c.H, c.pi, c.mu);
  std::mt19937_64 rng(5);
  const Box& box = f.prob.state.boxes[0];
  double worst = 1e300, worst_phi = 1e300;
  for (int k = 0; k < 10000; ++k) {
    const Eigen::VectorXd x = RandomIn(rng, box);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.Evaluate(x), Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff());
    worst_phi = std::min(worst_phi, c.Barrier(x) - c.phi * x.squaredNorm());
  }
  EXPECT_GE(worst, -1e-6);
  EXPECT_GE(worst_phi, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(c.P);
  EXPECT_LE(c.phi, ep.eigenvalues().minCoeff());
}

TEST(Controller, ShapeAndZeroCase) {
  const NetworkSpec s = Benchmark("lorenz_ring", 4);
  SynthesisProblem p = ProblemFor(s, 1, 1);
  SynthResult r = Synthesize(p, SynthConfig{});
  ASSERT_EQ(r.status, SynthStatus::kOk) << r.message;
  ASSERT_EQ(r.cert.controller.size(), 3u);
  int max_deg = 0;
  bool has_linear = false;
  for (const auto& u : r.cert.controller) {
    max_deg = std::max(max_deg, u.degree());
    for (const auto& [mono, coef] : u.terms()) has_linear |= mono.degree() == 1;
  }
  EXPECT_EQ(max_deg, 2);
  EXPECT_TRUE(has_linear);

  PolyMatrix zero(p.data.T(), 3, 3);
  for (const auto& u : ExtractController(p.data.U0, zero, Eigen::MatrixXd::Identity(3, 3)))
    EXPECT_TRUE(u.is_zero());
  EXPECT_THROW(ExtractController(p.data.U0, zero, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST(Certificate, JsonRoundTripAndRebind) {
  const CsbcCertificate& c = Duffing().res.cert;
  nlohmann::json j = c;
  EXPECT_TRUE(j.contains("gram_summary"));
  CsbcCertificate back = nlohmann::json::parse(j.dump()).get<CsbcCertificate>();
  EXPECT_EQ(back.C, c.C);
  EXPECT_EQ(back.gamma, c.gamma);
  EXPECT_EQ(back.controller.size(), c.controller.size());
  const Eigen::Vector2d x(0.3, -1.7);
  EXPECT_EQ(back.H.Evaluate(x), c.H.Evaluate(x));
  for (const auto& w : back.gram_witnesses) EXPECT_TRUE(RecheckWitness(w).ok());

  CsbcCertificate r = Rebind(c, Eigen::MatrixXd(2, 0));
  EXPECT_EQ(r.rho, 0.0);
  EXPECT_EQ(r.gamma, c.gamma);
}

TEST(SynthConfig, ValidationAndJson) {
  SynthConfig c;
  c.eps_grid = {0.5, 0.9};
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c.eps_grid = {0.9, -0.1};
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = SynthConfig{};
  c.c_max = 0.5;
  nlohmann::json j = c;
  SynthConfig back = j.get<SynthConfig>();
  EXPECT_EQ(back.c_max, 0.5);
  EXPECT_EQ(back.eps_grid, c.eps_grid);
}

}  // namespace
}  // namespace certnet
