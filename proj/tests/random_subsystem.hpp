#pragma once

#include <array>
#include <cmath>
#include <random>
#include <utility>

#include "certnet/data.hpp"

namespace certnet {

// Random polynomial subsystem with n <= 3 and a full dictionary of at most 9
// monomials.  Linear terms are always present; higher ones with probability 1/2.
inline SubsystemModel RandomSubsystem(std::mt19937_64& rng, bool coupled) {
  static constexpr std::array<std::pair<int, int>, 9> kShapes = {
      {{1, 1}, {1, 2}, {1, 3}, {1, 4}, {2, 1}, {2, 2}, {2, 3}, {3, 1}, {3, 2}}};
  std::normal_distribution<double> g;
  const auto [n, deg] = kShapes[rng() % kShapes.size()];
  const Dictionary full = Dictionary::Build(n, deg);
  std::vector<Monomial> keep;
  for (const Monomial& mono : full.monomials())
    if (mono.degree() == 1 || rng() % 2 == 0) keep.push_back(mono);

  SubsystemModel m;
  m.name = "random";
  m.monomials = Dictionary(n, keep);
  m.A = Eigen::MatrixXd::Zero(n, m.monomials.size());
  for (int k = 0; k < m.monomials.size(); ++k)
    for (int r = 0; r < n; ++r) m.A(r, k) = (m.monomials[k].degree() == 1 ? 0.3 : 0.2) * g(rng);
  for (int r = 0; r < n; ++r) m.A(r, m.monomials.IndexOf(Monomial::Var(n, r))) -= 1.0;
  const int inputs = 1 + static_cast<int>(rng() % n);
  m.B = Eigen::MatrixXd::NullaryExpr(n, inputs, [&]() { return g(rng); });
  m.coupling = coupled ? Eigen::MatrixXd(Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return 0.1 * g(rng); }))
                       : Eigen::MatrixXd::Zero(n, n);
  m.dict_degree = deg;
  m.state = {SetKind::kState, {{Eigen::VectorXd::Constant(n, -2), Eigen::VectorXd::Constant(n, 2)}}};
  m.initial = {SetKind::kInitial, {{Eigen::VectorXd::Constant(n, -0.5), Eigen::VectorXd::Constant(n, 0.5)}}};
  m.unsafe = {SetKind::kUnsafe, {{Eigen::VectorXd::Constant(n, 1.5), Eigen::VectorXd::Constant(n, 2)}}};
  m.Validate();
  return m;
}

// T = N + 1 one-sample experiments.  The coupled case feeds one neighbor a
// smooth signal and adds bounded noise.
inline TrajectoryData RandomSubsystemData(const SubsystemModel& m, bool noisy, std::uint64_t seed) {
  DataConfig c;
  c.samples = m.SynthesisDictionary().size() + 1;
  c.experiments = c.samples;
  c.tau = 0.05;
  c.noise_bound = noisy ? 1e-2 : 0.0;
  c.seed = seed;
  const int n = m.n();
  NeighborSignal w = [n](double t) {
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = std::sin((k + 1) * 3.0 * t);
    return v;
  };
  return Collect(m, noisy ? 1 : 0, c, noisy ? w : NeighborSignal{});
}

}  // namespace certnet
