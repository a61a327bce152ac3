#include "certnet/data.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "certnet/json_util.hpp"

namespace certnet {

void DataConfig::Validate(int dict_size) const {
  if (samples < dict_size + 1)
    throw std::invalid_argument("need T >= N + 1 samples for a full-row-rank data matrix (T = " +
                                std::to_string(samples) + ", N = " + std::to_string(dict_size) + ")");
  if (!(tau > 0)) throw std::invalid_argument("sampling interval must be positive");
  if (!(noise_bound >= 0)) throw std::invalid_argument("noise bound must be nonnegative");
  if (!(dt > 0) || dt > tau) throw std::invalid_argument("integrator step must lie in (0, tau]");
  if (!(input_amplitude >= 0)) throw std::invalid_argument("input amplitude must be nonnegative");
  if (experiments < 1 || experiments > samples)
    throw std::invalid_argument("experiments must lie in [1, T]");
}

RankReport NumericalRank(const Eigen::MatrixXd& m) {
  RankReport r;
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double thresh = s[0] * static_cast<double>(m.cols()) * 1e-12;
  for (int k = 0; k < s.size(); ++k)
    if (s[k] > thresh) ++r.rank;
  r.full_row_rank = r.rank == m.rows();
  return r;
}

Eigen::MatrixXd BuildN0(const Eigen::MatrixXd& X0, const Dictionary& d, RankReport* report) {
  Eigen::MatrixXd n0(d.size(), X0.cols());
  for (int t = 0; t < X0.cols(); ++t) {
    Eigen::VectorXd col = X0.col(t);
    n0.col(t) = d.Evaluate(col);
  }
  if (report) *report = NumericalRank(n0);
  return n0;
}

namespace {

// Uniform on the ball of radius r in R^n.
Eigen::VectorXd BallSample(std::mt19937_64& rng, int n, double r) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = g(rng);
  const double norm = v.norm();
  if (norm == 0.0 || r == 0.0) return Eigen::VectorXd::Zero(n);
  return v * (r * std::pow(u(rng), 1.0 / n) / norm);
}

Eigen::VectorXd BoxSample(std::mt19937_64& rng, const Box& b, double shrink) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x(b.dim());
  for (int k = 0; k < b.dim(); ++k) x[k] = b.Center()[k] + shrink * b.HalfWidth()[k] * u(rng);
  return x;
}

// Adds noise, the noise bound and N0 to sampled U0, W0, X0 and true X1.
void Finish(TrajectoryData& td, const Dictionary& dict, const DataConfig& cfg, std::mt19937_64& rng) {
  const int n = static_cast<int>(td.X0.rows()), T = static_cast<int>(td.X0.cols());
  td.Gamma.resize(n, T);
  for (int t = 0; t < T; ++t) td.Gamma.col(t) = BallSample(rng, n, std::sqrt(cfg.noise_bound));
  td.X1 += td.Gamma;
  td.Xi = Eigen::MatrixXd::Zero(n, T);
  td.Xi.leftCols(n) = std::sqrt(cfg.noise_bound * T) * Eigen::MatrixXd::Identity(n, n);
  RankReport rep;
  td.N0 = BuildN0(td.X0, dict, &rep);
  td.rank = rep.rank;
  td.rank_ok = rep.full_row_rank;
}

struct SampleBuffers {
  Eigen::MatrixXd U0, W0, X0, X1;
  SampleBuffers(int m, int sigma, int n, int T) : U0(m, T), W0(sigma, T), X0(n, T), X1(n, T) {}
};

}  // namespace

TrajectoryData Collect(const SubsystemModel& m, int num_neighbors, const DataConfig& cfg,
                       const NeighborSignal& w) {
  const Dictionary dict = m.SynthesisDictionary();
  cfg.Validate(dict.size());
  const int n = m.n(), nu = m.m(), sigma = num_neighbors * static_cast<int>(m.coupling.cols());
  const int T = cfg.samples, sub = static_cast<int>(std::llround(cfg.tau / cfg.dt));
  std::uniform_real_distribution<double> ua(-cfg.input_amplitude, cfg.input_amplitude);
  TrajectoryData best;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    std::mt19937_64 rng(cfg.seed + 7919ULL * attempt);
    SampleBuffers buf(nu, sigma, n, T);
    const int per = cfg.SamplesPerExperiment();
    Eigen::VectorXd x;
    bool inside = true;
    for (int t = 0; t < T && inside; ++t) {
      if (t % per == 0) x = BoxSample(rng, m.state.boxes.front(), cfg.start_shrink);
      const double t0 = t * cfg.tau;
      Eigen::VectorXd u(nu);
      for (int k = 0; k < nu; ++k) u[k] = ua(rng);
      buf.U0.col(t) = u;
      buf.X0.col(t) = x;
      Eigen::VectorXd wt = sigma ? w(t0) : Eigen::VectorXd();
      buf.W0.col(t) = wt;
      buf.X1.col(t) = m.Deriv(x, u, wt);
      if (t + 1 == T || (t + 1) % per == 0) continue;
      OdeRhs f = [&](double s, const Eigen::VectorXd& xs, const Eigen::VectorXd&, Eigen::VectorXd& dx) {
        dx = m.Deriv(xs, u, sigma ? w(t0 + s) : Eigen::VectorXd());
      };
      auto res = Integrate(f, nullptr, 0, x, sub * cfg.dt, cfg.dt, nullptr);
      x = res.final_state;
      inside = !res.blew_up && m.state.Contains(x);
    }
    if (!inside) continue;
    TrajectoryData td;
    td.U0 = buf.U0;
    td.W0 = buf.W0;
    td.X0 = buf.X0;
    td.X1 = buf.X1;
    td.attempts = attempt + 1;
    Finish(td, dict, cfg, rng);
    if (td.rank_ok) return td;
    best = std::move(td);
  }
  if (best.X0.size() == 0)
    throw std::runtime_error(m.name + ": data left the state set on every attempt");
  throw std::runtime_error(m.name + ": data matrix N0 is rank deficient after retries (rank " +
                           std::to_string(best.rank) + " of " + std::to_string(best.N0.rows()) + ")");
}

TrajectoryData CollectInNetwork(const NetworkSpec& spec, int i, const DataConfig& cfg) {
  Network net(spec);
  const SubsystemModel& m = spec.model(i);
  const Dictionary dict = m.SynthesisDictionary();
  cfg.Validate(dict.size());
  const int T = cfg.samples, sub = static_cast<int>(std::llround(cfg.tau / cfg.dt));
  const int off = net.state_offset(i), n = net.n(i), ioff = net.input_offset(i), nu = net.m(i);
  const std::vector<int> nb = Neighbors(spec, i);
  int sigma = 0;
  for (int j : nb) sigma += net.n(j);
  std::uniform_real_distribution<double> ua(-cfg.input_amplitude, cfg.input_amplitude);
  TrajectoryData best;
  bool any_inside = false;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    std::mt19937_64 rng(cfg.seed + 7919ULL * attempt);
    Eigen::VectorXd x(net.dim()), u(net.input_dim());
    auto restart = [&]() {
      for (int j = 0; j < net.Q(); ++j) {
        const Box& b = j == i ? spec.model(j).state.boxes.front() : spec.model(j).initial.boxes.front();
        x.segment(net.state_offset(j), net.n(j)) = BoxSample(rng, b, j == i ? cfg.start_shrink : 1.0);
      }
    };
    const int per = cfg.SamplesPerExperiment();
    SampleBuffers buf(nu, sigma, n, T);
    OdeRhs f = [&](double, const Eigen::VectorXd& xs, const Eigen::VectorXd& us, Eigen::VectorXd& dx) {
      net.Deriv(xs, us, dx);
    };
    InputLaw hold = [&](double, const Eigen::VectorXd&, Eigen::VectorXd& out) { out = u; };
    bool inside = true;
    for (int t = 0; t < T && inside; ++t) {
      if (t % per == 0) restart();
      for (int k = 0; k < u.size(); ++k) u[k] = ua(rng);
      Eigen::VectorXd dx;
      net.Deriv(x, u, dx);
      buf.U0.col(t) = u.segment(ioff, nu);
      buf.X0.col(t) = x.segment(off, n);
      buf.W0.col(t) = net.InternalInput(i, x);
      buf.X1.col(t) = dx.segment(off, n);
      if (t + 1 == T || (t + 1) % per == 0) continue;
      auto res = Integrate(f, hold, net.input_dim(), x, sub * cfg.dt, cfg.dt, nullptr);
      x = res.final_state;
      inside = !res.blew_up && m.state.Contains(x.segment(off, n));
    }
    if (!inside) continue;
    any_inside = true;
    TrajectoryData td;
    td.U0 = buf.U0;
    td.W0 = buf.W0;
    td.X0 = buf.X0;
    td.X1 = buf.X1;
    td.attempts = attempt + 1;
    Finish(td, dict, cfg, rng);
    if (td.rank_ok) return td;
    best = std::move(td);
  }
  if (!any_inside) throw std::runtime_error(m.name + ": data left the state set on every attempt");
  throw std::runtime_error(m.name + ": data matrix N0 is rank deficient after retries (rank " +
                           std::to_string(best.rank) + " of " + std::to_string(best.N0.rows()) + ")");
}

PolyMatrix RightInverseTransform(const TrajectoryData& td, const Dictionary& d) {
  Eigen::MatrixXd pinv = td.N0.completeOrthogonalDecomposition().pseudoInverse();
  // One refinement step on N0 * pinv = I.
  const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(td.N0.rows(), td.N0.rows()) - td.N0 * pinv;
  pinv += pinv * e;
  return pinv * d.Factorize();
}

double VerifyLemma1(const SubsystemModel& m, const TrajectoryData& td, const PolyMatrix& S,
                    int num_samples, std::uint64_t seed, bool include_noise) {
  const Dictionary dict = m.SynthesisDictionary();
  const PolyMatrix ups = dict.Factorize();
  const int n = m.n();
  // Precondition: N0 S(x) = Upsilon(x) symbolically.
  PolyMatrix diff = td.N0 * S - ups;
  double worst_id = 0.0;
  for (int r = 0; r < diff.rows(); ++r)
    for (int c = 0; c < diff.cols(); ++c)
      for (const auto& [mono, coef] : diff(r, c).terms()) worst_id = std::max(worst_id, std::abs(coef));
  if (worst_id > 1e-6) throw std::invalid_argument("S does not satisfy N0 S(x) = Upsilon(x)");

  Eigen::MatrixXd a_dict = Eigen::MatrixXd::Zero(n, dict.size());
  for (int k = 0; k < m.monomials.size(); ++k) a_dict.col(dict.IndexOf(m.monomials[k])) = m.A.col(k);
  const int sigma = static_cast<int>(td.W0.rows());
  const int nn = m.coupling.cols() ? sigma / static_cast<int>(m.coupling.cols()) : 0;
  Eigen::MatrixXd lhs_data = td.X1 - m.CouplingMatrix(nn) * td.W0;
  if (include_noise) lhs_data -= td.Gamma;

  std::mt19937_64 rng(seed);
  const Box& box = m.state.boxes.front();
  double worst = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    Eigen::VectorXd x = BoxSample(rng, box, 1.0);
    Eigen::MatrixXd sx = S.Evaluate(x);
    Eigen::MatrixXd r = a_dict * ups.Evaluate(x) + m.B * (td.U0 * sx) - lhs_data * sx;
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

void to_json(nlohmann::json& j, const TrajectoryData& td) {
  j = {{"U0", MatrixToJson(td.U0)}, {"W0", MatrixToJson(td.W0)},       {"X0", MatrixToJson(td.X0)},
       {"X1", MatrixToJson(td.X1)}, {"Gamma", MatrixToJson(td.Gamma)}, {"Xi", MatrixToJson(td.Xi)},
       {"N0", MatrixToJson(td.N0)}, {"rank_ok", td.rank_ok},           {"rank", td.rank},
       {"attempts", td.attempts}};
}

void from_json(const nlohmann::json& j, TrajectoryData& td) {
  td.U0 = MatrixFromJson(j.at("U0"));
  td.W0 = MatrixFromJson(j.at("W0"));
  td.X0 = MatrixFromJson(j.at("X0"));
  td.X1 = MatrixFromJson(j.at("X1"));
  td.Gamma = MatrixFromJson(j.at("Gamma"));
  td.Xi = MatrixFromJson(j.at("Xi"));
  td.N0 = MatrixFromJson(j.at("N0"));
  td.rank_ok = j.at("rank_ok").get<bool>();
  td.rank = j.at("rank").get<int>();
  td.attempts = j.value("attempts", 1);
}

}  // namespace certnet
