#include "certnet/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace certnet {
namespace {

Eigen::VectorXd SampleIn(std::mt19937_64& rng, const SetSpec& s) {
  if (s.boxes.empty()) throw std::invalid_argument("cannot sample an empty set");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box& b = s.boxes[std::uniform_int_distribution<std::size_t>(0, s.boxes.size() - 1)(rng)];
  Eigen::VectorXd x(b.dim());
  for (int k = 0; k < b.dim(); ++k) x[k] = b.lo[k] + (b.hi[k] - b.lo[k]) * u(rng);
  return x;
}

std::vector<Eigen::VectorXd> Corners(const SetSpec& s) {
  std::vector<Eigen::VectorXd> out;
  for (const Box& b : s.boxes) {
    const int n = b.dim();
    for (int mask = 0; mask < (1 << n); ++mask) {
      Eigen::VectorXd x(n);
      for (int k = 0; k < n; ++k) x[k] = (mask >> k & 1) ? b.hi[k] : b.lo[k];
      out.push_back(std::move(x));
    }
  }
  return out;
}

bool InBox(const Box& b, const double* x) {
  for (int k = 0; k < b.dim(); ++k)
    if (x[k] < b.lo[k] || x[k] > b.hi[k]) return false;
  return true;
}

double Margin(double slack, double scale) { return slack / (1.0 + std::abs(scale)); }

}  // namespace

double CsbcMargins::worst() const { return std::min({lower_bound, initial, unsafe, dissipation}); }

std::vector<SetSpec> NeighborStates(const NetworkSpec& spec, int i) {
  std::vector<SetSpec> out;
  for (int j : Neighbors(spec, i)) out.push_back(spec.model(j).state);
  return out;
}

CsbcMargins CheckCsbc(const SubsystemModel& m, const CsbcCertificate& cert,
                      const std::vector<SetSpec>& neighbor_states, int samples, std::uint64_t seed) {
  if (cert.n() != m.n()) throw std::invalid_argument("certificate and model dimensions differ");
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const Eigen::MatrixXd D = m.CouplingMatrix(static_cast<int>(neighbor_states.size()));
  CompiledPolyVector ctrl(cert.controller);
  std::mt19937_64 rng(seed);
  CsbcMargins r;
  r.samples = samples;
  auto init = [&](const Eigen::VectorXd& x) {
    const double b = cert.Barrier(x);
    r.initial = std::min(r.initial, Margin(cert.gamma - b, std::max(cert.gamma, b)));
  };
  for (const auto& c : Corners(m.initial)) init(c);
  Eigen::VectorXd nu(m.m()), w(D.cols());
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = SampleIn(rng, m.state);
    const double b = cert.Barrier(x);
    const double floor = cert.phi * x.squaredNorm();
    r.lower_bound = std::min(r.lower_bound, Margin(b - floor, std::max(b, floor)));

    init(SampleIn(rng, m.initial));

    const Eigen::VectorXd xu = SampleIn(rng, m.unsafe);
    const double bu = cert.Barrier(xu);
    r.unsafe = std::min(r.unsafe, Margin(bu - cert.beta, std::max(bu, cert.beta)));

    for (int k = 0, off = 0; k < static_cast<int>(neighbor_states.size()); ++k) {
      const Eigen::VectorXd xj = SampleIn(rng, neighbor_states[k]);
      w.segment(off, xj.size()) = xj;
      off += static_cast<int>(xj.size());
    }
    ctrl.Evaluate(x.data(), nu.data());
    const double lie = 2.0 * (cert.P * x).dot(m.Deriv(x, nu, w));
    const double decay = cert.eps * b;
    const double gain = cert.rho * w.squaredNorm();
    r.dissipation = std::min(r.dissipation, Margin(gain - decay - lie, std::abs(lie) + decay + gain));
  }
  return r;
}

void DecayMonitor::Observe(double t, double b) {
  if (samples_++ == 0) b0_ = b;
  const double excess = b - (1.01 * std::exp(-eps_ * t) * b0_ + 1e-6);
  worst_ = std::max(worst_, excess);
  if (excess > 0 || !std::isfinite(b)) ++violations_;
}

DecayMonitor CheckDecay(const std::vector<double>& times, const std::vector<double>& barrier, double eps) {
  if (times.size() != barrier.size()) throw std::invalid_argument("time and barrier lengths differ");
  DecayMonitor mon(eps);
  for (std::size_t k = 0; k < times.size(); ++k) mon.Observe(times[k], barrier[k]);
  return mon;
}

SafetyMonitor::SafetyMonitor(std::vector<const SetSpec*> unsafe) : sets_(std::move(unsafe)) {
  offset_.push_back(0);
  for (const SetSpec* s : sets_) {
    if (!s || s->boxes.empty()) throw std::invalid_argument("unsafe set has no boxes");
    offset_.push_back(offset_.back() + s->boxes.front().dim());
  }
  first_.assign(sets_.size(), std::nullopt);
}

SafetyMonitor::SafetyMonitor(const NetworkSpec& spec) : SafetyMonitor([&] {
    std::vector<const SetSpec*> v;
    for (int i = 0; i < spec.Q; ++i) v.push_back(&spec.model(i).unsafe);
    return v;
  }()) {}

void SafetyMonitor::Observe(double t, const Eigen::VectorXd& x) {
  if (x.size() != offset_.back()) throw std::invalid_argument("state size does not match the sets");
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (first_[i]) continue;
    const double* xi = x.data() + offset_[i];
    for (const Box& b : sets_[i]->boxes)
      if (InBox(b, xi)) {
        first_[i] = t;
        ++count_;
        break;
      }
  }
}

std::vector<std::optional<double>> CheckSafety(const Trajectory& tr, const std::vector<SetSpec>& unsafe) {
  std::vector<const SetSpec*> ptr;
  for (const auto& s : unsafe) ptr.push_back(&s);
  SafetyMonitor mon(ptr);
  for (std::size_t k = 0; k < tr.times.size(); ++k) mon.Observe(tr.times[k], tr.states.row(k).transpose());
  return mon.first_violation();
}

WitnessReport RecheckWitnesses(const CsbcCertificate& cert) {
  WitnessReport r;
  for (const auto& w : cert.gram_witnesses) {
    const GramCheck c = RecheckWitness(w);
    ++r.count;
    if (!c.ok()) ++r.failed;
    r.max_residual = std::max(r.max_residual, c.residual);
    r.min_eigenvalue = std::min(r.min_eigenvalue, c.min_eigenvalue);
  }
  r.equality_residual = EqualityResidual(cert.N0, cert.dict, cert.H, cert.C);
  r.ok = r.count > 0 && r.failed == 0 && r.equality_residual <= 1e-8;
  return r;
}

SimReport SimulateNetwork(const Network& net, const NetworkCbc* cbc, const SimConfig& cfg) {
  if (cfg.runs < 0 || cfg.record_stride < 1) throw std::invalid_argument("invalid simulation settings");
  for (int i : cfg.record)
    if (i < 0 || i >= net.Q()) throw std::out_of_range("recorded subsystem out of range");
  const bool closed = cbc && !cfg.open_loop;
  const NetworkSpec& spec = net.spec();
  std::mt19937_64 rng(cfg.seed);
  SimReport rep;
  int rec_cols = 0;
  for (int i : cfg.record) rec_cols += net.n(i);

  auto f = [&](double, const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::VectorXd& dx) {
    net.Deriv(x, u, dx);
  };
  InputLaw law;
  if (closed) law = [&](double, const Eigen::VectorXd& x, Eigen::VectorXd& u) { cbc->Control(x, u); };

  for (int run = 0; run < cfg.runs; ++run) {
    Eigen::VectorXd x0(net.dim());
    for (int i = 0; i < net.Q(); ++i) x0.segment(net.state_offset(i), net.n(i)) = SampleIn(rng, spec.model(i).initial);
    SafetyMonitor safety(spec);
    DecayMonitor decay(cbc ? cbc->eps() : 0.0);
    std::vector<double> rec_t;
    std::vector<double> rec_x;
    int step = 0;
    auto obs = [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
      safety.Observe(t, x);
      if (cbc) decay.Observe(t, cbc->Value(x));
      if (run == 0 && rec_cols > 0 && step % cfg.record_stride == 0) {
        rec_t.push_back(t);
        for (int i : cfg.record)
          for (int k = 0; k < net.n(i); ++k) rec_x.push_back(x[net.state_offset(i) + k]);
      }
      ++step;
      return true;
    };
    IntegrateResult res = Integrate(f, law, net.input_dim(), x0, cfg.t_end, cfg.dt, obs);
    RunReport rr;
    rr.b0 = cbc ? cbc->Value(x0) : 0.0;
    rr.unsafe_subsystems = safety.unsafe_count();
    for (const auto& v : safety.first_violation())
      if (v && (!rr.first_violation || *v < *rr.first_violation)) rr.first_violation = v;
    rr.decay_violations = decay.violations();
    rr.decay_worst_excess = decay.samples() ? decay.worst_excess() : 0.0;
    rr.blew_up = res.blew_up;
    rep.unsafe_runs += rr.unsafe_subsystems > 0;
    rep.decay_violations += rr.decay_violations;
    rep.any_blew_up = rep.any_blew_up || rr.blew_up;
    rep.runs.push_back(rr);
    if (run == 0) {
      rep.recorded.times = rec_t;
      rep.recorded.states = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          rec_x.data(), static_cast<Eigen::Index>(rec_t.size()), rec_cols);
      rep.recorded.blew_up = res.blew_up;
    }
  }
  return rep;
}

bool VerifyReport::pass() const {
  for (const auto& t : templates)
    if (!t.margins.ok() || !t.witnesses.ok) return false;
  if (compose && !compose->pass) return false;
  if (simulation && (!simulation->safe() || simulation->decay_violations > 0)) return false;
  return true;
}

void to_json(nlohmann::json& j, const CsbcMargins& m) {
  j = {{"lower_bound", m.lower_bound},
       {"initial", m.initial},
       {"unsafe", m.unsafe},
       {"dissipation", m.dissipation},
       {"samples", m.samples},
       {"pass", m.ok()}};
}

void to_json(nlohmann::json& j, const WitnessReport& w) {
  j = {{"count", w.count},
       {"failed", w.failed},
       {"max_residual", w.max_residual},
       {"min_eigenvalue", w.min_eigenvalue},
       {"equality_residual", w.equality_residual},
       {"pass", w.ok}};
}

void to_json(nlohmann::json& j, const SimReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& rr : r.runs) {
    nlohmann::json o = {{"b0", rr.b0},
                        {"unsafe_subsystems", rr.unsafe_subsystems},
                        {"decay_violations", rr.decay_violations},
                        {"decay_worst_excess", rr.decay_worst_excess},
                        {"blew_up", rr.blew_up}};
    o["first_violation"] = rr.first_violation ? nlohmann::json(*rr.first_violation) : nlohmann::json(nullptr);
    runs.push_back(std::move(o));
  }
  j = {{"runs", static_cast<int>(r.runs.size())},
       {"unsafe_runs", r.unsafe_runs},
       {"decay_violations", r.decay_violations},
       {"blew_up", r.any_blew_up},
       {"safe", r.safe()},
       {"per_run", std::move(runs)}};
}

void to_json(nlohmann::json& j, const VerifyReport& r) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& v : r.templates) t.push_back({{"name", v.name}, {"conditions", v.margins}, {"witnesses", v.witnesses}});
  j = {{"pass", r.pass()}, {"templates", std::move(t)}};
  if (r.compose) j["compose"] = *r.compose;
  if (r.simulation) j["simulation"] = *r.simulation;
}

}  // namespace certnet
