#include "certnet/plant.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "certnet/json_util.hpp"

namespace certnet {

std::vector<Polynomial> SubsystemModel::DriftPolys() const {
  const int nv = monomials.num_vars();
  std::vector<Polynomial> out;
  for (int r = 0; r < n(); ++r) {
    Polynomial p(nv);
    for (int k = 0; k < monomials.size(); ++k)
      if (A(r, k) != 0.0) p.AddTerm(monomials[k], A(r, k));
    out.push_back(std::move(p));
  }
  return out;
}

Eigen::MatrixXd SubsystemModel::CouplingMatrix(int num_neighbors) const {
  Eigen::MatrixXd d(n(), coupling.cols() * num_neighbors);
  for (int k = 0; k < num_neighbors; ++k) d.middleCols(k * coupling.cols(), coupling.cols()) = coupling;
  return d;
}

Eigen::VectorXd SubsystemModel::Deriv(const Eigen::VectorXd& x, const Eigen::VectorXd& nu,
                                      const Eigen::VectorXd& w) const {
  if (x.size() != n() || nu.size() != m() || w.size() % coupling.cols() != 0)
    throw std::invalid_argument("subsystem derivative: dimension mismatch");
  Eigen::VectorXd dx = A * monomials.Evaluate(x) + B * nu;
  for (int k = 0; k < w.size() / coupling.cols(); ++k)
    dx += coupling * w.segment(k * coupling.cols(), coupling.cols());
  return dx;
}

Eigen::VectorXd SubsystemModel::DerivFactored(const Eigen::VectorXd& x, const Eigen::VectorXd& nu,
                                              const Eigen::VectorXd& w) const {
  if (x.size() != n() || nu.size() != m() || w.size() % coupling.cols() != 0)
    throw std::invalid_argument("subsystem derivative: dimension mismatch");
  // A expressed over the synthesis dictionary, then A_dict Upsilon(x) x.
  Dictionary dict = SynthesisDictionary();
  Eigen::MatrixXd a_dict = Eigen::MatrixXd::Zero(n(), dict.size());
  for (int k = 0; k < monomials.size(); ++k) a_dict.col(dict.IndexOf(monomials[k])) = A.col(k);
  Eigen::VectorXd dx = a_dict * (dict.Factorize().Evaluate(x) * x) + B * nu;
  dx += CouplingMatrix(static_cast<int>(w.size() / coupling.cols())) * w;
  return dx;
}

void SubsystemModel::Validate() const {
  if (A.cols() != monomials.size() || monomials.num_vars() != n())
    throw std::invalid_argument(name + ": A does not match the monomial vector");
  if (B.rows() != n()) throw std::invalid_argument(name + ": B row count mismatch");
  if (coupling.rows() != n()) throw std::invalid_argument(name + ": coupling row count mismatch");
  if (!SynthesisDictionary().Contains(monomials.monomials()))
    throw std::invalid_argument(name + ": dictionary misses a true monomial");
  for (const SetSpec* s : {&state, &initial, &unsafe}) {
    ValidateSet(*s);
    if (s->boxes.front().dim() != n()) throw std::invalid_argument(name + ": set dimension mismatch");
  }
  if (SetsIntersect(initial, unsafe)) throw std::invalid_argument(name + ": initial set meets unsafe set");
}

Topology TopologyFromString(const std::string& s) {
  if (s == "fully") return Topology::kFully;
  if (s == "ring") return Topology::kRing;
  if (s == "line") return Topology::kLine;
  if (s == "star") return Topology::kStar;
  if (s == "binary") return Topology::kBinary;
  if (s == "custom") return Topology::kCustom;
  throw std::invalid_argument("unknown topology: " + s);
}

std::string ToString(Topology t) {
  switch (t) {
    case Topology::kFully: return "fully";
    case Topology::kRing: return "ring";
    case Topology::kLine: return "line";
    case Topology::kStar: return "star";
    case Topology::kBinary: return "binary";
    case Topology::kCustom: return "custom";
  }
  return "?";
}

std::vector<int> Neighbors(const NetworkSpec& spec, int i) {
  const int q = spec.Q;
  if (i < 0 || i >= q) throw std::out_of_range("subsystem index out of range");
  switch (spec.topology) {
    case Topology::kFully: {
      std::vector<int> v;
      for (int j = 0; j < q; ++j)
        if (j != i) v.push_back(j);
      return v;
    }
    case Topology::kRing:
      if (q == 1) return {};
      return {i == 0 ? q - 1 : i - 1};
    case Topology::kLine:
      if (i == 0) return {};
      return {i - 1};
    case Topology::kStar:
      if (i == 0) return {};
      return {0};
    case Topology::kBinary:
      if (i == 0) return {};
      return {(i - 1) / 2};
    case Topology::kCustom: {
      std::vector<int> v = spec.custom_in.at(i);
      std::sort(v.begin(), v.end());
      return v;
    }
  }
  return {};
}

int NumNeighbors(const NetworkSpec& spec, int i) {
  switch (spec.topology) {
    case Topology::kFully: return spec.Q - 1;
    case Topology::kRing: return spec.Q > 1 ? 1 : 0;
    case Topology::kCustom: return static_cast<int>(spec.custom_in.at(i).size());
    default: return i == 0 ? 0 : 1;
  }
}

void NetworkSpec::Validate() const {
  if (Q < 1) throw std::invalid_argument("network needs at least one subsystem");
  if (templates.empty()) throw std::invalid_argument("network has no subsystem model");
  if (!template_of.empty() && static_cast<int>(template_of.size()) != Q)
    throw std::invalid_argument("template map length differs from Q");
  for (const auto& t : templates) t.Validate();
  for (int t : template_of)
    if (t < 0 || t >= static_cast<int>(templates.size()))
      throw std::invalid_argument("template index out of range");
  if (topology == Topology::kCustom) {
    if (static_cast<int>(custom_in.size()) != Q) throw std::invalid_argument("custom adjacency size differs from Q");
    for (int i = 0; i < Q; ++i)
      for (int j : custom_in[i])
        if (j < 0 || j >= Q || j == i) throw std::invalid_argument("invalid custom edge");
  }
  // Every edge j -> i needs D_ij of width n_j.
  if (templates.size() == 1 || topology == Topology::kFully) {
    for (const auto& t : templates)
      if (t.coupling.cols() != templates[0].n())
        throw std::invalid_argument("coupling width does not match neighbor dimension");
  } else {
    for (int i = 0; i < Q; ++i)
      for (int j : Neighbors(*this, i))
        if (model(i).coupling.cols() != model(j).n())
          throw std::invalid_argument("coupling width does not match neighbor dimension");
  }
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.Validate();
  const int q = spec_.Q;
  state_off_.assign(q + 1, 0);
  input_off_.assign(q + 1, 0);
  nbrs_.resize(q);
  for (int i = 0; i < q; ++i) {
    state_off_[i + 1] = state_off_[i] + spec_.model(i).n();
    input_off_[i + 1] = input_off_[i] + spec_.model(i).m();
    if (spec_.topology != Topology::kFully) nbrs_[i] = Neighbors(spec_, i);
  }
  for (const auto& t : spec_.templates) drift_.emplace_back(t.DriftPolys());
  for (const auto& t : spec_.templates)
    if (t.n() != spec_.templates[0].n()) uniform_coupling_ = false;
  if (spec_.topology == Topology::kFully && !uniform_coupling_)
    throw std::invalid_argument("fully connected networks need equal subsystem dimensions");
}

Eigen::VectorXd Network::InternalInput(int i, const Eigen::VectorXd& x) const {
  std::vector<int> nb = spec_.topology == Topology::kFully ? Neighbors(spec_, i) : nbrs_[i];
  int len = 0;
  for (int j : nb) len += n(j);
  Eigen::VectorXd w(len);
  int off = 0;
  for (int j : nb) {
    w.segment(off, n(j)) = x.segment(state_off_[j], n(j));
    off += n(j);
  }
  return w;
}

void Network::Deriv(const Eigen::VectorXd& x, const Eigen::VectorXd& nu, Eigen::VectorXd& dx) const {
  const int q = spec_.Q;
  dx.resize(dim());
  Eigen::VectorXd total;
  if (spec_.topology == Topology::kFully) {
    total = Eigen::VectorXd::Zero(n(0));
    for (int j = 0; j < q; ++j) total += x.segment(state_off_[j], n(j));
  }
  for (int i = 0; i < q; ++i) {
    const SubsystemModel& mdl = spec_.model(i);
    const int ni = n(i), off = state_off_[i];
    drift_[spec_.TemplateOf(i)].Evaluate(x.data() + off, dx.data() + off);
    auto seg = dx.segment(off, ni);
    seg.noalias() += mdl.B * nu.segment(input_off_[i], m(i));
    if (spec_.topology == Topology::kFully) {
      seg.noalias() += mdl.coupling * (total - x.segment(off, ni));
    } else {
      for (int j : nbrs_[i]) seg.noalias() += mdl.coupling * x.segment(state_off_[j], n(j));
    }
  }
}

Eigen::MatrixXd Network::CouplingBlock(int i, int j) const {
  const auto nb = Neighbors(spec_, i);
  if (std::find(nb.begin(), nb.end(), j) == nb.end()) return Eigen::MatrixXd::Zero(n(i), n(j));
  return spec_.model(i).coupling;
}

IntegrateResult Integrate(const OdeRhs& f, const InputLaw& law, int input_dim,
                          const Eigen::VectorXd& x0, double t_end, double dt,
                          const StepObserver& obs) {
  if (!(dt > 0)) throw std::invalid_argument("integration step must be positive");
  if (!x0.allFinite()) throw std::invalid_argument("initial state is not finite");
  IntegrateResult res;
  res.final_state = x0;
  if (t_end <= 0) return res;
  const int steps = static_cast<int>(std::llround(t_end / dt));
  const int n = static_cast<int>(x0.size());
  Eigen::VectorXd x = x0, u(input_dim), k1(n), k2(n), k3(n), k4(n), tmp(n);
  u.setZero();
  auto rhs = [&](double t, const Eigen::VectorXd& s, Eigen::VectorXd& out) {
    if (law) law(t, s, u);
    f(t, s, u, out);
  };
  if (law) law(0.0, x, u);
  if (obs && !obs(0.0, x, u)) {
    res.stopped = true;
    return res;
  }
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    rhs(t, x, k1);
    tmp = x + 0.5 * dt * k1;
    rhs(t + 0.5 * dt, tmp, k2);
    tmp = x + 0.5 * dt * k2;
    rhs(t + 0.5 * dt, tmp, k3);
    tmp = x + dt * k3;
    rhs(t + dt, tmp, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    res.steps = k + 1;
    if (!x.allFinite()) {
      res.blew_up = true;
      break;
    }
    res.final_state = x;
    if (law) law(t + dt, x, u);
    if (obs && !obs((k + 1) * dt, x, u)) {
      res.stopped = true;
      break;
    }
  }
  return res;
}

Trajectory IntegrateRecord(const OdeRhs& f, const InputLaw& law, int input_dim,
                           const Eigen::VectorXd& x0, double t_end, double dt) {
  Trajectory tr;
  if (t_end <= 0) {
    tr.states.resize(0, x0.size());
    tr.inputs.resize(0, input_dim);
    return tr;
  }
  const int steps = static_cast<int>(std::llround(t_end / dt));
  tr.states.resize(steps + 1, x0.size());
  tr.inputs.resize(steps + 1, input_dim);
  int row = 0;
  auto res = Integrate(f, law, input_dim, x0, t_end, dt,
                       [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
                         tr.times.push_back(t);
                         tr.states.row(row) = x.transpose();
                         tr.inputs.row(row) = u.transpose();
                         ++row;
                         return true;
                       });
  tr.states.conservativeResize(row, Eigen::NoChange);
  tr.inputs.conservativeResize(row, Eigen::NoChange);
  tr.blew_up = res.blew_up;
  return tr;
}

std::string TrajectoryCsv(const Trajectory& tr, const std::vector<std::string>& columns) {
  if (static_cast<int>(columns.size()) != tr.states.cols())
    throw std::invalid_argument("column names do not match the trajectory width");
  std::ostringstream os;
  os << "t";
  for (const auto& c : columns) os << ',' << c;
  os << '\n' << std::setprecision(10);
  for (size_t r = 0; r < tr.times.size(); ++r) {
    os << tr.times[r];
    for (int c = 0; c < tr.states.cols(); ++c) os << ',' << tr.states(r, c);
    os << '\n';
  }
  return os.str();
}

namespace {

Box MakeBox(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  Box b;
  b.lo = Eigen::Map<const Eigen::VectorXd>(std::data(lo), static_cast<int>(lo.size()));
  b.hi = Eigen::Map<const Eigen::VectorXd>(std::data(hi), static_cast<int>(hi.size()));
  return b;
}

Box Cube(int n, double lo, double hi) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(n, lo);
  b.hi = Eigen::VectorXd::Constant(n, hi);
  return b;
}

Monomial Mono(std::vector<int> e) { return Monomial(std::move(e)); }

Dictionary LorenzMonomials() {
  return Dictionary(3, {Mono({1, 0, 0}), Mono({0, 1, 0}), Mono({0, 0, 1}), Mono({1, 0, 1}),
                        Mono({1, 1, 0})});
}

SubsystemModel LorenzTemplate(double coupling) {
  SubsystemModel m;
  m.name = "lorenz";
  m.monomials = LorenzMonomials();
  m.A.resize(3, 5);
  m.A << -10, 10, 0, 0, 0, 28, -1, 0, -1, 0, 0, 0, -8.0 / 3.0, 0, 1;
  m.B = Eigen::MatrixXd::Identity(3, 3);
  m.coupling = coupling * Eigen::MatrixXd::Identity(3, 3);
  m.dict_degree = 2;
  m.state = {SetKind::kState, {Cube(3, -20, 20)}};
  m.initial = {SetKind::kInitial, {Cube(3, -3, 3)}};
  return m;
}

SubsystemModel DuffingTemplate(double coupling) {
  SubsystemModel m;
  m.name = "duffing";
  m.monomials = Dictionary(2, {Mono({1, 0}), Mono({0, 1}), Mono({3, 0})});
  m.A.resize(2, 3);
  m.A << 0, 1, 0, 2, -0.5, -0.01;
  m.B = Eigen::MatrixXd::Identity(2, 2);
  m.coupling = Eigen::MatrixXd::Zero(2, 2);
  m.coupling(1, 0) = coupling;
  m.dict_degree = 3;
  m.state = {SetKind::kState, {Cube(2, -10, 10)}};
  m.initial = {SetKind::kInitial, {Cube(2, -4, 4)}};
  m.unsafe = {SetKind::kUnsafe, {MakeBox({-10, -10}, {-6, -5}), MakeBox({6, 5}, {10, 10})}};
  return m;
}

SubsystemModel HeterogeneousTemplate(const std::string& name, double gain, double coupling) {
  SubsystemModel m;
  m.name = name;
  m.monomials = Dictionary(2, {Mono({1, 0}), Mono({0, 1}), Mono({2, 0})});
  m.A.resize(2, 3);
  m.A << 0, gain, 0, 0, 0, gain;
  m.B = Eigen::MatrixXd::Identity(2, 2);
  m.coupling = coupling * Eigen::MatrixXd::Identity(2, 2);
  m.dict_degree = 2;
  m.state = {SetKind::kState, {Cube(2, -10, 10)}};
  m.initial = {SetKind::kInitial, {Cube(2, -4, 4)}};
  m.unsafe = {SetKind::kUnsafe, {MakeBox({-10, -10}, {-6, -5}), MakeBox({6, 5}, {10, 10})}};
  return m;
}

NetworkSpec Homogeneous(std::string name, int q, Topology topo, SubsystemModel m,
                        BenchmarkDefaults d) {
  NetworkSpec s;
  s.name = std::move(name);
  s.Q = q;
  s.topology = topo;
  s.templates.push_back(std::move(m));
  s.defaults = d;
  return s;
}

const std::vector<std::string> kNames = {"lorenz_fully",  "lorenz_ring",    "spacecraft_line",
                                         "lu_star",       "duffing_ring",   "duffing_binary",
                                         "chen_fully",    "heterogeneous_line"};

}  // namespace

std::vector<std::string> BenchmarkNames() { return kNames; }

NetworkSpec SpacecraftLine(int Q, const Eigen::Vector3d& J) {
  SubsystemModel m;
  m.name = "spacecraft";
  m.monomials = Dictionary(3, {Mono({1, 0, 0}), Mono({0, 1, 0}), Mono({0, 0, 1}), Mono({0, 1, 1}),
                               Mono({1, 0, 1}), Mono({1, 1, 0})});
  m.A = Eigen::MatrixXd::Zero(3, 6);
  m.A(0, 3) = (J[1] - J[2]) / J[0];
  m.A(1, 4) = (J[2] - J[0]) / J[1];
  m.A(2, 5) = (J[0] - J[1]) / J[2];
  m.B = J.cwiseInverse().asDiagonal();
  m.coupling = (4.0 * J.cwiseInverse()).asDiagonal();
  m.dict_degree = 2;
  m.state = {SetKind::kState, {Cube(3, -5, 5)}};
  m.initial = {SetKind::kInitial, {Cube(3, -2, 2)}};
  m.unsafe = {SetKind::kUnsafe,
              {MakeBox({2.5, -5, -5}, {5, -3, -4}), MakeBox({2.5, 4, 2.5}, {5, 5, 5}),
               MakeBox({-5, 4, 2.5}, {-4, 5, 5})}};
  return Homogeneous("spacecraft_line", Q, Topology::kLine, m, {14, 0.75, 0.01, 100.0, 0.5, 14});
}

NetworkSpec Benchmark(const std::string& name) {
  if (name == "lorenz_fully") {
    SubsystemModel m = LorenzTemplate(-2e-5);
    m.unsafe = {SetKind::kUnsafe,
                {MakeBox({-20, -20, 4}, {-4, -15, 20}), MakeBox({8, 11, 4}, {20, 20, 20}),
                 MakeBox({8, 11, -20}, {20, 20, -5})}};
    return Homogeneous(name, 1000, Topology::kFully, m, {15, 0.03, 0.01, 20.0, 0.5, 15});
  }
  if (name == "lorenz_ring") {
    SubsystemModel m = LorenzTemplate(-0.01);
    m.unsafe = {SetKind::kUnsafe,
                {MakeBox({-20, -20, 5}, {-10, -5, 20}), MakeBox({3.5, 15, 5}, {20, 20, 20}),
                 MakeBox({3.5, 15, -20}, {20, 20, -5})}};
    return Homogeneous(name, 2000, Topology::kRing, m, {13, 0.12, 0.01, 20.0, 0.5, 13});
  }
  if (name == "spacecraft_line") return SpacecraftLine(2000, Eigen::Vector3d(20, 15, 10));
  if (name == "lu_star") {
    SubsystemModel m;
    m.name = "lu";
    m.monomials = LorenzMonomials();
    m.A.resize(3, 5);
    m.A << -36, 36, 0, 0, 0, 0, 28, 0, -1, 0, 0, 0, -20, 0, 1;
    m.B = Eigen::MatrixXd::Zero(3, 2);
    m.B(1, 0) = 1;
    m.B(2, 1) = 1;
    m.coupling = -1e-3 * Eigen::MatrixXd::Identity(3, 3);
    m.dict_degree = 2;
    m.state = {SetKind::kState, {Cube(3, -20, 20)}};
    m.initial = {SetKind::kInitial, {Cube(3, -5, 5)}};
    m.unsafe = {SetKind::kUnsafe,
                {MakeBox({-20, -20, 6.5}, {-10, -15, 20}), MakeBox({10, 5.5, 6.5}, {20, 20, 20})}};
    return Homogeneous(name, 2000, Topology::kStar, m, {11, 0.04, 0.005, 20.0, 0.5, 11});
  }
  if (name == "duffing_ring")
    return Homogeneous(name, 2000, Topology::kRing, DuffingTemplate(0.1), {20, 0.18, 0.01, 10.0, 0.5, 20});
  if (name == "duffing_binary")
    return Homogeneous(name, 1023, Topology::kBinary, DuffingTemplate(0.05), {20, 0.08, 0.01, 10.0, 0.5, 20});
  if (name == "chen_fully") {
    SubsystemModel m;
    m.name = "chen";
    m.monomials = LorenzMonomials();
    m.A.resize(3, 5);
    m.A << -35, 35, 0, 0, 0, -7, 28, 0, -1, 0, 0, 0, -3, 0, 1;
    m.B = Eigen::MatrixXd::Zero(3, 2);
    m.B(1, 0) = 1;
    m.B(2, 1) = 1;
    m.coupling = -5e-5 * Eigen::MatrixXd::Identity(3, 3);
    m.dict_degree = 2;
    m.state = {SetKind::kState, {Cube(3, -20, 20)}};
    m.initial = {SetKind::kInitial, {Cube(3, -2.5, 2.5)}};
    m.unsafe = {SetKind::kUnsafe,
                {MakeBox({-20, -20, -20}, {-4, -5, -4}), MakeBox({3.5, 5, 4}, {20, 20, 20})}};
    return Homogeneous(name, 1000, Topology::kFully, m, {14, 0.27, 0.005, 20.0, 0.5, 14});
  }
  if (name == "heterogeneous_line") {
    NetworkSpec s;
    s.name = name;
    s.Q = 900;
    s.topology = Topology::kLine;
    s.templates = {HeterogeneousTemplate("het_block1", 1.0, -1e-3),
                   HeterogeneousTemplate("het_junction1", 1.2, -3e-2),
                   HeterogeneousTemplate("het_block2", 1.2, -2e-3),
                   HeterogeneousTemplate("het_junction2", 1.4, -4e-2),
                   HeterogeneousTemplate("het_block3", 1.4, -5e-3)};
    s.template_of.resize(900);
    for (int i = 0; i < 900; ++i)
      s.template_of[i] = i < 300 ? 0 : i == 300 ? 1 : i < 600 ? 2 : i == 600 ? 3 : 4;
    s.defaults = {20, 0.18, 0.01, 10.0, 0.5, 20};
    return s;
  }
  throw std::invalid_argument("unknown benchmark: " + name);
}

NetworkSpec Benchmark(const std::string& name, int Q) {
  NetworkSpec s = Benchmark(name);
  if (Q == s.Q) return s;
  if (Q < 1) throw std::invalid_argument("subsystem count must be positive");
  if (!s.template_of.empty()) {
    // Keep the block layout proportional: three equal blocks joined by junctions.
    if (Q < 5) throw std::invalid_argument("heterogeneous line needs at least 5 subsystems");
    const int b = Q / 3;
    s.template_of.assign(Q, 4);
    for (int i = 0; i < Q; ++i)
      s.template_of[i] = i < b ? 0 : i == b ? 1 : i < 2 * b ? 2 : i == 2 * b ? 3 : 4;
  }
  s.Q = Q;
  return s;
}

void to_json(nlohmann::json& j, const SetSpec& s) {
  nlohmann::json boxes = nlohmann::json::array();
  for (const auto& b : s.boxes) boxes.push_back({{"lo", VectorToJson(b.lo)}, {"hi", VectorToJson(b.hi)}});
  const char* kind = s.kind == SetKind::kState ? "state" : s.kind == SetKind::kInitial ? "initial" : "unsafe";
  j = {{"kind", kind}, {"boxes", boxes}};
}

void from_json(const nlohmann::json& j, SetSpec& s) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "state") s.kind = SetKind::kState;
  else if (kind == "initial") s.kind = SetKind::kInitial;
  else if (kind == "unsafe") s.kind = SetKind::kUnsafe;
  else throw std::invalid_argument("unknown set kind: " + kind);
  s.boxes.clear();
  for (const auto& b : j.at("boxes")) s.boxes.push_back({VectorFromJson(b.at("lo")), VectorFromJson(b.at("hi"))});
}

void to_json(nlohmann::json& j, const SubsystemModel& m) {
  j = {{"name", m.name},
       {"monomials", m.monomials},
       {"A", MatrixToJson(m.A)},
       {"B", MatrixToJson(m.B)},
       {"coupling", MatrixToJson(m.coupling)},
       {"dict_degree", m.dict_degree},
       {"state", m.state},
       {"initial", m.initial},
       {"unsafe", m.unsafe}};
}

void from_json(const nlohmann::json& j, SubsystemModel& m) {
  m.name = j.at("name").get<std::string>();
  m.monomials = j.at("monomials").get<Dictionary>();
  m.A = MatrixFromJson(j.at("A"));
  m.B = MatrixFromJson(j.at("B"));
  m.coupling = MatrixFromJson(j.at("coupling"));
  m.dict_degree = j.at("dict_degree").get<int>();
  m.state = j.at("state").get<SetSpec>();
  m.initial = j.at("initial").get<SetSpec>();
  m.unsafe = j.at("unsafe").get<SetSpec>();
}

}  // namespace certnet
