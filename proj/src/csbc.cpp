#include "certnet/csbc.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "certnet/json_util.hpp"

namespace certnet {
namespace {

int HDegree(const Dictionary& d, const SynthConfig& cfg) {
  return cfg.deg_h >= 0 ? cfg.deg_h : std::max(0, d.max_degree() - 1);
}

Polynomial QuadraticForm(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  Polynomial q(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (P(i, j) != 0.0) q.AddTerm(Monomial::Var(n, i) * Monomial::Var(n, j), P(i, j));
  return q;
}

// Decision variable layout of the phase 1 program.
struct Layout {
  int n, T, nb;
  int c0, h0, pi, mu, floor;

  int CVar(int i, int j) const {
    if (i > j) std::swap(i, j);
    return c0 + i * n - i * (i - 1) / 2 + (j - i);
  }
  int HVar(int t, int c, int b) const { return h0 + (t * n + c) * nb + b; }
};

// Entries of C as affine expressions.
AffineExpr CEntry(const Layout& l, int i, int j) { return AffineExpr::Var(l.CVar(i, j)); }

Eigen::MatrixXd SymmetricFromY(const Layout& l, const Eigen::VectorXd& y) {
  Eigen::MatrixXd c(l.n, l.n);
  for (int i = 0; i < l.n; ++i)
    for (int j = 0; j < l.n; ++j) c(i, j) = y[l.CVar(i, j)];
  return c;
}

double MinEig(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// sign * C + shift * I - floor_coef * s I >= 0, s being the floor variable.
void AddPsdConstraint(LmiProblem& lmi, const Layout& l, double sign, double shift, double floor_coef) {
  const int b = lmi.AddPsdBlock(l.n);
  for (int i = 0; i < l.n; ++i) {
    lmi.AddBlockEntry(b, i, i, LmiProblem::kConstant, shift);
    if (floor_coef != 0.0) lmi.AddBlockEntry(b, i, i, l.floor, -floor_coef);
    for (int j = i; j < l.n; ++j) lmi.AddBlockEntry(b, i, j, l.CVar(i, j), sign);
  }
}

}  // namespace

void SynthConfig::Validate() const {
  if (eps_grid.empty()) throw std::invalid_argument("eps grid is empty");
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] > 0)) throw std::invalid_argument("eps grid must be positive");
    if (k > 0 && !(eps_grid[k] < eps_grid[k - 1]))
      throw std::invalid_argument("eps grid must be strictly descending");
  }
  if (!(c_min > 0 && c_max > c_min)) throw std::invalid_argument("need 0 < c_min < c_max");
  if (!(pi_max > pi_min && pi_min > 0)) throw std::invalid_argument("need 0 < pi_min < pi_max");
  if (!(mu_max > mu_min && mu_min > 0)) throw std::invalid_argument("need 0 < mu_min < mu_max");
}

double EqualityResidual(const Eigen::MatrixXd& N0, const Dictionary& dict, const PolyMatrix& H,
                        const Eigen::MatrixXd& C) {
  const PolyMatrix lhs = N0 * H;
  const PolyMatrix rhs = dict.Factorize() * C;
  double r = 0.0;
  for (int k = 0; k < lhs.rows(); ++k)
    for (int c = 0; c < lhs.cols(); ++c) r = std::max(r, lhs(k, c).MaxCoefficientDifference(rhs(k, c)));
  return r;
}

PolyMatrix DissipationMatrix(const SynthesisProblem& prob, double eps, const Eigen::MatrixXd& C,
                             const PolyMatrix& H, double pi, double mu) {
  const int n = prob.n(), T = prob.data.T();
  const Eigen::MatrixXd z = prob.data.X1 - prob.D * prob.data.W0;
  const PolyMatrix zh = z * H;
  const Eigen::MatrixXd g0 =
      -eps * C - mu * prob.data.NoiseGram() - pi * Eigen::MatrixXd::Identity(n, n);
  PolyMatrix m(n + T, n + T, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = Polynomial::Constant(n, g0(r, c)) - zh(r, c) - zh(c, r);
  for (int t = 0; t < T; ++t) {
    for (int r = 0; r < n; ++r) m(r, n + t) = m(n + t, r) = H(t, r);
    m(n + t, n + t) = Polynomial::Constant(n, mu);
  }
  return m;
}

Phase1Result Phase1AtEps(const SynthesisProblem& prob, double eps, const SynthConfig& cfg) {
  const TrajectoryData& td = prob.data;
  if (!td.rank_ok) throw std::invalid_argument("phase 1 needs N0 with full row rank");
  const int n = prob.n(), T = td.T(), N = prob.dict.size();
  if (td.N0.rows() != N || td.N0.cols() != T) throw std::invalid_argument("N0 shape mismatch");
  if (prob.D.rows() != n || prob.D.cols() != td.W0.rows())
    throw std::invalid_argument("coupling matrix does not match W0");
  if (prob.state.boxes.size() != 1) throw std::invalid_argument("state set must be a single box");

  const std::vector<Monomial> hb = MonomialBasis(n, HDegree(prob.dict, cfg));
  const Monomial one = Monomial::One(n);

  SosProgram sp(n);
  LmiProblem& lmi = sp.lmi();
  Layout l{n, T, static_cast<int>(hb.size()), 0, 0, 0, 0, 0};
  l.c0 = lmi.AddVariables(n * (n + 1) / 2);
  l.h0 = lmi.AddVariables(T * n * l.nb);
  l.pi = lmi.AddVariables(1);
  l.mu = lmi.AddVariables(1);

  AffinePolyMatrix H(T, n, n);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < n; ++c)
      for (int b = 0; b < l.nb; ++b) H(t, c).AddTerm(hb[b], AffineExpr::Var(l.HVar(t, c, b)));

  // N0 H(x) = Upsilon(x) C, coefficient by coefficient.
  const PolyMatrix ups = prob.dict.Factorize();
  for (int k = 0; k < N; ++k) {
    for (int c = 0; c < n; ++c) {
      std::map<Monomial, std::vector<std::pair<int, double>>, GradedLexLess> rows;
      for (int t = 0; t < T; ++t)
        if (td.N0(k, t) != 0.0)
          for (int b = 0; b < l.nb; ++b) rows[hb[b]].emplace_back(l.HVar(t, c, b), td.N0(k, t));
      for (int j = 0; j < n; ++j)
        for (const auto& [mono, coef] : ups(k, j).terms()) rows[mono].emplace_back(l.CVar(j, c), -coef);
      for (const auto& [mono, terms] : rows) lmi.AddEquality(terms, 0.0);
    }
  }

  AddPsdConstraint(lmi, l, 1.0, -cfg.c_min, 0.0);
  AddPsdConstraint(lmi, l, -1.0, cfg.c_max, 0.0);
  {
    const int b = lmi.AddNonnegBlock(1);
    lmi.AddBlockEntry(b, 0, 0, l.pi, -1.0);
    lmi.AddBlockEntry(b, 0, 0, LmiProblem::kConstant, cfg.pi_max);
  }
  lmi.AddBounds(l.mu, cfg.mu_min, cfg.mu_max);

  // [[G, H'], [H, mu I]] with G = -eps C - Z H - H' Z' - mu Xi Xi' - pi I.
  const Eigen::MatrixXd z = prob.D.size() ? Eigen::MatrixXd(td.X1 - prob.D * td.W0) : td.X1;
  const Eigen::MatrixXd ng = td.NoiseGram();
  AffinePolyMatrix zh(n, n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int t = 0; t < T; ++t)
        if (z(r, t) != 0.0) zh(r, c) += H(t, c) * z(r, t);
  AffinePolyMatrix m(n + T, n + T, n);
  for (int r = 0; r < n; ++r) {
    for (int c = r; c < n; ++c) {
      AffinePoly g(n);
      AffineExpr k = CEntry(l, r, c) * -eps;
      k -= AffineExpr::Var(l.mu, ng(r, c));
      if (r == c) k -= AffineExpr::Var(l.pi);
      g.AddTerm(one, k);
      g -= zh(r, c);
      g -= zh(c, r);
      m(r, c) = g;
      m(c, r) = g;
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int r = 0; r < n; ++r) m(r, n + t) = m(n + t, r) = H(t, r);
    AffinePoly d(n);
    d.AddTerm(one, AffineExpr::Var(l.mu));
    m(n + t, n + t) = d;
  }
  const int id = sp.AddMatrixSos(m, prob.state.boxes[0], cfg.mult_deg, "dissipation");
  lmi.SetObjective(l.pi, 1.0);

  LmiSolution sol = Solve(lmi, cfg.sdp);
  Phase1Result res;
  res.eps = eps;
  EpsAttempt at{eps, ToString(sol.status), std::numeric_limits<double>::quiet_NaN()};
  if (sol.ok()) at.pi = sol.y[l.pi];
  if (!sol.ok() || !(sol.y[l.pi] >= cfg.pi_min)) {
    if (sol.ok()) at.status = "pi below threshold";
    res.attempts.push_back(at);
    return res;
  }
  // Among near-optimal pi, take the best conditioned C: this fixes the scale
  // of C, which pi alone leaves free once pi reaches its cap.
  SosProgram refine = sp;
  refine.lmi().AddLowerBound(l.pi, sol.y[l.pi] * (1 - 1e-2));
  refine.lmi().SetObjective(l.pi, 0.0);
  for (int i = 0; i < n; ++i) refine.lmi().SetObjective(l.CVar(i, i), 1.0);
  LmiSolution sol2 = Solve(refine.lmi(), cfg.sdp);
  const SosProgram* used = &sp;
  if (sol2.ok()) {
    sol = std::move(sol2);
    used = &refine;
  }
  // The null space of N0 leaves controller directions that only the noise
  // bound limits; keep pi and trace(C) and take the smallest |U0 H| (L1).
  SosProgram calm = *used;
  {
    LmiProblem& p = calm.lmi();
    for (int v = 0; v < p.num_vars(); ++v) p.SetObjective(v, 0.0);
    double tr = 0;
    for (int i = 0; i < n; ++i) tr += sol.y[l.CVar(i, i)];
    const int tb = p.AddNonnegBlock(1);
    for (int i = 0; i < n; ++i) p.AddBlockEntry(tb, 0, 0, l.CVar(i, i), 1.0);
    p.AddBlockEntry(tb, 0, 0, LmiProblem::kConstant, -tr * (1 - 1e-2));
    const int m = static_cast<int>(td.U0.rows());
    const int k = m * n * l.nb;
    const int s0 = p.AddVariables(k);
    const int ab = p.AddNonnegBlock(2 * k);
    for (int r = 0, e = 0; r < m; ++r)
      for (int c = 0; c < n; ++c)
        for (int b = 0; b < l.nb; ++b, ++e) {
          p.AddBlockEntry(ab, 2 * e, 2 * e, s0 + e, 1.0);
          p.AddBlockEntry(ab, 2 * e + 1, 2 * e + 1, s0 + e, 1.0);
          for (int t = 0; t < T; ++t) {
            if (td.U0(r, t) == 0.0) continue;
            p.AddBlockEntry(ab, 2 * e, 2 * e, l.HVar(t, c, b), -td.U0(r, t));
            p.AddBlockEntry(ab, 2 * e + 1, 2 * e + 1, l.HVar(t, c, b), td.U0(r, t));
          }
          p.SetObjective(s0 + e, -1.0);
        }
  }
  LmiSolution sol3 = Solve(calm.lmi(), cfg.sdp);
  if (sol3.ok()) {
    sol = std::move(sol3);
    used = &calm;
  }

  res.C = SymmetricFromY(l, sol.y);
  res.H = PolyMatrix(T, n, n);
  for (int t = 0; t < T; ++t)
    for (int c = 0; c < n; ++c)
      for (int b = 0; b < l.nb; ++b) {
        const double v = sol.y[l.HVar(t, c, b)];
        if (v != 0.0) res.H(t, c).AddTerm(hb[b], v);
      }
  res.pi = sol.y[l.pi];
  res.mu = sol.y[l.mu];
  res.witnesses.push_back(used->Recover(id, sol));

  std::ostringstream why;
  const GramCheck gc = RecheckWitness(res.witnesses.back());
  const double eq = EqualityResidual(td.N0, prob.dict, res.H, res.C);
  if (!gc.ok()) why << "gram recheck failed (residual " << gc.residual << ", eig " << gc.min_eigenvalue << ") ";
  if (eq > 1e-8) why << "equality residual " << eq << " ";
  if (MinEig(res.C) < cfg.c_min * (1 - 1e-6)) why << "C below lower bound ";
  if (!why.str().empty()) {
    at.status = "rejected: " + why.str();
    res.attempts.push_back(at);
    return res;
  }
  res.feasible = true;
  res.attempts.push_back(at);
  return res;
}

Phase1Result Phase1(const SynthesisProblem& prob, const SynthConfig& cfg) {
  cfg.Validate();
  std::vector<EpsAttempt> attempts;
  for (double eps : cfg.eps_grid) {
    Phase1Result r = Phase1AtEps(prob, eps, cfg);
    attempts.insert(attempts.end(), r.attempts.begin(), r.attempts.end());
    if (r.feasible) {
      r.attempts = attempts;
      return r;
    }
  }
  Phase1Result r;
  r.attempts = attempts;
  return r;
}

LevelSets Phase2(const SynthesisProblem& prob, const Eigen::MatrixXd& C, const SynthConfig& cfg) {
  const int n = prob.n();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0) || lmax / lmin > cfg.max_condition)
    throw std::invalid_argument("C is not well conditioned");
  Eigen::MatrixXd P = C.inverse();
  P = 0.5 * (P + P.transpose()).eval();

  LevelSets ls;
  ls.phi = (1 - 1e-9) / lmax;
  const Polynomial form = QuadraticForm(P);

  // sign = +1: minimize g with g - x'Px SOS; sign = -1: maximize g with x'Px - g SOS.
  auto bound = [&](const Box& box, double sign, const std::string& label) {
    SosProgram sp(n);
    const int g = sp.lmi().AddVariables(1);
    AffinePoly e = AffinePoly(form * -sign);
    e.AddTerm(Monomial::One(n), AffineExpr::Var(g, sign));
    const int id = sp.AddScalarSos(e, box, cfg.level_mult_deg, label);
    sp.lmi().SetObjective(g, -sign);
    const LmiSolution sol = Solve(sp.lmi(), cfg.sdp);
    if (!sol.ok()) throw std::runtime_error(label + " program failed: " + ToString(sol.status));
    ls.witnesses.push_back(sp.Recover(id, sol));
    return sol.y[g];
  };

  ls.gamma = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prob.initial.boxes.size(); ++k)
    ls.gamma = std::max(ls.gamma, bound(prob.initial.boxes[k], 1.0, "initial_" + std::to_string(k)));
  ls.beta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < prob.unsafe.boxes.size(); ++k)
    ls.beta = std::min(ls.beta, bound(prob.unsafe.boxes[k], -1.0, "unsafe_" + std::to_string(k)));
  return ls;
}

std::vector<Polynomial> ExtractController(const Eigen::MatrixXd& U0, const PolyMatrix& H,
                                          const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
  if (!lu.isInvertible() || 1.0 / (C.norm() * C.inverse().norm()) < 1e-12)
    throw std::invalid_argument("C is ill conditioned");
  PolyMatrix x(n, 1, n);
  for (int i = 0; i < n; ++i) x(i, 0) = Polynomial::Var(n, i);
  const PolyMatrix nu = (U0 * H) * (C.inverse() * x);
  std::vector<Polynomial> out;
  for (int r = 0; r < nu.rows(); ++r) out.push_back(nu(r, 0));
  return out;
}

double InteractionGain(const Eigen::MatrixXd& D, double pi) {
  if (!(pi > 0)) throw std::invalid_argument("pi must be positive");
  if (D.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(D);
  const double s = svd.singularValues()[0];
  return s * s / pi;
}

std::string ToString(SynthStatus s) {
  switch (s) {
    case SynthStatus::kOk: return "ok";
    case SynthStatus::kInfeasible: return "infeasible";
    case SynthStatus::kLevelSets: return "level_sets";
    case SynthStatus::kRejected: return "rejected";
  }
  return "unknown";
}

SynthResult Synthesize(const SynthesisProblem& prob, const SynthConfig& cfg, const std::string& name) {
  SynthResult out;
  Phase1Result p1 = Phase1(prob, cfg);
  out.attempts = p1.attempts;
  if (!p1.feasible) {
    std::ostringstream os;
    os << "no feasible decay rate on the grid:";
    for (const auto& a : p1.attempts) os << " eps=" << a.eps << " (" << a.status << ", pi=" << a.pi << ")";
    out.status = SynthStatus::kInfeasible;
    out.message = os.str();
    return out;
  }
  LevelSets ls = Phase2(prob, p1.C, cfg);
  CsbcCertificate& c = out.cert;
  c.name = name;
  c.C = p1.C;
  c.P = p1.C.inverse();
  c.P = 0.5 * (c.P + c.P.transpose()).eval();
  c.H = p1.H;
  c.phi = ls.phi;
  c.gamma = ls.gamma;
  c.beta = ls.beta;
  c.eps = p1.eps;
  c.pi = p1.pi;
  c.mu = p1.mu;
  c.rho = InteractionGain(prob.D, p1.pi);
  c.controller = ExtractController(prob.data.U0, p1.H, p1.C);
  c.gram_witnesses = p1.witnesses;
  c.gram_witnesses.insert(c.gram_witnesses.end(), ls.witnesses.begin(), ls.witnesses.end());
  c.N0 = prob.data.N0;
  c.dict = prob.dict;
  if (!(ls.beta > ls.gamma)) {
    std::ostringstream os;
    os << "level sets do not separate: gamma=" << ls.gamma << " beta=" << ls.beta;
    out.status = SynthStatus::kLevelSets;
    out.message = os.str();
    return out;
  }
  for (const auto& w : ls.witnesses) {
    const GramCheck gc = RecheckWitness(w);
    if (!gc.ok()) {
      out.status = SynthStatus::kRejected;
      out.message = "level-set witness " + w.label + " failed recheck";
      return out;
    }
  }
  out.status = SynthStatus::kOk;
  return out;
}

CsbcCertificate Rebind(const CsbcCertificate& c, const Eigen::MatrixXd& D) {
  CsbcCertificate r = c;
  r.rho = InteractionGain(D, c.pi);
  return r;
}

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = {{"eps_grid", c.eps_grid},   {"deg_h", c.deg_h},   {"mult_deg", c.mult_deg},
       {"level_mult_deg", c.level_mult_deg}, {"c_min", c.c_min}, {"c_max", c.c_max},
       {"pi_min", c.pi_min},       {"pi_max", c.pi_max}, {"mu_min", c.mu_min},
       {"mu_max", c.mu_max},       {"max_condition", c.max_condition},
       {"sdp", {{"feas_tol", c.sdp.feas_tol}, {"gap_tol", c.sdp.gap_tol},
                {"max_iter", c.sdp.max_iter}, {"psd_tol", c.sdp.psd_tol}}}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  c = SynthConfig{};
  c.eps_grid = j.value("eps_grid", c.eps_grid);
  c.deg_h = j.value("deg_h", c.deg_h);
  c.mult_deg = j.value("mult_deg", c.mult_deg);
  c.level_mult_deg = j.value("level_mult_deg", c.level_mult_deg);
  c.c_min = j.value("c_min", c.c_min);
  c.c_max = j.value("c_max", c.c_max);
  c.pi_min = j.value("pi_min", c.pi_min);
  c.pi_max = j.value("pi_max", c.pi_max);
  c.mu_min = j.value("mu_min", c.mu_min);
  c.mu_max = j.value("mu_max", c.mu_max);
  c.max_condition = j.value("max_condition", c.max_condition);
  if (j.contains("sdp")) {
    const auto& s = j["sdp"];
    c.sdp.feas_tol = s.value("feas_tol", c.sdp.feas_tol);
    c.sdp.gap_tol = s.value("gap_tol", c.sdp.gap_tol);
    c.sdp.max_iter = s.value("max_iter", c.sdp.max_iter);
    c.sdp.psd_tol = s.value("psd_tol", c.sdp.psd_tol);
  }
  c.Validate();
}

void to_json(nlohmann::json& j, const CsbcCertificate& c) {
  double worst_res = 0.0, worst_eig = std::numeric_limits<double>::infinity();
  for (const auto& w : c.gram_witnesses) {
    const GramCheck g = RecheckWitness(w);
    worst_res = std::max(worst_res, g.residual);
    worst_eig = std::min(worst_eig, g.min_eigenvalue);
  }
  j = {{"name", c.name},
       {"C", MatrixToJson(c.C)},
       {"P", MatrixToJson(c.P)},
       {"H", c.H},
       {"phi", c.phi},
       {"gamma", c.gamma},
       {"beta", c.beta},
       {"eps", c.eps},
       {"pi", c.pi},
       {"mu", c.mu},
       {"rho", c.rho},
       {"controller", c.controller},
       {"gram_summary", {{"count", c.gram_witnesses.size()},
                         {"max_residual", worst_res},
                         {"min_eigenvalue", c.gram_witnesses.empty() ? 0.0 : worst_eig}}},
       {"gram_witnesses", c.gram_witnesses},
       {"N0", MatrixToJson(c.N0)},
       {"dictionary", c.dict}};
}

void from_json(const nlohmann::json& j, CsbcCertificate& c) {
  c.name = j.value("name", "");
  c.C = MatrixFromJson(j.at("C"));
  c.P = MatrixFromJson(j.at("P"));
  c.H = j.at("H").get<PolyMatrix>();
  c.phi = j.at("phi");
  c.gamma = j.at("gamma");
  c.beta = j.at("beta");
  c.eps = j.at("eps");
  c.pi = j.at("pi");
  c.mu = j.at("mu");
  c.rho = j.at("rho");
  c.controller = j.at("controller").get<std::vector<Polynomial>>();
  c.gram_witnesses = j.at("gram_witnesses").get<std::vector<GramWitness>>();
  c.N0 = MatrixFromJson(j.at("N0"));
  c.dict = j.at("dictionary").get<Dictionary>();
}

}  // namespace certnet
