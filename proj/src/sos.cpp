#include "certnet/sos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "certnet/json_util.hpp"

namespace certnet {

bool Box::Contains(const Eigen::VectorXd& x, double tol) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  return true;
}

bool SetSpec::Contains(const Eigen::VectorXd& x, double tol) const {
  return std::any_of(boxes.begin(), boxes.end(),
                     [&](const Box& b) { return b.Contains(x, tol); });
}

void ValidateSet(const SetSpec& s) {
  if (s.boxes.empty()) throw std::invalid_argument("set has no boxes");
  const int n = s.boxes.front().dim();
  for (const auto& b : s.boxes) {
    if (b.dim() != n || b.hi.size() != n)
      throw std::invalid_argument("box dimensions disagree");
    for (int i = 0; i < n; ++i)
      if (!(b.lo[i] < b.hi[i])) throw std::invalid_argument("box with low >= high");
  }
}

bool SetsIntersect(const SetSpec& a, const SetSpec& b) {
  for (const auto& p : a.boxes)
    for (const auto& q : b.boxes) {
      bool overlap = true;
      for (int i = 0; i < p.dim(); ++i)
        if (p.hi[i] < q.lo[i] || q.hi[i] < p.lo[i]) overlap = false;
      if (overlap) return true;
    }
  return false;
}

std::vector<std::vector<Polynomial>> BoxToPolys(const SetSpec& s) {
  ValidateSet(s);
  std::vector<std::vector<Polynomial>> out;
  for (const auto& b : s.boxes) {
    const int n = b.dim();
    std::vector<Polynomial> g;
    for (int j = 0; j < n; ++j) {
      Polynomial x = Polynomial::Var(n, j);
      g.push_back((x - Polynomial::Constant(n, b.lo[j])) *
                  (Polynomial::Constant(n, b.hi[j]) - x));
    }
    out.push_back(std::move(g));
  }
  return out;
}

AffineExpr AffineExpr::Var(int v, double coef) {
  AffineExpr e;
  if (coef != 0.0) e.terms[v] = coef;
  return e;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  constant += o.constant;
  for (auto [v, c] : o.terms) {
    auto [it, ins] = terms.try_emplace(v, 0.0);
    it->second += c;
    if (it->second == 0.0) terms.erase(it);
  }
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) { return *this += o * -1.0; }

AffineExpr& AffineExpr::operator*=(double s) {
  constant *= s;
  if (s == 0.0) {
    terms.clear();
    return *this;
  }
  for (auto& [v, c] : terms) c *= s;
  return *this;
}

double AffineExpr::Evaluate(const Eigen::VectorXd& y) const {
  double v = constant;
  for (auto [k, c] : terms) v += c * y[k];
  return v;
}

AffinePoly::AffinePoly(const Polynomial& p) : num_vars_(p.num_vars()) {
  for (const auto& [m, c] : p.terms()) terms_[m] = AffineExpr(c);
}

int AffinePoly::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

void AffinePoly::AddTerm(const Monomial& m, const AffineExpr& c) {
  if (m.num_vars() != num_vars_) throw std::invalid_argument("arity mismatch");
  auto [it, ins] = terms_.try_emplace(m);
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

AffinePoly& AffinePoly::operator+=(const AffinePoly& o) {
  if (o.num_vars_ != num_vars_) throw std::invalid_argument("arity mismatch");
  for (const auto& [m, c] : o.terms_) AddTerm(m, c);
  return *this;
}

AffinePoly& AffinePoly::operator-=(const AffinePoly& o) { return *this += o * -1.0; }

AffinePoly AffinePoly::operator*(double s) const {
  AffinePoly r(num_vars_);
  if (s == 0.0) return r;
  for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
  return r;
}

AffinePoly AffinePoly::operator*(const Polynomial& p) const {
  if (p.num_vars() != num_vars_) throw std::invalid_argument("arity mismatch");
  AffinePoly r(num_vars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : p.terms()) r.AddTerm(ma * mb, ca * cb);
  return r;
}

Polynomial AffinePoly::Evaluate(const Eigen::VectorXd& y) const {
  Polynomial p(num_vars_);
  for (const auto& [m, c] : terms_) p.AddTerm(m, c.Evaluate(y));
  return p;
}

AffinePolyMatrix::AffinePolyMatrix(int rows, int cols, int num_vars)
    : rows_(rows), cols_(cols), num_vars_(num_vars),
      e_(static_cast<size_t>(rows) * cols, AffinePoly(num_vars)) {}

int AffinePolyMatrix::degree() const {
  int d = 0;
  for (const auto& p : e_) d = std::max(d, p.degree());
  return d;
}

PolyMatrix AffinePolyMatrix::Evaluate(const Eigen::VectorXd& y) const {
  PolyMatrix m(rows_, cols_, num_vars_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) m(r, c) = (*this)(r, c).Evaluate(y);
  return m;
}

int DefaultMultiplierDegree(int expr_degree) {
  int d = std::max(0, expr_degree - 2);
  return d % 2 ? d + 1 : d;
}

namespace {

// Expansion of prod_i (c_i + s_i t_i)^{e_i} in t.
class Substitution {
 public:
  Substitution(const Eigen::VectorXd& c, const Eigen::VectorXd& s) : c_(c), s_(s) {}

  const Polynomial& Expand(const Monomial& m) {
    auto it = cache_.find(m);
    if (it != cache_.end()) return it->second;
    const int n = m.num_vars();
    Polynomial p = Polynomial::Constant(n, 1.0);
    for (int i = 0; i < n; ++i) {
      if (m[i] == 0) continue;
      Polynomial lin = Polynomial::Constant(n, c_[i]) + Polynomial::Var(n, i) * s_[i];
      for (int k = 0; k < m[i]; ++k) p = p * lin;
    }
    return cache_.emplace(m, std::move(p)).first->second;
  }

  AffinePoly Apply(const AffinePoly& a) {
    AffinePoly r(a.num_vars());
    for (const auto& [m, coef] : a.terms())
      for (const auto& [mm, v] : Expand(m).terms()) r.AddTerm(mm, coef * v);
    return r;
  }

 private:
  Eigen::VectorXd c_, s_;
  std::map<Monomial, Polynomial, GradedLexLess> cache_;
};

// 1 - t_j^2 for each coordinate.
std::vector<Polynomial> NormalizedBoxPolys(int n) {
  std::vector<Polynomial> g;
  for (int j = 0; j < n; ++j)
    g.push_back(Polynomial::Constant(n, 1.0) - Polynomial::Var(n, j) * Polynomial::Var(n, j));
  return g;
}

// Polynomial matrix (I_m (x) z)' Q (I_m (x) z), upper triangle mirrored.
PolyMatrix GramExpand(const Eigen::MatrixXd& q, const std::vector<Monomial>& basis,
                      int rows, int num_vars) {
  const int nz = static_cast<int>(basis.size());
  PolyMatrix out(rows, rows, num_vars);
  for (int a = 0; a < rows; ++a)
    for (int b = a; b < rows; ++b) {
      Polynomial::TermMap acc;
      for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nz; ++j) {
          const double v = q(a * nz + i, b * nz + j);
          if (v != 0.0) acc[basis[i] * basis[j]] += v;
        }
      Polynomial p(num_vars);
      for (const auto& [m, c] : acc) p.AddTerm(m, c);
      out(a, b) = p;
      out(b, a) = p;
    }
  return out;
}

}  // namespace

int SosProgram::AddScalarSos(const AffinePoly& expr, const std::optional<Box>& domain,
                             int mult_deg, const std::string& label) {
  AffinePolyMatrix m(1, 1, expr.num_vars());
  m(0, 0) = expr;
  return AddMatrixSos(m, domain, mult_deg, label);
}

int SosProgram::AddMatrixSos(const AffinePolyMatrix& expr,
                             const std::optional<Box>& domain, int mult_deg,
                             const std::string& label) {
  const int n = num_vars_;
  const int rows = expr.rows();
  if (expr.cols() != rows) throw std::invalid_argument("matrix SOS needs a square matrix");
  if (expr.num_vars() != n) throw std::invalid_argument("expression arity mismatch");
  if (domain && domain->dim() != n) throw std::invalid_argument("domain dimension mismatch");

  Constraint con;
  con.label = label;
  con.rows = rows;
  con.center = domain ? domain->Center() : Eigen::VectorXd::Zero(n);
  con.scale = domain ? domain->HalfWidth() : Eigen::VectorXd::Ones(n);
  Substitution sub(con.center, con.scale);
  con.scaled = AffinePolyMatrix(rows, rows, n);
  for (int a = 0; a < rows; ++a)
    for (int b = a; b < rows; ++b) {
      AffinePoly diff = expr(a, b) - expr(b, a);
      for (const auto& [mono, c] : diff.terms()) {
        double mag = std::abs(c.constant);
        for (auto [v, k] : c.terms) mag = std::max(mag, std::abs(k));
        if (mag > 1e-12) throw std::invalid_argument("matrix SOS expression is not symmetric");
      }
      con.scaled(a, b) = sub.Apply(expr(a, b));
      con.scaled(b, a) = con.scaled(a, b);
    }
  const int deg_e = con.scaled.degree();
  int total_deg = deg_e;
  con.mult_deg = 0;
  if (domain) {
    con.mult_deg = mult_deg < 0 ? DefaultMultiplierDegree(deg_e) : mult_deg;
    if (con.mult_deg % 2) throw std::invalid_argument("multiplier degree must be even");
    total_deg = std::max(deg_e, con.mult_deg + 2);
  }
  const int half = (total_deg + 1) / 2;
  con.basis = MonomialBasis(n, half);
  const int nz = static_cast<int>(con.basis.size());

  // Index of every monomial up to degree 2*half.
  std::vector<Monomial> all = MonomialBasis(n, 2 * half);
  std::map<Monomial, int, GradedLexLess> index;
  for (int k = 0; k < static_cast<int>(all.size()); ++k) index[all[k]] = k;
  std::vector<int> prod(nz * nz);
  for (int i = 0; i < nz; ++i)
    for (int j = 0; j < nz; ++j) prod[i * nz + j] = index.at(con.basis[i] * con.basis[j]);

  const int big = rows * nz;
  con.gram_block = lmi_.AddPsdBlock(big);
  con.gram_first_var = lmi_.AddVariables(big * (big + 1) / 2);
  auto gram_var = [&](int p, int q) {
    if (p > q) std::swap(p, q);
    return con.gram_first_var + q * (q + 1) / 2 + p;
  };
  for (int q = 0; q < big; ++q)
    for (int p = 0; p <= q; ++p) lmi_.AddBlockEntry(con.gram_block, p, q, gram_var(p, q), 1.0);

  // Multipliers lambda_j(s) times normalized box polynomials.
  AffinePoly mult_sum(n);
  if (domain) {
    con.box_polys = NormalizedBoxPolys(n);
    if (con.mult_deg == 0) {
      const int first = lmi_.AddVariables(n);
      const int blk = lmi_.AddNonnegBlock(n);
      for (int j = 0; j < n; ++j) {
        lmi_.AddBlockEntry(blk, j, j, first + j, 1.0);
        con.mult_first_var.push_back(first + j);
        AffinePoly lam(n);
        lam.AddTerm(Monomial::One(n), AffineExpr::Var(first + j));
        mult_sum += lam * con.box_polys[j];
      }
    } else {
      con.mult_basis = MonomialBasis(n, con.mult_deg / 2);
      const int nm = static_cast<int>(con.mult_basis.size());
      for (int j = 0; j < n; ++j) {
        const int blk = lmi_.AddPsdBlock(nm);
        const int first = lmi_.AddVariables(nm * (nm + 1) / 2);
        con.mult_blocks.push_back(blk);
        con.mult_first_var.push_back(first);
        AffinePoly lam(n);
        for (int q = 0; q < nm; ++q)
          for (int p = 0; p <= q; ++p) {
            const int v = first + q * (q + 1) / 2 + p;
            lmi_.AddBlockEntry(blk, p, q, v, 1.0);
            lam.AddTerm(con.mult_basis[p] * con.mult_basis[q],
                        AffineExpr::Var(v, p == q ? 1.0 : 2.0));
          }
        mult_sum += lam * con.box_polys[j];
      }
    }
  }

  // Coefficient matching, one equality per (entry, monomial).
  const int nmono = static_cast<int>(all.size());
  std::vector<std::vector<std::pair<int, double>>> rows_terms(nmono);
  for (int a = 0; a < rows; ++a)
    for (int b = a; b < rows; ++b) {
      for (auto& r : rows_terms) r.clear();
      for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nz; ++j) {
          if (a == b && j < i) continue;
          const double w = (a == b && i != j) ? 2.0 : 1.0;
          rows_terms[prod[i * nz + j]].emplace_back(gram_var(a * nz + i, b * nz + j), w);
        }
      AffinePoly lhs = con.scaled(a, b);
      if (a == b) lhs -= mult_sum;
      std::vector<double> rhs(nmono, 0.0);
      for (const auto& [mono, c] : lhs.terms()) {
        auto it = index.find(mono);
        if (it == index.end())
          throw std::invalid_argument("Gram basis cannot represent the expression degree");
        rhs[it->second] = c.constant;
        for (auto [v, k] : c.terms) rows_terms[it->second].emplace_back(v, -k);
      }
      for (int k = 0; k < nmono; ++k) lmi_.AddEquality(rows_terms[k], rhs[k]);
    }
  cons_.push_back(std::move(con));
  return static_cast<int>(cons_.size()) - 1;
}

GramWitness SosProgram::Recover(int id, const LmiSolution& sol) const {
  const Constraint& con = cons_.at(id);
  GramWitness w;
  w.label = con.label;
  w.rows = con.rows;
  w.basis = con.basis;
  w.Q = sol.blocks.at(con.gram_block);
  w.center = con.center;
  w.scale = con.scale;
  w.expression = con.scaled.Evaluate(sol.y);
  w.box_polys = con.box_polys;
  w.multiplier_basis = con.mult_basis;
  const int n = num_vars_;
  for (size_t j = 0; j < con.mult_first_var.size(); ++j) {
    if (con.mult_deg == 0) {
      w.multipliers.push_back(Polynomial::Constant(n, sol.y[con.mult_first_var[j]]));
    } else {
      Eigen::MatrixXd g = sol.blocks.at(con.mult_blocks[j]);
      w.multiplier_grams.push_back(g);
      w.multipliers.push_back(GramExpand(g, con.mult_basis, 1, n)(0, 0));
    }
  }
  GramCheck chk = RecheckWitness(w);
  w.residual = chk.residual;
  w.min_eigenvalue = chk.min_eigenvalue;
  return w;
}

GramCheck RecheckWitness(const GramWitness& w) {
  const int n = static_cast<int>(w.center.size());
  const int nz = static_cast<int>(w.basis.size());
  GramCheck out{0.0, std::numeric_limits<double>::infinity()};
  if (w.Q.rows() != w.rows * nz || w.Q.cols() != w.rows * nz)
    return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Eigen::MatrixXd qs = 0.5 * (w.Q + w.Q.transpose());
  if (qs.size()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qs, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
  }
  double scale = 1.0;
  for (int a = 0; a < w.rows; ++a)
    for (int b = 0; b < w.rows; ++b)
      for (const auto& [m, c] : w.expression(a, b).terms()) scale = std::max(scale, std::abs(c));
  Polynomial msum(n);
  for (size_t j = 0; j < w.multipliers.size(); ++j) {
    msum += w.multipliers[j] * w.box_polys.at(j);
    if (w.multiplier_grams.empty()) {
      out.min_eigenvalue = std::min(out.min_eigenvalue, w.multipliers[j].coefficient(Monomial::One(n)));
    } else {
      const Eigen::MatrixXd& g = w.multiplier_grams.at(j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
      out.min_eigenvalue = std::min(out.min_eigenvalue, es.eigenvalues().minCoeff());
      Polynomial re = GramExpand(g, w.multiplier_basis, 1, n)(0, 0);
      out.residual = std::max(out.residual, re.MaxCoefficientDifference(w.multipliers[j]) / scale);
    }
  }
  PolyMatrix gram = GramExpand(w.Q, w.basis, w.rows, n);
  for (int a = 0; a < w.rows; ++a)
    for (int b = a; b < w.rows; ++b) {
      Polynomial target = w.expression(a, b);
      if (a == b) target -= msum;
      out.residual = std::max(out.residual, target.MaxCoefficientDifference(gram(a, b)) / scale);
    }
  return out;
}

void to_json(nlohmann::json& j, const GramWitness& w) {
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& m : w.basis) basis.push_back(m.exponents());
  nlohmann::json mbasis = nlohmann::json::array();
  for (const auto& m : w.multiplier_basis) mbasis.push_back(m.exponents());
  nlohmann::json grams = nlohmann::json::array();
  for (const auto& g : w.multiplier_grams) grams.push_back(MatrixToJson(g));
  j = {{"label", w.label},
       {"rows", w.rows},
       {"basis", basis},
       {"Q", MatrixToJson(w.Q)},
       {"center", VectorToJson(w.center)},
       {"scale", VectorToJson(w.scale)},
       {"expression", w.expression},
       {"box_polys", w.box_polys},
       {"multipliers", w.multipliers},
       {"multiplier_basis", mbasis},
       {"multiplier_grams", grams},
       {"residual", w.residual},
       {"min_eigenvalue", w.min_eigenvalue}};
}

void from_json(const nlohmann::json& j, GramWitness& w) {
  w.label = j.at("label").get<std::string>();
  w.rows = j.at("rows").get<int>();
  w.basis.clear();
  for (const auto& e : j.at("basis")) w.basis.emplace_back(e.get<std::vector<int>>());
  w.Q = MatrixFromJson(j.at("Q"));
  w.center = VectorFromJson(j.at("center"));
  w.scale = VectorFromJson(j.at("scale"));
  w.expression = j.at("expression").get<PolyMatrix>();
  w.box_polys = j.at("box_polys").get<std::vector<Polynomial>>();
  w.multipliers = j.at("multipliers").get<std::vector<Polynomial>>();
  w.multiplier_basis.clear();
  for (const auto& e : j.at("multiplier_basis")) w.multiplier_basis.emplace_back(e.get<std::vector<int>>());
  w.multiplier_grams.clear();
  for (const auto& g : j.at("multiplier_grams")) w.multiplier_grams.push_back(MatrixFromJson(g));
  w.residual = j.at("residual").get<double>();
  w.min_eigenvalue = j.at("min_eigenvalue").get<double>();
}

}  // namespace certnet
