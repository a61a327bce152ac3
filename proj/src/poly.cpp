#include "certnet/poly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace certnet {

Monomial::Monomial(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::One(int num_vars) {
  return Monomial(std::vector<int>(num_vars, 0));
}

Monomial Monomial::Var(int num_vars, int index) {
  std::vector<int> e(num_vars, 0);
  e.at(index) = 1;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (num_vars() != other.num_vars())
    throw std::invalid_argument("monomial variable count mismatch");
  std::vector<int> e(exps_);
  for (int i = 0; i < num_vars(); ++i) e[i] += other.exps_[i];
  return Monomial(std::move(e));
}

Monomial Monomial::DivideByVar(int index) const {
  if (exps_.at(index) <= 0)
    throw std::invalid_argument("monomial not divisible by variable");
  std::vector<int> e(exps_);
  --e[index];
  return Monomial(std::move(e));
}

double Monomial::Evaluate(std::span<const double> x) const {
  double v = 1.0;
  for (int i = 0; i < num_vars(); ++i) {
    for (int k = 0; k < exps_[i]; ++k) v *= x[i];
  }
  return v;
}

std::string Monomial::ToString() const {
  if (degree_ == 0) return "1";
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < num_vars(); ++i) {
    if (exps_[i] == 0) continue;
    if (!first) os << "*";
    os << "x" << (i + 1);
    if (exps_[i] > 1) os << "^" << exps_[i];
    first = false;
  }
  return os.str();
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const int n = std::min(a.num_vars(), b.num_vars());
  for (int i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return a.num_vars() < b.num_vars();
}

namespace {

void EnumerateDegree(int num_vars, int degree, int var, std::vector<int>& cur,
                     std::vector<Monomial>& out) {
  if (var == num_vars - 1) {
    cur[var] = degree;
    out.emplace_back(cur);
    cur[var] = 0;
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[var] = e;
    EnumerateDegree(num_vars, degree - e, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

std::vector<Monomial> MonomialBasis(int num_vars, int max_degree) {
  return MonomialBasis(num_vars, 0, max_degree);
}

std::vector<Monomial> MonomialBasis(int num_vars, int min_degree,
                                    int max_degree) {
  std::vector<Monomial> out;
  if (num_vars <= 0) {
    if (min_degree <= 0 && max_degree >= 0) out.emplace_back();
    return out;
  }
  std::vector<int> cur(num_vars, 0);
  for (int d = std::max(0, min_degree); d <= max_degree; ++d)
    EnumerateDegree(num_vars, d, 0, cur, out);
  return out;
}

Polynomial::Polynomial(int num_vars, const TermMap& terms)
    : num_vars_(num_vars) {
  for (const auto& [m, c] : terms) AddTerm(m, c);
}

Polynomial Polynomial::Constant(int num_vars, double c) {
  Polynomial p(num_vars);
  p.AddTerm(Monomial::One(num_vars), c);
  return p;
}

Polynomial Polynomial::Var(int num_vars, int index) {
  Polynomial p(num_vars);
  p.AddTerm(Monomial::Var(num_vars, index), 1.0);
  return p;
}

Polynomial Polynomial::FromMonomial(const Monomial& m, double coef) {
  Polynomial p(m.num_vars());
  p.AddTerm(m, coef);
  return p;
}

int Polynomial::degree() const {
  if (terms_.empty()) return 0;
  return terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::AddTerm(const Monomial& m, double c) {
  if (m.num_vars() != num_vars_)
    throw std::invalid_argument("polynomial variable count mismatch");
  auto [it, inserted] = terms_.try_emplace(m, 0.0);
  it->second += c;
  if (std::abs(it->second) <= kDropTolerance) terms_.erase(it);
}

void Polynomial::CheckVars(const Polynomial& other) const {
  if (num_vars_ != other.num_vars_)
    throw std::invalid_argument("polynomial variable count mismatch");
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  CheckVars(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  CheckVars(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial r(*this);
  r += other;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  Polynomial r(*this);
  r -= other;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  CheckVars(other);
  // Accumulate without intermediate dropping so cancellation is exact-ish.
  TermMap acc;
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : other.terms_) acc[ma * mb] += ca * cb;
  Polynomial r(num_vars_);
  for (const auto& [m, c] : acc)
    if (std::abs(c) > kDropTolerance) r.terms_.emplace(m, c);
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(num_vars_);
  for (const auto& [m, c] : terms_) r.AddTerm(m, c * s);
  return r;
}

double Polynomial::Evaluate(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != num_vars_)
    throw std::invalid_argument("evaluation point has wrong dimension");
  double v = 0.0;
  for (const auto& [m, c] : terms_) v += c * m.Evaluate(x);
  return v;
}

bool Polynomial::operator==(const Polynomial& other) const {
  return num_vars_ == other.num_vars_ && terms_ == other.terms_;
}

double Polynomial::MaxCoefficientDifference(const Polynomial& other) const {
  CheckVars(other);
  TermMap acc(terms_);
  for (const auto& [m, c] : other.terms_) acc[m] -= c;
  double worst = 0.0;
  for (const auto& [m, c] : acc) worst = std::max(worst, std::abs(c));
  return worst;
}

std::string Polynomial::ToString() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    os << std::abs(c);
    if (m.degree() > 0) os << "*" << m.ToString();
    first = false;
  }
  return os.str();
}

PolyMatrix::PolyMatrix(int rows, int cols, int num_vars)
    : rows_(rows),
      cols_(cols),
      num_vars_(num_vars),
      entries_(static_cast<size_t>(rows) * cols, Polynomial(num_vars)) {}

PolyMatrix PolyMatrix::FromConstant(const Eigen::MatrixXd& m, int num_vars) {
  PolyMatrix r(static_cast<int>(m.rows()), static_cast<int>(m.cols()),
               num_vars);
  for (int i = 0; i < r.rows_; ++i)
    for (int j = 0; j < r.cols_; ++j)
      r(i, j) = Polynomial::Constant(num_vars, m(i, j));
  return r;
}

PolyMatrix PolyMatrix::operator*(const PolyMatrix& other) const {
  if (cols_ != other.rows_) throw std::invalid_argument("shape mismatch");
  PolyMatrix r(rows_, other.cols_, num_vars_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < other.cols_; ++j)
      for (int k = 0; k < cols_; ++k) {
        const Polynomial& a = (*this)(i, k);
        const Polynomial& b = other(k, j);
        if (a.is_zero() || b.is_zero()) continue;
        r(i, j) += a * b;
      }
  return r;
}

PolyMatrix PolyMatrix::operator+(const PolyMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("shape mismatch");
  PolyMatrix r(*this);
  for (size_t i = 0; i < entries_.size(); ++i) r.entries_[i] += other.entries_[i];
  return r;
}

PolyMatrix PolyMatrix::operator-(const PolyMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("shape mismatch");
  PolyMatrix r(*this);
  for (size_t i = 0; i < entries_.size(); ++i) r.entries_[i] -= other.entries_[i];
  return r;
}

PolyMatrix PolyMatrix::Transpose() const {
  PolyMatrix r(cols_, rows_, num_vars_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

int PolyMatrix::degree() const {
  int d = 0;
  for (const auto& p : entries_) d = std::max(d, p.degree());
  return d;
}

Eigen::MatrixXd PolyMatrix::Evaluate(std::span<const double> x) const {
  Eigen::MatrixXd r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(i, j) = (*this)(i, j).Evaluate(x);
  return r;
}

PolyMatrix operator*(const Eigen::MatrixXd& a, const PolyMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("shape mismatch");
  PolyMatrix r(static_cast<int>(a.rows()), b.cols(), b.num_vars());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      for (int k = 0; k < a.cols(); ++k)
        if (a(i, k) != 0.0) r(i, j) += b(k, j) * a(i, k);
  return r;
}

PolyMatrix operator*(const PolyMatrix& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("shape mismatch");
  PolyMatrix r(a.rows(), static_cast<int>(b.cols()), a.num_vars());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      for (int k = 0; k < a.cols(); ++k)
        if (b(k, j) != 0.0) r(i, j) += a(i, k) * b(k, j);
  return r;
}

CompiledPolyVector::CompiledPolyVector(const std::vector<Polynomial>& polys) {
  if (polys.empty()) return;
  num_vars_ = polys.front().num_vars();
  std::map<Monomial, int, GradedLexLess> index;
  for (const auto& p : polys)
    for (const auto& [m, c] : p.terms()) index.try_emplace(m, 0);
  int k = 0;
  for (auto& [m, i] : index) {
    i = k++;
    for (int v = 0; v < num_vars_; ++v) {
      exps_.push_back(m[v]);
      max_exp_ = std::max(max_exp_, m[v]);
    }
  }
  gain_ = Eigen::MatrixXd::Zero(static_cast<int>(polys.size()), k);
  for (size_t r = 0; r < polys.size(); ++r)
    for (const auto& [m, c] : polys[r].terms()) gain_(r, index.at(m)) = c;
}

void CompiledPolyVector::Evaluate(const double* x, double* out) const {
  const int nm = static_cast<int>(gain_.cols());
  const int rows = static_cast<int>(gain_.rows());
  // Power table pw[v * (max_exp_+1) + e] = x_v^e.
  double pw_stack[64];
  std::vector<double> pw_heap;
  const int stride = max_exp_ + 1;
  double* pw = pw_stack;
  if (num_vars_ * stride > 64) {
    pw_heap.resize(num_vars_ * stride);
    pw = pw_heap.data();
  }
  for (int v = 0; v < num_vars_; ++v) {
    pw[v * stride] = 1.0;
    for (int e = 1; e <= max_exp_; ++e)
      pw[v * stride + e] = pw[v * stride + e - 1] * x[v];
  }
  for (int r = 0; r < rows; ++r) out[r] = 0.0;
  for (int m = 0; m < nm; ++m) {
    double z = 1.0;
    const int* e = exps_.data() + m * num_vars_;
    for (int v = 0; v < num_vars_; ++v) z *= pw[v * stride + e[v]];
    for (int r = 0; r < rows; ++r) out[r] += gain_(r, m) * z;
  }
}

Eigen::VectorXd CompiledPolyVector::Evaluate(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(size());
  Evaluate(x.data(), out.data());
  return out;
}

void to_json(nlohmann::json& j, const Monomial& m) { j = m.exponents(); }

void from_json(const nlohmann::json& j, Monomial& m) {
  m = Monomial(j.get<std::vector<int>>());
}

void to_json(nlohmann::json& j, const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, c] : p.terms())
    terms.push_back({{"exp", m.exponents()}, {"coef", c}});
  j = {{"num_vars", p.num_vars()}, {"terms", terms}};
}

void from_json(const nlohmann::json& j, Polynomial& p) {
  const int n = j.at("num_vars").get<int>();
  p = Polynomial(n);
  for (const auto& t : j.at("terms")) {
    Monomial m(t.at("exp").get<std::vector<int>>());
    if (m.num_vars() != n)
      throw std::invalid_argument("term exponent length differs from num_vars");
    p.AddTerm(m, t.at("coef").get<double>());
  }
}

void to_json(nlohmann::json& j, const PolyMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) entries.push_back(m(r, c));
  j = {{"rows", m.rows()},
       {"cols", m.cols()},
       {"num_vars", m.num_vars()},
       {"entries", entries}};
}

void from_json(const nlohmann::json& j, PolyMatrix& m) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  m = PolyMatrix(rows, cols, j.at("num_vars").get<int>());
  const auto& e = j.at("entries");
  if (static_cast<int>(e.size()) != rows * cols)
    throw std::invalid_argument("poly matrix entry count mismatch");
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = e[r * cols + c].get<Polynomial>();
}

}  // namespace certnet
