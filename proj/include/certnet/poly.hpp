#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace certnet {

/// Exponent vector of a monomial in a fixed number of variables.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);
  /// The constant monomial in `num_vars` variables.
  static Monomial One(int num_vars);
  /// The monomial x_index.
  static Monomial Var(int num_vars, int index);

  int num_vars() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  int operator[](int i) const { return exps_[i]; }
  const std::vector<int>& exponents() const { return exps_; }

  Monomial operator*(const Monomial& other) const;
  /// Divides by x_index; the exponent must be positive.
  Monomial DivideByVar(int index) const;
  double Evaluate(std::span<const double> x) const;

  bool operator==(const Monomial& other) const { return exps_ == other.exps_; }
  bool operator!=(const Monomial& other) const { return exps_ != other.exps_; }

  std::string ToString() const;

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

/// Graded-lex order: lower total degree first; within a degree, larger
/// exponent on an earlier variable first (x1^2 < x1 x2 < x2^2).
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// All monomials of total degree <= max_degree in graded-lex order.
std::vector<Monomial> MonomialBasis(int num_vars, int max_degree);
/// All monomials with min_degree <= total degree <= max_degree.
std::vector<Monomial> MonomialBasis(int num_vars, int min_degree,
                                    int max_degree);

/// Sparse multivariate polynomial with real coefficients.  Terms with
/// |coefficient| <= kDropTolerance are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLexLess>;
  static constexpr double kDropTolerance = 1e-14;

  Polynomial() = default;
  explicit Polynomial(int num_vars) : num_vars_(num_vars) {}
  Polynomial(int num_vars, const TermMap& terms);
  static Polynomial Constant(int num_vars, double c);
  static Polynomial Var(int num_vars, int index);
  static Polynomial FromMonomial(const Monomial& m, double coef = 1.0);

  int num_vars() const { return num_vars_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  const TermMap& terms() const { return terms_; }
  double coefficient(const Monomial& m) const;

  /// Adds `c` to the coefficient of `m`, re-canonicalizing.
  void AddTerm(const Monomial& m, double c);

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const { return *this * -1.0; }
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);

  double Evaluate(std::span<const double> x) const;
  double Evaluate(const Eigen::VectorXd& x) const {
    return Evaluate(std::span<const double>(x.data(), x.size()));
  }

  /// Exact (double) equality of term maps.
  bool operator==(const Polynomial& other) const;
  /// Largest coefficient magnitude of (this - other).
  double MaxCoefficientDifference(const Polynomial& other) const;

  std::string ToString() const;

 private:
  void CheckVars(const Polynomial& other) const;
  int num_vars_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

/// Dense matrix of polynomials sharing one variable count.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols, int num_vars);
  static PolyMatrix FromConstant(const Eigen::MatrixXd& m, int num_vars);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int num_vars() const { return num_vars_; }

  Polynomial& operator()(int r, int c) { return entries_[r * cols_ + c]; }
  const Polynomial& operator()(int r, int c) const {
    return entries_[r * cols_ + c];
  }

  PolyMatrix operator*(const PolyMatrix& other) const;
  PolyMatrix operator+(const PolyMatrix& other) const;
  PolyMatrix operator-(const PolyMatrix& other) const;
  PolyMatrix Transpose() const;
  int degree() const;

  Eigen::MatrixXd Evaluate(std::span<const double> x) const;
  Eigen::MatrixXd Evaluate(const Eigen::VectorXd& x) const {
    return Evaluate(std::span<const double>(x.data(), x.size()));
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  int num_vars_ = 0;
  std::vector<Polynomial> entries_;
};

PolyMatrix operator*(const Eigen::MatrixXd& a, const PolyMatrix& b);
PolyMatrix operator*(const PolyMatrix& a, const Eigen::MatrixXd& b);

/// Polynomial vector compiled to K * z(x) over a shared monomial list, for
/// hot-loop evaluation (controllers inside the network integrator).
class CompiledPolyVector {
 public:
  CompiledPolyVector() = default;
  explicit CompiledPolyVector(const std::vector<Polynomial>& polys);

  int size() const { return static_cast<int>(gain_.rows()); }
  int num_vars() const { return num_vars_; }
  /// Writes the values of all components at x into out (length size()).
  void Evaluate(const double* x, double* out) const;
  Eigen::VectorXd Evaluate(const Eigen::VectorXd& x) const;

 private:
  int num_vars_ = 0;
  int max_exp_ = 0;
  std::vector<int> exps_;  // row-major monomials x num_vars
  Eigen::MatrixXd gain_;   // components x monomials
};

void to_json(nlohmann::json& j, const Monomial& m);
void from_json(const nlohmann::json& j, Monomial& m);
/// {"num_vars": n, "terms": [{"exp": [...], "coef": c}, ...]} in graded-lex
/// order.
void to_json(nlohmann::json& j, const Polynomial& p);
void from_json(const nlohmann::json& j, Polynomial& p);
void to_json(nlohmann::json& j, const PolyMatrix& m);
void from_json(const nlohmann::json& j, PolyMatrix& m);

}  // namespace certnet
