#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "certnet/poly.hpp"
#include "certnet/sdp.hpp"

namespace certnet {

struct Box {
  Eigen::VectorXd lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool Contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  Eigen::VectorXd Center() const { return 0.5 * (lo + hi); }
  Eigen::VectorXd HalfWidth() const { return 0.5 * (hi - lo); }
};

enum class SetKind { kState, kInitial, kUnsafe };

struct SetSpec {
  SetKind kind = SetKind::kState;
  std::vector<Box> boxes;

  bool Contains(const Eigen::VectorXd& x, double tol = 0.0) const;
};

/// Checks low < high per dimension and a common dimension.
void ValidateSet(const SetSpec& s);
/// True when some initial box intersects some unsafe box.
bool SetsIntersect(const SetSpec& a, const SetSpec& b);

/// For each box, g_j(x) = (x_j - l_j)(u_j - x_j), one per dimension.
std::vector<std::vector<Polynomial>> BoxToPolys(const SetSpec& s);

/// constant + sum coef_v * y_v over LMI decision variables.
struct AffineExpr {
  double constant = 0.0;
  std::map<int, double> terms;

  AffineExpr() = default;
  AffineExpr(double c) : constant(c) {}  // NOLINT: implicit by design
  static AffineExpr Var(int v, double coef = 1.0);

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(double s);
  AffineExpr operator+(const AffineExpr& o) const { return AffineExpr(*this) += o; }
  AffineExpr operator-(const AffineExpr& o) const { return AffineExpr(*this) -= o; }
  AffineExpr operator*(double s) const { return AffineExpr(*this) *= s; }
  bool is_zero() const { return constant == 0.0 && terms.empty(); }
  double Evaluate(const Eigen::VectorXd& y) const;
};

/// Polynomial in x whose coefficients are affine in decision variables.
class AffinePoly {
 public:
  using TermMap = std::map<Monomial, AffineExpr, GradedLexLess>;

  AffinePoly() = default;
  explicit AffinePoly(int num_vars) : num_vars_(num_vars) {}
  AffinePoly(const Polynomial& p);  // NOLINT: implicit lift

  int num_vars() const { return num_vars_; }
  int degree() const;
  const TermMap& terms() const { return terms_; }
  void AddTerm(const Monomial& m, const AffineExpr& c);

  AffinePoly& operator+=(const AffinePoly& o);
  AffinePoly& operator-=(const AffinePoly& o);
  AffinePoly operator+(const AffinePoly& o) const { return AffinePoly(*this) += o; }
  AffinePoly operator-(const AffinePoly& o) const { return AffinePoly(*this) -= o; }
  AffinePoly operator*(double s) const;
  AffinePoly operator*(const Polynomial& p) const;

  /// Substitutes decision values.
  Polynomial Evaluate(const Eigen::VectorXd& y) const;

 private:
  int num_vars_ = 0;
  TermMap terms_;
};

class AffinePolyMatrix {
 public:
  AffinePolyMatrix() = default;
  AffinePolyMatrix(int rows, int cols, int num_vars);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int num_vars() const { return num_vars_; }
  AffinePoly& operator()(int r, int c) { return e_[r * cols_ + c]; }
  const AffinePoly& operator()(int r, int c) const { return e_[r * cols_ + c]; }
  int degree() const;
  PolyMatrix Evaluate(const Eigen::VectorXd& y) const;

 private:
  int rows_ = 0, cols_ = 0, num_vars_ = 0;
  std::vector<AffinePoly> e_;
};

/// Certificate of an SOS constraint, stored in box-normalized variables
/// x = center + scale .* s.  expression(s) - sum_j multipliers_j(s) *
/// box_polys_j(s) * I = (I_m (x) z(s))' Q (I_m (x) z(s)).
struct GramWitness {
  std::string label;
  int rows = 1;
  std::vector<Monomial> basis;
  Eigen::MatrixXd Q;
  Eigen::VectorXd center, scale;
  PolyMatrix expression;
  std::vector<Polynomial> box_polys;
  std::vector<Polynomial> multipliers;
  std::vector<Monomial> multiplier_basis;
  std::vector<Eigen::MatrixXd> multiplier_grams;  // empty for constants
  double residual = 0.0;
  double min_eigenvalue = 0.0;
};

struct GramCheck {
  double residual;        // max coefficient mismatch / max(1, max |coef|)
  double min_eigenvalue;  // over Q, multiplier Grams and constant multipliers
  bool ok(double res_tol = 1e-6, double eig_tol = 1e-8) const {
    return residual <= res_tol && min_eigenvalue >= -eig_tol;
  }
};

/// Recomputes residual and eigenvalues from the stored data alone.
GramCheck RecheckWitness(const GramWitness& w);

void to_json(nlohmann::json& j, const GramWitness& w);
void from_json(const nlohmann::json& j, GramWitness& w);

/// Default multiplier degree: max(0, deg - 2) rounded up to even.
int DefaultMultiplierDegree(int expr_degree);

/// Builds an LmiProblem from SOS constraints over boxes.
class SosProgram {
 public:
  explicit SosProgram(int num_vars) : num_vars_(num_vars) {}

  int num_vars() const { return num_vars_; }
  LmiProblem& lmi() { return lmi_; }
  const LmiProblem& lmi() const { return lmi_; }

  /// expr(x) - sum_j lambda_j(x) g_j(x) is SOS; lambda_j SOS of degree
  /// mult_deg (negative: default rule).  Without a domain: expr is SOS.
  int AddScalarSos(const AffinePoly& expr, const std::optional<Box>& domain,
                   int mult_deg = -1, const std::string& label = "");
  /// Matrix version with (lambda' g) I subtracted.
  int AddMatrixSos(const AffinePolyMatrix& expr,
                   const std::optional<Box>& domain, int mult_deg = -1,
                   const std::string& label = "");

  int num_constraints() const { return static_cast<int>(cons_.size()); }
  GramWitness Recover(int id, const LmiSolution& sol) const;

 private:
  struct Constraint {
    std::string label;
    int rows;
    AffinePolyMatrix scaled;  // expression in normalized variables
    Eigen::VectorXd center, scale;
    std::vector<Monomial> basis;
    int gram_block;
    int gram_first_var;
    std::vector<Polynomial> box_polys;
    int mult_deg;
    std::vector<Monomial> mult_basis;
    std::vector<int> mult_blocks;      // Gram block per multiplier (deg > 0)
    std::vector<int> mult_first_var;   // first variable per multiplier
  };

  int num_vars_;
  LmiProblem lmi_;
  std::vector<Constraint> cons_;
};

}  // namespace certnet
