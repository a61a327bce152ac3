#pragma once

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "certnet/poly.hpp"

namespace certnet {

/// Ordered list of monomials without the constant term, so M(0) = 0.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(int num_vars, std::vector<Monomial> monomials);

  /// All monomials of total degree 1..max_degree in graded-lex order.
  static Dictionary Build(int num_vars, int max_degree);

  int num_vars() const { return num_vars_; }
  int size() const { return static_cast<int>(monomials_.size()); }
  int max_degree() const;
  const std::vector<Monomial>& monomials() const { return monomials_; }
  const Monomial& operator[](int k) const { return monomials_[k]; }
  int IndexOf(const Monomial& m) const;

  /// True iff every monomial in `true_monomials` appears in the dictionary.
  bool Contains(const std::vector<Monomial>& true_monomials) const;

  /// M(x) evaluated at a point.
  Eigen::VectorXd Evaluate(const double* x) const;
  Eigen::VectorXd Evaluate(const Eigen::VectorXd& x) const {
    return Evaluate(x.data());
  }

  /// Factorization M(x) = Upsilon(x) x.  Row k holds m_k / x_j in column j,
  /// j being the first variable with a positive exponent in m_k.  The
  /// identity is checked symbolically before returning.
  PolyMatrix Factorize() const;

 private:
  int num_vars_ = 0;
  std::vector<Monomial> monomials_;
};

void to_json(nlohmann::json& j, const Dictionary& d);
void from_json(const nlohmann::json& j, Dictionary& d);

}  // namespace certnet
