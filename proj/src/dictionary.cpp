#include "certnet/dictionary.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace certnet {

Dictionary::Dictionary(int num_vars, std::vector<Monomial> monomials)
    : num_vars_(num_vars), monomials_(std::move(monomials)) {
  std::set<Monomial, GradedLexLess> seen;
  for (const auto& m : monomials_) {
    if (m.num_vars() != num_vars_)
      throw std::invalid_argument("dictionary monomial has wrong arity");
    if (m.degree() < 1)
      throw std::invalid_argument("dictionary may not contain the constant");
    if (!seen.insert(m).second)
      throw std::invalid_argument("duplicate dictionary monomial");
  }
}

Dictionary Dictionary::Build(int num_vars, int max_degree) {
  if (max_degree < 1)
    throw std::invalid_argument("dictionary degree must be at least 1");
  if (num_vars < 1) throw std::invalid_argument("need at least one variable");
  return Dictionary(num_vars, MonomialBasis(num_vars, 1, max_degree));
}

int Dictionary::max_degree() const {
  int d = 0;
  for (const auto& m : monomials_) d = std::max(d, m.degree());
  return d;
}

int Dictionary::IndexOf(const Monomial& m) const {
  for (int k = 0; k < size(); ++k)
    if (monomials_[k] == m) return k;
  return -1;
}

bool Dictionary::Contains(const std::vector<Monomial>& true_monomials) const {
  return std::all_of(true_monomials.begin(), true_monomials.end(),
                     [&](const Monomial& m) { return IndexOf(m) >= 0; });
}

Eigen::VectorXd Dictionary::Evaluate(const double* x) const {
  Eigen::VectorXd v(size());
  std::span<const double> xs(x, num_vars_);
  for (int k = 0; k < size(); ++k) v[k] = monomials_[k].Evaluate(xs);
  return v;
}

PolyMatrix Dictionary::Factorize() const {
  PolyMatrix ups(size(), num_vars_, num_vars_);
  for (int k = 0; k < size(); ++k) {
    const Monomial& m = monomials_[k];
    int j = 0;
    while (m[j] == 0) ++j;
    ups(k, j) = Polynomial::FromMonomial(m.DivideByVar(j));
  }
  PolyMatrix x(num_vars_, 1, num_vars_);
  for (int j = 0; j < num_vars_; ++j) x(j, 0) = Polynomial::Var(num_vars_, j);
  PolyMatrix prod = ups * x;
  for (int k = 0; k < size(); ++k) {
    if (!(prod(k, 0) == Polynomial::FromMonomial(monomials_[k])))
      throw std::logic_error("factorization identity failed");
  }
  return ups;
}

void to_json(nlohmann::json& j, const Dictionary& d) {
  j = nlohmann::json::array();
  for (const auto& m : d.monomials()) j.push_back(m.exponents());
}

void from_json(const nlohmann::json& j, Dictionary& d) {
  std::vector<Monomial> ms;
  for (const auto& e : j) ms.emplace_back(e.get<std::vector<int>>());
  if (ms.empty()) throw std::invalid_argument("empty dictionary");
  const int n = ms.front().num_vars();
  d = Dictionary(n, std::move(ms));
}

}  // namespace certnet
