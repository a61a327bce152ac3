#include "certnet/compose.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "certnet/json_util.hpp"

namespace certnet {

std::vector<CertSummary> SummarizeNetwork(const NetworkSpec& spec,
                                          const std::vector<CsbcCertificate>& template_certs) {
  if (template_certs.size() != spec.templates.size())
    throw std::invalid_argument("need one certificate per template");
  std::vector<CertSummary> out(spec.Q);
  // Subsystems sharing a template and a neighbor count share rho.
  std::vector<std::vector<double>> rho_cache(spec.templates.size());
  for (int i = 0; i < spec.Q; ++i) {
    const int t = spec.TemplateOf(i);
    const CsbcCertificate& c = template_certs[t];
    const int k = NumNeighbors(spec, i);
    auto& cache = rho_cache[t];
    if (static_cast<int>(cache.size()) <= k) cache.resize(k + 1, -1.0);
    if (cache[k] < 0) cache[k] = InteractionGain(spec.model(i).CouplingMatrix(k), c.pi);
    out[i] = {c.eps, cache[k], c.phi, c.gamma, c.beta};
  }
  return out;
}

GainMatrix BuildGainMatrix(const std::vector<CertSummary>& certs, const NetworkSpec& spec) {
  const int q = spec.Q;
  if (static_cast<int>(certs.size()) != q) throw std::invalid_argument("need one certificate per subsystem");
  GainMatrix g;
  g.eps_hat.resize(q);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < q; ++i) {
    if (!(certs[i].phi > 0)) throw std::invalid_argument("phi must be positive");
    g.eps_hat[i] = certs[i].eps;
  }
  for (int i = 0; i < q; ++i)
    for (int j : Neighbors(spec, i))
      if (certs[i].rho != 0.0) trip.emplace_back(i, j, certs[i].rho / certs[j].phi);
  g.delta.resize(q, q);
  g.delta.setFromTriplets(trip.begin(), trip.end());
  return g;
}

ComposeReport CheckCompose(const GainMatrix& g, const std::vector<CertSummary>& certs) {
  const int q = static_cast<int>(g.eps_hat.size());
  if (g.delta.rows() != q || g.delta.cols() != q || static_cast<int>(certs.size()) != q)
    throw std::invalid_argument("inconsistent composition shapes");
  ComposeReport r;
  r.varpi = -g.eps_hat;
  for (int j = 0; j < q; ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.delta, j); it; ++it) r.varpi[j] += it.value();
  r.max_varpi = q ? r.varpi.maxCoeff() : 0.0;
  double sg = 0, sb = 0;
  for (const auto& c : certs) {
    sg += c.gamma;
    sb += c.beta;
  }
  r.gamma = sg;
  r.beta = sb;
  std::ostringstream why;
  if (!(r.max_varpi < 0)) why << "small-gain: max column sum " << r.max_varpi << " is not negative";
  if (!(sb > sg)) {
    if (!why.str().empty()) why << "; ";
    why << "level-sets: sum beta " << sb << " <= sum gamma " << sg;
  }
  r.failure_reason = why.str();
  r.pass = r.failure_reason.empty();
  if (r.pass) r.eps = 0.99 * std::abs(r.max_varpi);
  return r;
}

NetworkCbc::NetworkCbc(const Network& net, const std::vector<CsbcCertificate>& template_certs,
                       const ComposeReport& report)
    : net_(net), eps_(report.eps) {
  if (!report.pass) throw std::invalid_argument("composition did not pass");
  if (template_certs.size() != net.spec().templates.size())
    throw std::invalid_argument("need one certificate per template");
  for (const auto& c : template_certs) {
    P_.push_back(c.P);
    ctrl_.emplace_back(c.controller);
  }
}

double NetworkCbc::SubValue(int i, const Eigen::VectorXd& x) const {
  const auto xi = x.segment(net_.state_offset(i), net_.n(i));
  return xi.dot(P_[net_.spec().TemplateOf(i)] * xi);
}

double NetworkCbc::Value(const Eigen::VectorXd& x) const {
  double v = 0;
  for (int i = 0; i < net_.Q(); ++i) v += SubValue(i, x);
  return v;
}

void NetworkCbc::Control(const Eigen::VectorXd& x, Eigen::VectorXd& u) const {
  u.resize(net_.input_dim());
  for (int i = 0; i < net_.Q(); ++i)
    ctrl_[net_.spec().TemplateOf(i)].Evaluate(x.data() + net_.state_offset(i), u.data() + net_.input_offset(i));
}

void to_json(nlohmann::json& j, const CertSummary& s) {
  j = {{"eps", s.eps}, {"rho", s.rho}, {"phi", s.phi}, {"gamma", s.gamma}, {"beta", s.beta}};
}

void to_json(nlohmann::json& j, const ComposeReport& r) {
  j = {{"pass", r.pass},
       {"gamma", r.gamma},
       {"beta", r.beta},
       {"eps", r.eps},
       {"max_varpi", r.max_varpi},
       {"min_varpi", r.varpi.size() ? r.varpi.minCoeff() : 0.0},
       {"varpi", std::vector<double>(r.varpi.data(), r.varpi.data() + r.varpi.size())}};
  if (!r.pass) j["failure_reason"] = r.failure_reason;
}

}  // namespace certnet
