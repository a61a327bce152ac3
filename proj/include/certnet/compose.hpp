#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "certnet/csbc.hpp"
#include "certnet/plant.hpp"

namespace certnet {

/// The scalars composition needs from one subsystem certificate.
struct CertSummary {
  double eps = 0, rho = 0, phi = 0, gamma = 0, beta = 0;
};

/// Per-subsystem summaries from per-template certificates; rho is recomputed
/// from each subsystem's own coupling matrix.
std::vector<CertSummary> SummarizeNetwork(const NetworkSpec& spec,
                                          const std::vector<CsbcCertificate>& template_certs);

struct GainMatrix {
  Eigen::VectorXd eps_hat;             // diagonal of the decay matrix
  Eigen::SparseMatrix<double> delta;   // rho_i / phi_j on edges j -> i
};

GainMatrix BuildGainMatrix(const std::vector<CertSummary>& certs, const NetworkSpec& spec);

struct ComposeReport {
  Eigen::VectorXd varpi;  // column sums of -eps_hat + delta
  double max_varpi = 0;
  double gamma = 0, beta = 0, eps = 0;
  bool pass = false;
  std::string failure_reason;
};

ComposeReport CheckCompose(const GainMatrix& g, const std::vector<CertSummary>& certs);

/// Network barrier sum_i x_i' P_i x_i and the stacked decentralized controller.
class NetworkCbc {
 public:
  NetworkCbc(const Network& net, const std::vector<CsbcCertificate>& template_certs,
             const ComposeReport& report);

  double eps() const { return eps_; }
  double Value(const Eigen::VectorXd& x) const;
  double SubValue(int i, const Eigen::VectorXd& x) const;
  /// Writes nu_i(x_i) for every subsystem into u.
  void Control(const Eigen::VectorXd& x, Eigen::VectorXd& u) const;

 private:
  const Network& net_;
  std::vector<Eigen::MatrixXd> P_;
  std::vector<CompiledPolyVector> ctrl_;
  double eps_;
};

void to_json(nlohmann::json& j, const CertSummary& s);
void to_json(nlohmann::json& j, const ComposeReport& r);

}  // namespace certnet
