#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "certnet/data.hpp"
#include "certnet/dictionary.hpp"
#include "certnet/poly.hpp"
#include "certnet/sdp.hpp"
#include "certnet/sos.hpp"

namespace certnet {

struct SynthConfig {
  std::vector<double> eps_grid{0.99, 0.9, 0.5, 0.1, 0.05, 0.01};
  int deg_h = -1;           // negative: dictionary degree - 1
  int mult_deg = -1;        // matrix condition multipliers (negative: default rule)
  int level_mult_deg = -1;  // level-set programs
  double c_min = 1e-3;      // C >= c_min I
  double c_max = 0.1;       // C <= c_max I fixes the (otherwise free) scale of P
  double pi_min = 1e-6;     // feasibility threshold on the optimal pi
  double pi_max = 1.0;
  double mu_min = 1e-6;
  double mu_max = 1e4;
  double max_condition = 1e8;
  SdpOptions sdp;

  void Validate() const;
};

/// Everything synthesis may use: measured data, the dictionary, the known
/// coupling of the representative subsystem, and its sets.
struct SynthesisProblem {
  TrajectoryData data;
  Dictionary dict;
  Eigen::MatrixXd D;  // n x (stacked neighbor dimension)
  SetSpec state, initial, unsafe;

  int n() const { return dict.num_vars(); }
};

struct EpsAttempt {
  double eps;
  std::string status;
  double pi;  // optimal value, NaN when the solver failed
};

struct Phase1Result {
  bool feasible = false;
  double eps = 0.0;
  Eigen::MatrixXd C;
  PolyMatrix H;  // T x n
  double pi = 0.0, mu = 0.0;
  std::vector<GramWitness> witnesses;
  std::vector<EpsAttempt> attempts;
};

struct LevelSets {
  double phi = 0.0, gamma = 0.0, beta = 0.0;
  std::vector<GramWitness> witnesses;
};

struct CsbcCertificate {
  std::string name;
  Eigen::MatrixXd C, P;
  PolyMatrix H;
  double phi = 0, gamma = 0, beta = 0, eps = 0, pi = 0, mu = 0, rho = 0;
  std::vector<Polynomial> controller;
  std::vector<GramWitness> gram_witnesses;
  // Data needed to recheck N0 H(x) = Upsilon(x) C.
  Eigen::MatrixXd N0;
  Dictionary dict;

  int n() const { return static_cast<int>(C.rows()); }
  double Barrier(const Eigen::VectorXd& x) const { return x.dot(P * x); }
};

/// Residual max |coef(N0 H(x) - Upsilon(x) C)|.
double EqualityResidual(const Eigen::MatrixXd& N0, const Dictionary& dict, const PolyMatrix& H,
                        const Eigen::MatrixXd& C);

/// [[G, H'], [H, mu I]] for given numeric values (used by sampled checks).
PolyMatrix DissipationMatrix(const SynthesisProblem& prob, double eps, const Eigen::MatrixXd& C,
                             const PolyMatrix& H, double pi, double mu);

/// Phase 1 at one decay rate: maximize pi; feasible iff the optimum reaches
/// cfg.pi_min and the recovered certificate rechecks.
Phase1Result Phase1AtEps(const SynthesisProblem& prob, double eps, const SynthConfig& cfg);
/// Walks cfg.eps_grid from the largest value and stops at the first feasible one.
Phase1Result Phase1(const SynthesisProblem& prob, const SynthConfig& cfg);
LevelSets Phase2(const SynthesisProblem& prob, const Eigen::MatrixXd& C, const SynthConfig& cfg);

/// nu(x) = U0 H(x) C^{-1} x.
std::vector<Polynomial> ExtractController(const Eigen::MatrixXd& U0, const PolyMatrix& H,
                                          const Eigen::MatrixXd& C);
/// |D|_2^2 / pi.
double InteractionGain(const Eigen::MatrixXd& D, double pi);

enum class SynthStatus { kOk, kInfeasible, kLevelSets, kRejected };
std::string ToString(SynthStatus s);

struct SynthResult {
  SynthStatus status = SynthStatus::kInfeasible;
  std::string message;
  CsbcCertificate cert;
  std::vector<EpsAttempt> attempts;
};

SynthResult Synthesize(const SynthesisProblem& prob, const SynthConfig& cfg,
                       const std::string& name = "");

/// Same certificate for a subsystem with a different coupling matrix:
/// only rho changes.
CsbcCertificate Rebind(const CsbcCertificate& c, const Eigen::MatrixXd& D);

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);
void to_json(nlohmann::json& j, const CsbcCertificate& c);
void from_json(const nlohmann::json& j, CsbcCertificate& c);

}  // namespace certnet
