#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "certnet/compose.hpp"
#include "certnet/csbc.hpp"
#include "certnet/plant.hpp"

namespace certnet {

/// Worst sampled margins, each normalized by 1 + the magnitude of the terms
/// involved.  A margin >= 0 means the condition holds at every sample.
struct CsbcMargins {
  double lower_bound = std::numeric_limits<double>::infinity();  // B >= phi |x|^2 on X
  double initial = std::numeric_limits<double>::infinity();      // B <= gamma on X0
  double unsafe = std::numeric_limits<double>::infinity();       // B >= beta on Xu
  double dissipation = std::numeric_limits<double>::infinity();  // LB <= -eps B + rho |w|^2
  int samples = 0;

  double worst() const;
  bool ok(double tol = 1e-6) const { return worst() >= -tol; }
};

/// Samples the four sub-barrier conditions against the true model.  w is drawn
/// from the product of `neighbor_boxes` (one box per incoming neighbor).
/// Initial-set box corners are always included.
CsbcMargins CheckCsbc(const SubsystemModel& m, const CsbcCertificate& cert,
                      const std::vector<SetSpec>& neighbor_states, int samples, std::uint64_t seed);

/// Neighbor state sets of subsystem i, in the order of its internal input.
std::vector<SetSpec> NeighborStates(const NetworkSpec& spec, int i);

/// Tracks B(x(t)) <= 1.01 e^{-eps t} B(x(0)) + 1e-6.
class DecayMonitor {
 public:
  explicit DecayMonitor(double eps) : eps_(eps) {}
  void Observe(double t, double b);
  int samples() const { return samples_; }
  int violations() const { return violations_; }
  /// Largest B(t) - envelope(t) seen (negative when clean).
  double worst_excess() const { return worst_; }

 private:
  double eps_;
  double b0_ = 0;
  int samples_ = 0, violations_ = 0;
  double worst_ = -std::numeric_limits<double>::infinity();
};

DecayMonitor CheckDecay(const std::vector<double>& times, const std::vector<double>& barrier, double eps);

/// First time each subsystem enters its unsafe set.  States are laid out as
/// consecutive blocks whose sizes follow the set dimensions.
class SafetyMonitor {
 public:
  explicit SafetyMonitor(std::vector<const SetSpec*> unsafe);
  explicit SafetyMonitor(const NetworkSpec& spec);
  void Observe(double t, const Eigen::VectorXd& x);
  const std::vector<std::optional<double>>& first_violation() const { return first_; }
  int unsafe_count() const { return count_; }
  bool clean() const { return count_ == 0; }

 private:
  std::vector<const SetSpec*> sets_;
  std::vector<int> offset_;
  std::vector<std::optional<double>> first_;
  int count_ = 0;
};

std::vector<std::optional<double>> CheckSafety(const Trajectory& tr, const std::vector<SetSpec>& unsafe);

struct WitnessReport {
  int count = 0, failed = 0;
  double max_residual = 0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double equality_residual = 0;
  bool ok = false;
};

/// Recomputes every Gram residual and eigenvalue plus the data equality
/// residual (thresholds 1e-6, -1e-8, 1e-8).
WitnessReport RecheckWitnesses(const CsbcCertificate& cert);

struct SimConfig {
  int runs = 50;
  double t_end = 5.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  bool open_loop = false;
  /// Subsystems whose states are stored (first run only).
  std::vector<int> record;
  int record_stride = 10;
};

struct RunReport {
  double b0 = 0;
  int unsafe_subsystems = 0;
  std::optional<double> first_violation;
  int decay_violations = 0;
  double decay_worst_excess = 0;
  bool blew_up = false;
};

struct SimReport {
  std::vector<RunReport> runs;
  /// t plus the states of SimConfig::record for run 0, every record_stride steps.
  Trajectory recorded;
  int unsafe_runs = 0;
  int decay_violations = 0;
  bool any_blew_up = false;
  bool safe() const { return unsafe_runs == 0 && !any_blew_up; }
};

/// Closed-loop (or open-loop) simulation from random X0 states.  The barrier
/// of `cbc` drives the decay check; its controller is applied unless open_loop.
SimReport SimulateNetwork(const Network& net, const NetworkCbc* cbc, const SimConfig& cfg);

struct TemplateVerdict {
  std::string name;
  CsbcMargins margins;
  WitnessReport witnesses;
};

struct VerifyReport {
  std::vector<TemplateVerdict> templates;
  std::optional<ComposeReport> compose;
  std::optional<SimReport> simulation;
  bool pass() const;
};

void to_json(nlohmann::json& j, const CsbcMargins& m);
void to_json(nlohmann::json& j, const WitnessReport& w);
void to_json(nlohmann::json& j, const SimReport& r);
void to_json(nlohmann::json& j, const VerifyReport& r);

}  // namespace certnet
