#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "certnet/dictionary.hpp"
#include "certnet/poly.hpp"
#include "certnet/sos.hpp"

namespace certnet {

/// Ground truth dx/dt = A M(x) + B nu + D w for one subsystem.  D is the
/// per-edge block D_ij (n x n_j), repeated once per incoming neighbor.
struct SubsystemModel {
  std::string name;
  Dictionary monomials;      // true monomials M(x)
  Eigen::MatrixXd A;         // n x |M|
  Eigen::MatrixXd B;         // n x m
  Eigen::MatrixXd coupling;  // n x n
  int dict_degree = 2;       // degree of the dictionary handed to synthesis
  SetSpec state, initial, unsafe;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  /// Synthesis dictionary: all monomials of degree 1..dict_degree.
  Dictionary SynthesisDictionary() const { return Dictionary::Build(n(), dict_degree); }
  /// A M(x) as polynomials.
  std::vector<Polynomial> DriftPolys() const;
  /// D_i for `num_neighbors` incoming edges: [coupling, ..., coupling].
  Eigen::MatrixXd CouplingMatrix(int num_neighbors) const;
  /// A M(x) + B nu + D w, with w the stacked neighbor states.
  Eigen::VectorXd Deriv(const Eigen::VectorXd& x, const Eigen::VectorXd& nu,
                        const Eigen::VectorXd& w) const;
  /// Same value through A Upsilon(x) x over the synthesis dictionary.
  Eigen::VectorXd DerivFactored(const Eigen::VectorXd& x, const Eigen::VectorXd& nu,
                                const Eigen::VectorXd& w) const;
  void Validate() const;
};

enum class Topology { kFully, kRing, kLine, kStar, kBinary, kCustom };
Topology TopologyFromString(const std::string& s);
std::string ToString(Topology t);

/// Data-collection and synthesis defaults attached to a benchmark.
struct BenchmarkDefaults {
  int samples = 20;
  double noise_bound = 0.0;
  double tau = 0.01;
  double input_amplitude = 1.0;
  double start_shrink = 0.5;
  int experiments = 1;
};

struct NetworkSpec {
  std::string name;
  int Q = 1;
  Topology topology = Topology::kRing;
  std::vector<SubsystemModel> templates;
  /// Template of each subsystem; empty means every subsystem uses templates[0].
  std::vector<int> template_of;
  /// In-neighbors per subsystem (0-based), only for kCustom.
  std::vector<std::vector<int>> custom_in;
  BenchmarkDefaults defaults;

  int TemplateOf(int i) const { return template_of.empty() ? 0 : template_of.at(i); }
  const SubsystemModel& model(int i) const { return templates.at(TemplateOf(i)); }
  void Validate() const;
};

/// Sources j feeding w_i, ascending (0-based indices).
std::vector<int> Neighbors(const NetworkSpec& spec, int i);
int NumNeighbors(const NetworkSpec& spec, int i);

/// Closed-form evaluator for the assembled network dx/dt = A(x) x + B nu.
/// Fully connected coupling uses one global sum, so evaluation is O(Q).
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  int Q() const { return spec_.Q; }
  int dim() const { return state_off_.back(); }
  int input_dim() const { return input_off_.back(); }
  int state_offset(int i) const { return state_off_[i]; }
  int input_offset(int i) const { return input_off_[i]; }
  int n(int i) const { return state_off_[i + 1] - state_off_[i]; }
  int m(int i) const { return input_off_[i + 1] - input_off_[i]; }
  const std::vector<int>& neighbors(int i) const { return nbrs_[i]; }

  /// Stacked neighbor states w_i = [x_j]_{j in neighbors(i)}.
  Eigen::VectorXd InternalInput(int i, const Eigen::VectorXd& x) const;
  void Deriv(const Eigen::VectorXd& x, const Eigen::VectorXd& nu, Eigen::VectorXd& dx) const;
  /// Off-diagonal block (i, j) of A(x): D_ij on edges, zero otherwise.
  Eigen::MatrixXd CouplingBlock(int i, int j) const;

 private:
  NetworkSpec spec_;
  std::vector<int> state_off_, input_off_;
  std::vector<std::vector<int>> nbrs_;
  std::vector<CompiledPolyVector> drift_;  // per template
  bool uniform_coupling_ = true;
};

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // samples x recorded state columns
  Eigen::MatrixXd inputs;  // samples x input dimension
  bool blew_up = false;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                  Eigen::VectorXd& dx)>;
/// Input at time t in state x (evaluated at every RK stage).
using InputLaw = std::function<void(double t, const Eigen::VectorXd& x, Eigen::VectorXd& u)>;
/// Called at every grid point with the state and the input at that point.
/// Returning false stops integration.
using StepObserver = std::function<bool(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& u)>;

struct IntegrateResult {
  int steps = 0;
  bool blew_up = false;
  bool stopped = false;
  Eigen::VectorXd final_state;
};

/// Classical fixed-step RK4 on [0, t_end].  Observer sees t = 0 and every step.
IntegrateResult Integrate(const OdeRhs& f, const InputLaw& law, int input_dim,
                          const Eigen::VectorXd& x0, double t_end, double dt,
                          const StepObserver& obs);
/// Convenience wrapper that stores every grid point.  t_end <= 0 gives an
/// empty trajectory.
Trajectory IntegrateRecord(const OdeRhs& f, const InputLaw& law, int input_dim,
                           const Eigen::VectorXd& x0, double t_end, double dt);

/// CSV with header t,x1,...  (column names supplied by the caller).
std::string TrajectoryCsv(const Trajectory& tr, const std::vector<std::string>& columns);

/// The seven homogeneous networks and the heterogeneous line network.
std::vector<std::string> BenchmarkNames();
NetworkSpec Benchmark(const std::string& name);
/// Benchmark with a different subsystem count (same per-subsystem models).
NetworkSpec Benchmark(const std::string& name, int Q);
/// Spacecraft line network for principal moments of inertia J.
NetworkSpec SpacecraftLine(int Q, const Eigen::Vector3d& J);

void to_json(nlohmann::json& j, const SubsystemModel& m);
void from_json(const nlohmann::json& j, SubsystemModel& m);
void to_json(nlohmann::json& j, const SetSpec& s);
void from_json(const nlohmann::json& j, SetSpec& s);

}  // namespace certnet
