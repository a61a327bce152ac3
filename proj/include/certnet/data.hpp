#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "certnet/dictionary.hpp"
#include "certnet/plant.hpp"

namespace certnet {

struct DataConfig {
  int samples = 20;              // T
  double tau = 0.01;             // sampling interval [s]
  double noise_bound = 0.0;      // per-sample bound on |noise|^2
  double input_amplitude = 1.0;  // inputs uniform on [-a, a]^m, held per interval
  std::uint64_t seed = 0;
  int max_retries = 10;
  double dt = 1e-3;              // integrator step inside each interval
  double start_shrink = 0.5;     // initial state drawn from the state box scaled by this
  int experiments = 1;           // independent runs the T samples are split over

  int SamplesPerExperiment() const { return (samples + experiments - 1) / experiments; }
  void Validate(int dict_size) const;
};

/// Data matrices of one subsystem.  Gamma is the hidden noise realization,
/// kept for oracles only.
struct TrajectoryData {
  Eigen::MatrixXd U0, W0, X0, X1, Gamma, Xi, N0;
  bool rank_ok = false;
  int rank = 0;
  int attempts = 1;

  int T() const { return static_cast<int>(X0.cols()); }
  /// Xi Xi' = noise_bound * T * I.
  Eigen::MatrixXd NoiseGram() const { return Xi * Xi.transpose(); }
};

struct RankReport {
  int rank = 0;
  bool full_row_rank = false;
};

/// Entry (k, t) = monomial k at column t of X0.
Eigen::MatrixXd BuildN0(const Eigen::MatrixXd& X0, const Dictionary& d, RankReport* report = nullptr);
RankReport NumericalRank(const Eigen::MatrixXd& m);

/// Stacked neighbor states as a function of time.
using NeighborSignal = std::function<Eigen::VectorXd(double t)>;

/// Single trajectory of one subsystem driven by a given neighbor signal.
TrajectoryData Collect(const SubsystemModel& m, int num_neighbors, const DataConfig& cfg,
                       const NeighborSignal& w);
/// Single trajectory of subsystem i while the whole network runs under
/// random excitation, so W0 holds measured neighbor states.
TrajectoryData CollectInNetwork(const NetworkSpec& spec, int i, const DataConfig& cfg);

/// S(x) = pinv(N0) Upsilon(x); satisfies N0 S(x) = Upsilon(x) when N0 has
/// full row rank.
PolyMatrix RightInverseTransform(const TrajectoryData& td, const Dictionary& d);

/// max |A Upsilon(x) + B U0 S(x) - (X1 - D W0 - Gamma) S(x)| over samples of
/// the state box, using the hidden truth.  With include_noise = false the
/// Gamma term is omitted (negative control).
double VerifyLemma1(const SubsystemModel& m, const TrajectoryData& td, const PolyMatrix& S,
                    int num_samples, std::uint64_t seed, bool include_noise = true);

void to_json(nlohmann::json& j, const TrajectoryData& td);
void from_json(const nlohmann::json& j, TrajectoryData& td);

}  // namespace certnet
