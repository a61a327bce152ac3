#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "certnet/csbc.hpp"
#include "certnet/data.hpp"
#include "certnet/plant.hpp"
#include "certnet/verify.hpp"

namespace certnet {

/// One pipeline run.  Unset data fields fall back to the benchmark defaults.
struct RunConfig {
  std::string benchmark = "duffing_ring";
  std::optional<int> subsystems;  // overrides the benchmark's Q

  std::optional<int> samples;  // T
  std::optional<double> tau, noise_bound, input_amplitude;
  std::optional<int> experiments;
  std::uint64_t seed = 1;

  SynthConfig synth;
  int max_retries = 3;  // composition retries, each with 50% more samples

  double t_end = 5.0;
  double dt = 1e-3;
  int runs = 50;
  int monitored = 120;
  int record_stride = 10;
  bool open_loop = false;

  int verify_samples = 10000;
  std::string out_dir = "certnet_out";

  NetworkSpec Network() const;
  DataConfig Data(const NetworkSpec& spec) const;
  SimConfig Sim(const NetworkSpec& spec) const;
  void Validate() const;
};

/// Reads the sectioned schema ([benchmark], [data], [synth], [sim],
/// [verify], [out]) from JSON.
RunConfig ConfigFromJson(const nlohmann::json& j);
nlohmann::json ConfigToJson(const RunConfig& c);

/// TOML subset: [table] headers, key = value with strings, numbers, booleans
/// and flat arrays, and # comments.
nlohmann::json ParseTomlSubset(const std::string& text);

/// Loads a .json or .toml file (by extension; anything else is tried as JSON).
RunConfig LoadConfig(const std::string& path);

/// Subsystems whose trajectories are exported: evenly spread, at most `count`.
std::vector<int> MonitoredSubsystems(int q, int count);

}  // namespace certnet
