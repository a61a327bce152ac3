#include <Eigen/Core>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "certnet/config.hpp"
#include "certnet/json_util.hpp"
#include "certnet/pipeline.hpp"

namespace fs = std::filesystem;
using certnet::RunConfig;
using nlohmann::json;

namespace {

constexpr int kPass = 0, kError = 1, kInfeasible = 2;

struct Flags {
  std::string config;
  std::optional<std::string> benchmark, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> subsystems, samples, runs, monitored, verify_samples;
  std::optional<double> t_end;
  bool open_loop = false;
};

std::string ManifestPath(const std::string& dir) { return (fs::path(dir) / "run_manifest.json").string(); }

// --config wins; otherwise simulate and verify pick up the manifest left in the
// output directory by an earlier run.  Flags are applied last.
RunConfig Resolve(const Flags& f, bool reuse_manifest) {
  RunConfig c;
  if (!f.config.empty()) {
    c = certnet::LoadConfig(f.config);
  } else if (reuse_manifest) {
    const std::string m = ManifestPath(f.out.value_or(c.out_dir));
    if (fs::exists(m)) c = certnet::ConfigFromJson(json::parse(certnet::ReadFile(m)).at("config"));
  }
  if (f.benchmark) c.benchmark = *f.benchmark;
  if (f.out) c.out_dir = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.subsystems) c.subsystems = *f.subsystems;
  if (f.samples) c.samples = *f.samples;
  if (f.runs) c.runs = *f.runs;
  if (f.monitored) c.monitored = *f.monitored;
  if (f.verify_samples) c.verify_samples = *f.verify_samples;
  if (f.t_end) c.t_end = *f.t_end;
  if (f.open_loop) c.open_loop = true;
  c.Validate();
  return c;
}

std::string Rel(const RunConfig& c, const std::string& path) {
  return fs::path(path).lexically_relative(c.out_dir).generic_string();
}

void WriteManifest(const RunConfig& c, const std::string& command, const std::vector<std::string>& outputs) {
  json files = json::array();
  for (const auto& p : outputs) files.push_back(Rel(c, p));
  json m = {{"command", command},
            {"seed", c.seed},
            {"config", certnet::ConfigToJson(c)},
            {"versions",
             {{"certnet", CERTNET_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}}},
            {"outputs", std::move(files)}};
  certnet::WriteJson(ManifestPath(c.out_dir), m);
}

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string Join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

struct Synthesized {
  certnet::SynthesisOutcome outcome;
  std::vector<std::string> files;
};

Synthesized RunSynthesis(const RunConfig& c, const certnet::NetworkSpec& spec) {
  Synthesized s;
  s.outcome = certnet::SynthesizeNetwork(spec, c.Data(spec), c.synth, c.max_retries);
  if (s.outcome.synthesized()) {
    certnet::WriteCertificates(c.out_dir, spec, s.outcome.certs);
    for (int t = 0; t < static_cast<int>(spec.templates.size()); ++t)
      s.files.push_back(certnet::CertificatePath(c.out_dir, spec, t));
  }
  s.files.push_back(Join(c.out_dir, "compose_report.json"));
  certnet::WriteJson(s.files.back(), certnet::ComposeReportJson(spec, s.outcome));
  const auto& o = s.outcome;
  if (o.pass())
    std::printf("synthesize: pass, network eps %.6g, max varpi %.6g, %d expansion(s)\n", o.compose.eps,
                o.compose.max_varpi, o.expansions);
  else if (!o.synthesized())
    std::printf("synthesize: infeasible (%s)\n", o.templates.back().result.message.c_str());
  else
    std::printf("synthesize: composition failed (%s)\n", o.compose.failure_reason.c_str());
  return s;
}

int CmdSynthesize(const RunConfig& c) {
  const certnet::NetworkSpec spec = c.Network();
  Synthesized s = RunSynthesis(c, spec);
  WriteManifest(c, "synthesize", s.files);
  return s.outcome.pass() ? kPass : kInfeasible;
}

struct Simulated {
  certnet::VerifyReport report;
  std::vector<std::string> files;
};

Simulated RunSimulation(const RunConfig& c, const certnet::NetworkSpec& spec,
                        const std::vector<certnet::CsbcCertificate>& certs) {
  Simulated s;
  certnet::ComposeReport compose = certnet::ComposeCertificates(spec, certs);
  s.report.compose = compose;
  certnet::Network net(spec);
  certnet::SimConfig sc = c.Sim(spec);
  std::optional<certnet::NetworkCbc> cbc;
  if (compose.pass) cbc.emplace(net, certs, compose);
  else if (!c.open_loop) throw std::runtime_error("certificates do not compose: " + compose.failure_reason);
  certnet::SimReport sim = certnet::SimulateNetwork(net, cbc ? &*cbc : nullptr, sc);
  s.files = certnet::WriteTrajectories(c.out_dir, net, sc, sim);
  std::printf("simulate (%s): %d run(s), %d unsafe, %d decay violation(s)%s\n",
              c.open_loop ? "open loop" : "closed loop", static_cast<int>(sim.runs.size()), sim.unsafe_runs,
              sim.decay_violations, sim.any_blew_up ? ", blew up" : "");
  s.report.simulation = std::move(sim);
  return s;
}

int CmdSimulate(const RunConfig& c) {
  const certnet::NetworkSpec spec = c.Network();
  Simulated s = RunSimulation(c, spec, certnet::LoadCertificates(c.out_dir, spec));
  s.files.push_back(Join(c.out_dir, "verify_report.json"));
  certnet::WriteJson(s.files.back(), s.report);
  WriteManifest(c, "simulate", s.files);
  return s.report.pass() ? kPass : kInfeasible;
}

certnet::VerifyReport RunVerify(const RunConfig& c, const certnet::NetworkSpec& spec,
                                const std::vector<certnet::CsbcCertificate>& certs) {
  certnet::VerifyReport r = certnet::VerifyCertificates(spec, certs, c.verify_samples, c.seed);
  for (const auto& t : r.templates)
    std::printf("verify %s: worst margin %.3g, witnesses %s (max residual %.3g)\n", t.name.c_str(),
                t.margins.worst(), t.witnesses.ok ? "ok" : "FAILED", t.witnesses.max_residual);
  std::printf("verify: %s\n", r.pass() ? "pass" : "fail");
  return r;
}

int CmdVerify(const RunConfig& c) {
  const certnet::NetworkSpec spec = c.Network();
  certnet::VerifyReport r = RunVerify(c, spec, certnet::LoadCertificates(c.out_dir, spec));
  const std::string path = Join(c.out_dir, "verify_report.json");
  certnet::WriteJson(path, r);
  WriteManifest(c, "verify", {path});
  return r.pass() ? kPass : kInfeasible;
}

// Whole pipeline with wall-clock timings.  Timings go to bench_report.json
// only, so the other outputs stay reproducible.
int CmdBench(const RunConfig& c) {
  const certnet::NetworkSpec spec = c.Network();
  const auto t0 = std::chrono::steady_clock::now();
  Synthesized syn = RunSynthesis(c, spec);
  const double total_synth = Seconds(t0);
  json timing = {{"Q", spec.Q},
                 {"synthesis_seconds", syn.outcome.synth_seconds},
                 {"synthesis_with_retries_seconds", total_synth},
                 {"composition_seconds", syn.outcome.compose_seconds}};
  json per_template = json::array();
  for (const auto& t : syn.outcome.templates)
    per_template.push_back({{"template", spec.templates[t.template_index].name}, {"seconds", t.seconds}});
  timing["templates"] = std::move(per_template);
  std::vector<std::string> files = syn.files;
  int code = syn.outcome.pass() ? kPass : kInfeasible;
  if (syn.outcome.pass()) {
    certnet::VerifyReport r = RunVerify(c, spec, syn.outcome.certs);
    const auto t1 = std::chrono::steady_clock::now();
    Simulated sim = RunSimulation(c, spec, syn.outcome.certs);
    timing["simulation_seconds"] = Seconds(t1);
    r.simulation = std::move(sim.report.simulation);
    files.insert(files.end(), sim.files.begin(), sim.files.end());
    files.push_back(Join(c.out_dir, "verify_report.json"));
    certnet::WriteJson(files.back(), r);
    if (!r.pass()) code = kInfeasible;
  }
  files.push_back(Join(c.out_dir, "bench_report.json"));
  certnet::WriteJson(files.back(), timing);
  std::cout << "bench: " << timing.dump() << "\n";
  WriteManifest(c, "bench", files);
  return code;
}

void AddFlags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "TOML or JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--benchmark", f.benchmark, "Benchmark network name");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--subsystems", f.subsystems, "Override the number of subsystems");
  cmd->add_option("--samples", f.samples, "Samples per subsystem (T)");
  cmd->add_option("--runs", f.runs, "Simulation runs");
  cmd->add_option("--monitored", f.monitored, "Subsystems whose trajectories are exported");
  cmd->add_option("--t-end", f.t_end, "Simulation horizon in seconds");
  cmd->add_option("--verify-samples", f.verify_samples, "Samples per template for verify");
  cmd->add_flag("--open-loop", f.open_loop, "Simulate without the safety controller");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven compositional safety certificates for networks of polynomial systems"};
  app.require_subcommand(1);
  Flags f;
  auto* syn = app.add_subcommand("synthesize", "Collect data, synthesize certificates and compose");
  auto* sim = app.add_subcommand("simulate", "Simulate the network with stored certificates");
  auto* ver = app.add_subcommand("verify", "Re-check stored certificates");
  auto* bench = app.add_subcommand("bench", "Synthesize, verify and simulate with timings");
  for (auto* cmd : {syn, sim, ver, bench}) AddFlags(cmd, f);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kError;
  }
  try {
    if (syn->parsed()) return CmdSynthesize(Resolve(f, false));
    if (sim->parsed()) return CmdSimulate(Resolve(f, true));
    if (ver->parsed()) return CmdVerify(Resolve(f, true));
    return CmdBench(Resolve(f, false));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
}
