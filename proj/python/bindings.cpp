#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "certnet/config.hpp"
#include "certnet/pipeline.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
certnet::RunConfig Config(const std::string& cfg) { return certnet::ConfigFromJson(json::parse(cfg)); }

std::vector<certnet::CsbcCertificate> Certs(const std::string& certs) {
  return json::parse(certs).get<std::vector<certnet::CsbcCertificate>>();
}

std::string Synthesize(const std::string& cfg_text) {
  const certnet::RunConfig c = Config(cfg_text);
  const certnet::NetworkSpec spec = c.Network();
  certnet::SynthesisOutcome out;
  {
    py::gil_scoped_release release;
    out = certnet::SynthesizeNetwork(spec, c.Data(spec), c.synth, c.max_retries);
  }
  return json{{"pass", out.pass()}, {"report", certnet::ComposeReportJson(spec, out)}, {"certificates", out.certs}}
      .dump();
}

std::string Verify(const std::string& cfg_text, const std::string& certs) {
  const certnet::RunConfig c = Config(cfg_text);
  const certnet::NetworkSpec spec = c.Network();
  const auto cs = Certs(certs);
  py::gil_scoped_release release;
  return json(certnet::VerifyCertificates(spec, cs, c.verify_samples, c.seed)).dump();
}

py::tuple Simulate(const std::string& cfg_text, const std::string& certs) {
  const certnet::RunConfig c = Config(cfg_text);
  const certnet::NetworkSpec spec = c.Network();
  const auto cs = certs.empty() ? std::vector<certnet::CsbcCertificate>{} : Certs(certs);
  certnet::Network net(spec);
  const certnet::SimConfig sc = c.Sim(spec);
  certnet::VerifyReport rep;
  std::optional<certnet::NetworkCbc> cbc;
  if (!cs.empty()) {
    rep.compose = certnet::ComposeCertificates(spec, cs);
    if (rep.compose->pass) cbc.emplace(net, cs, *rep.compose);
  }
  if (!cbc && !c.open_loop) throw std::invalid_argument("closed-loop simulation needs composable certificates");
  certnet::SimReport sim;
  {
    py::gil_scoped_release release;
    sim = certnet::SimulateNetwork(net, cbc ? &*cbc : nullptr, sc);
  }
  Eigen::VectorXd times = Eigen::Map<const Eigen::VectorXd>(sim.recorded.times.data(), sim.recorded.times.size());
  Eigen::MatrixXd states = sim.recorded.states;
  rep.simulation = std::move(sim);
  return py::make_tuple(json(rep).dump(), times, states, sc.record);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Data-driven compositional safety certificates for networks of polynomial systems.";
  m.def("benchmark_names", &certnet::BenchmarkNames);
  m.def("interaction_gain", &certnet::InteractionGain, py::arg("coupling"), py::arg("pi"),
        "Squared spectral norm of the coupling divided by pi.");
  m.def("parse_toml", [](const std::string& text) { return certnet::ParseTomlSubset(text).dump(); });
  m.def("load_config", [](const std::string& path) { return certnet::ConfigToJson(certnet::LoadConfig(path)).dump(); });
  m.def("normalize_config", [](const std::string& cfg) { return certnet::ConfigToJson(Config(cfg)).dump(); });
  m.def("synthesize", &Synthesize, py::arg("config"));
  m.def("verify", &Verify, py::arg("config"), py::arg("certificates"));
  m.def("simulate", &Simulate, py::arg("config"), py::arg("certificates"));
  m.def("monitored_subsystems", &certnet::MonitoredSubsystems, py::arg("q"), py::arg("count"));
}
