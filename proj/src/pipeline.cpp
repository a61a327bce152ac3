#include "certnet/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "certnet/json_util.hpp"

namespace certnet {
namespace {

double Since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int Representative(const NetworkSpec& spec, int t) {
  int best = -1, best_k = -1;
  for (int i = 0; i < spec.Q; ++i) {
    if (spec.TemplateOf(i) != t) continue;
    const int k = NumNeighbors(spec, i);
    if (k > best_k) {
      best = i;
      best_k = k;
    }
  }
  if (best < 0) throw std::invalid_argument("template " + std::to_string(t) + " has no subsystem");
  return best;
}

TemplateRun SynthesizeTemplate(const NetworkSpec& spec, int t, const DataConfig& data,
                               const SynthConfig& synth) {
  const auto t0 = std::chrono::steady_clock::now();
  TemplateRun run;
  run.template_index = t;
  run.representative = Representative(spec, t);
  run.samples = data.samples;
  DataConfig dc = data;
  dc.seed = data.seed + 104729ULL * static_cast<std::uint64_t>(t);
  const SubsystemModel& m = spec.model(run.representative);
  SynthesisProblem prob{CollectInNetwork(spec, run.representative, dc), m.SynthesisDictionary(),
                        m.CouplingMatrix(NumNeighbors(spec, run.representative)), m.state, m.initial,
                        m.unsafe};
  run.result = Synthesize(prob, synth, m.name);
  run.seconds = Since(t0);
  return run;
}

bool SynthesisOutcome::synthesized() const {
  if (templates.empty()) return false;
  for (const auto& t : templates)
    if (t.result.status != SynthStatus::kOk) return false;
  return true;
}

ComposeReport ComposeCertificates(const NetworkSpec& spec, const std::vector<CsbcCertificate>& certs,
                                  std::vector<CertSummary>* summaries) {
  std::vector<CertSummary> s = SummarizeNetwork(spec, certs);
  ComposeReport r = CheckCompose(BuildGainMatrix(s, spec), s);
  if (summaries) *summaries = std::move(s);
  return r;
}

SynthesisOutcome SynthesizeNetwork(const NetworkSpec& spec, const DataConfig& data,
                                   const SynthConfig& synth, int max_retries) {
  spec.Validate();
  DataConfig dc = data;
  SynthesisOutcome out;
  for (int round = 0;; ++round) {
    out = SynthesisOutcome{};
    out.expansions = round;
    const auto t0 = std::chrono::steady_clock::now();
    for (int t = 0; t < static_cast<int>(spec.templates.size()); ++t) {
      out.templates.push_back(SynthesizeTemplate(spec, t, dc, synth));
      if (out.templates.back().result.status != SynthStatus::kOk) break;
    }
    out.synth_seconds = Since(t0);
    if (out.synthesized()) {
      const auto t1 = std::chrono::steady_clock::now();
      for (const auto& t : out.templates) out.certs.push_back(t.result.cert);
      out.compose = ComposeCertificates(spec, out.certs, &out.summaries);
      out.compose_seconds = Since(t1);
      if (out.compose.pass) return out;
    }
    if (round >= max_retries) return out;
    // Expanded dataset for the next round.
    const bool one_per_run = dc.experiments == dc.samples && dc.samples > 1;
    dc.samples = static_cast<int>(std::ceil(1.5 * dc.samples));
    if (one_per_run) dc.experiments = dc.samples;
  }
}

VerifyReport VerifyCertificates(const NetworkSpec& spec, const std::vector<CsbcCertificate>& certs,
                                int samples, std::uint64_t seed) {
  if (certs.size() != spec.templates.size()) throw std::invalid_argument("need one certificate per template");
  VerifyReport rep;
  for (int t = 0; t < static_cast<int>(certs.size()); ++t) {
    const int rep_i = Representative(spec, t);
    // The stored rho belongs to the representative's coupling.
    TemplateVerdict v;
    v.name = certs[t].name.empty() ? spec.templates[t].name : certs[t].name;
    v.margins = CheckCsbc(spec.model(rep_i), certs[t], NeighborStates(spec, rep_i), samples,
                          seed + 7ULL * static_cast<std::uint64_t>(t));
    v.witnesses = RecheckWitnesses(certs[t]);
    rep.templates.push_back(std::move(v));
  }
  rep.compose = ComposeCertificates(spec, certs);
  return rep;
}

std::string CertificatePath(const std::string& dir, const NetworkSpec& spec, int t) {
  const std::string& name = spec.templates.at(t).name;
  return (std::filesystem::path(dir) / "certificates" / (name + ".json")).string();
}

void WriteJson(const std::string& path, const nlohmann::json& j) { WriteFileAtomic(path, j.dump(2) + "\n"); }

void WriteCertificates(const std::string& dir, const NetworkSpec& spec,
                       const std::vector<CsbcCertificate>& certs) {
  if (certs.size() != spec.templates.size()) throw std::invalid_argument("need one certificate per template");
  for (int t = 0; t < static_cast<int>(certs.size()); ++t) WriteJson(CertificatePath(dir, spec, t), certs[t]);
}

std::vector<CsbcCertificate> LoadCertificates(const std::string& dir, const NetworkSpec& spec) {
  std::vector<CsbcCertificate> out;
  for (int t = 0; t < static_cast<int>(spec.templates.size()); ++t) {
    const std::string path = CertificatePath(dir, spec, t);
    if (!std::filesystem::exists(path)) throw std::runtime_error("missing certificate " + path);
    CsbcCertificate c = nlohmann::json::parse(ReadFile(path)).get<CsbcCertificate>();
    if (c.n() != spec.templates[t].n()) throw std::runtime_error("certificate " + path + " has the wrong dimension");
    out.push_back(std::move(c));
  }
  return out;
}

nlohmann::json ComposeReportJson(const NetworkSpec& spec, const SynthesisOutcome& out) {
  nlohmann::json j = out.compose;
  j["synthesized"] = out.synthesized();
  j["expansions"] = out.expansions;
  nlohmann::json tj = nlohmann::json::array();
  for (const auto& t : out.templates) {
    nlohmann::json attempts = nlohmann::json::array();
    for (const auto& a : t.result.attempts)
      attempts.push_back({{"eps", a.eps}, {"status", a.status}, {"pi", std::isfinite(a.pi) ? nlohmann::json(a.pi) : nlohmann::json(nullptr)}});
    nlohmann::json o = {{"template", spec.templates[t.template_index].name},
                        {"representative", t.representative},
                        {"samples", t.samples},
                        {"status", ToString(t.result.status)},
                        {"attempts", std::move(attempts)}};
    if (!t.result.message.empty()) o["message"] = t.result.message;
    if (t.result.status == SynthStatus::kOk) {
      const auto& c = t.result.cert;
      o["certificate"] = {{"eps", c.eps}, {"phi", c.phi}, {"gamma", c.gamma}, {"beta", c.beta}, {"pi", c.pi}, {"mu", c.mu}};
    }
    tj.push_back(std::move(o));
  }
  j["templates"] = std::move(tj);
  j["subsystems"] = out.summaries;
  return j;
}

std::vector<std::string> WriteTrajectories(const std::string& dir, const Network& net,
                                           const SimConfig& cfg, const SimReport& rep) {
  std::vector<std::string> files;
  int col = 0;
  for (int i : cfg.record) {
    const int n = net.n(i);
    Trajectory tr;
    tr.times = rep.recorded.times;
    tr.states = rep.recorded.states.middleCols(col, n);
    col += n;
    std::vector<std::string> names;
    for (int k = 1; k <= n; ++k) names.push_back("x" + std::to_string(k));
    const std::string path = (std::filesystem::path(dir) / ("traj_" + std::to_string(i) + ".csv")).string();
    WriteFileAtomic(path, TrajectoryCsv(tr, names));
    files.push_back(path);
  }
  return files;
}

}  // namespace certnet
