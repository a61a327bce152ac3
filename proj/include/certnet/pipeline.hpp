#pragma once

#include <string>
#include <vector>

#include "certnet/compose.hpp"
#include "certnet/csbc.hpp"
#include "certnet/data.hpp"
#include "certnet/plant.hpp"
#include "certnet/verify.hpp"

namespace certnet {

/// Subsystem whose data and coupling stand in for template t: the first one
/// with the most incoming neighbors.
int Representative(const NetworkSpec& spec, int t);

struct TemplateRun {
  int template_index = 0;
  int representative = 0;
  int samples = 0;
  double seconds = 0;
  SynthResult result;
};

/// Collects data at the representative and synthesizes.  Each template draws
/// from its own seed stream.
TemplateRun SynthesizeTemplate(const NetworkSpec& spec, int t, const DataConfig& data,
                               const SynthConfig& synth);

struct SynthesisOutcome {
  std::vector<TemplateRun> templates;
  std::vector<CsbcCertificate> certs;
  std::vector<CertSummary> summaries;
  ComposeReport compose;
  int expansions = 0;  // rounds that grew T by 50%
  double synth_seconds = 0, compose_seconds = 0;
  bool synthesized() const;
  bool pass() const { return synthesized() && compose.pass; }
};

/// One synthesis per template, then composition.  A failed template or a
/// failed composition re-runs everything with 50% more samples, up to
/// max_retries times.
SynthesisOutcome SynthesizeNetwork(const NetworkSpec& spec, const DataConfig& data,
                                   const SynthConfig& synth, int max_retries);

/// Summaries with per-subsystem rho, the gain matrix and the small-gain test.
ComposeReport ComposeCertificates(const NetworkSpec& spec, const std::vector<CsbcCertificate>& certs,
                                  std::vector<CertSummary>* summaries = nullptr);

/// Sampled conditions and witness rechecks per template plus the compose
/// re-check.
VerifyReport VerifyCertificates(const NetworkSpec& spec, const std::vector<CsbcCertificate>& certs,
                                int samples, std::uint64_t seed);

// Output directory layout: certificates/<template>.json, compose_report.json,
// verify_report.json, traj_<i>.csv, run_manifest.json.
std::string CertificatePath(const std::string& dir, const NetworkSpec& spec, int t);
void WriteCertificates(const std::string& dir, const NetworkSpec& spec,
                       const std::vector<CsbcCertificate>& certs);
/// Throws std::runtime_error naming the first missing file.
std::vector<CsbcCertificate> LoadCertificates(const std::string& dir, const NetworkSpec& spec);

/// Composition verdict plus per-template synthesis details and per-subsystem
/// summaries.
nlohmann::json ComposeReportJson(const NetworkSpec& spec, const SynthesisOutcome& out);

/// One CSV per recorded subsystem (header t,x1,...,xn) from run 0.
std::vector<std::string> WriteTrajectories(const std::string& dir, const Network& net,
                                           const SimConfig& cfg, const SimReport& rep);

/// Writes `j` pretty-printed through a temporary file and a rename.
void WriteJson(const std::string& path, const nlohmann::json& j);

}  // namespace certnet
