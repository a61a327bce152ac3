#include <gtest/gtest.h>

#include <filesystem>

#include "certnet/config.hpp"
#include "certnet/json_util.hpp"
#include "certnet/pipeline.hpp"

namespace certnet {
namespace {

TEST(TomlSubset, TablesScalarsArraysComments) {
  const auto j = ParseTomlSubset(R"(
seed = 7  # top level
[benchmark]
name = "lorenz_ring"   # trailing comment
Q = 2_000
[synth]
eps_grid = [0.99,
            0.5]
flag = true
tag = "a#b"
big = 18446744073709551615
)");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["benchmark"]["name"], "lorenz_ring");
  EXPECT_EQ(j["benchmark"]["Q"], 2000);
  EXPECT_EQ(j["synth"]["eps_grid"].size(), 2u);
  EXPECT_DOUBLE_EQ(j["synth"]["eps_grid"][1].get<double>(), 0.5);
  EXPECT_TRUE(j["synth"]["flag"].get<bool>());
  EXPECT_EQ(j["synth"]["tag"], "a#b");
  EXPECT_EQ(j["synth"]["big"].get<std::uint64_t>(), 18446744073709551615ULL);
}

TEST(TomlSubset, RejectsUnsupportedSyntax) {
  EXPECT_THROW(ParseTomlSubset("[[runs]]\n"), std::invalid_argument);
  EXPECT_THROW(ParseTomlSubset("[a.b]\n"), std::invalid_argument);
  EXPECT_THROW(ParseTomlSubset("[a]\n[a]\n"), std::invalid_argument);
  EXPECT_THROW(ParseTomlSubset("x = 1\nx = 2\n"), std::invalid_argument);
  EXPECT_THROW(ParseTomlSubset("x\n"), std::invalid_argument);
  EXPECT_THROW(ParseTomlSubset("x = 1.2.3\n"), std::invalid_argument);
}

TEST(RunConfig, SectionsMapOntoFields) {
  RunConfig c = ConfigFromJson(ParseTomlSubset(R"(
[benchmark]
name = "lorenz_ring"
Q = 40
[data]
T = 16
tau = 0.2
seed = 9
[synth]
eps_grid = [0.9]
deg_H = 1
max_retries = 1
[sim]
t_end = 2.5
monitored = 3
open_loop = true
[verify]
samples = 500
[out]
dir = "x"
)"));
  EXPECT_EQ(c.benchmark, "lorenz_ring");
  EXPECT_EQ(*c.subsystems, 40);
  EXPECT_EQ(*c.samples, 16);
  EXPECT_DOUBLE_EQ(*c.tau, 0.2);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.synth.eps_grid, std::vector<double>{0.9});
  EXPECT_EQ(c.synth.deg_h, 1);
  EXPECT_EQ(c.max_retries, 1);
  EXPECT_DOUBLE_EQ(c.t_end, 2.5);
  EXPECT_TRUE(c.open_loop);
  EXPECT_EQ(c.verify_samples, 500);
  EXPECT_EQ(c.out_dir, "x");

  const NetworkSpec spec = c.Network();
  EXPECT_EQ(spec.Q, 40);
  const DataConfig d = c.Data(spec);
  EXPECT_EQ(d.samples, 16);
  EXPECT_EQ(d.experiments, 16);  // one-sample experiments follow T
  EXPECT_DOUBLE_EQ(d.noise_bound, spec.defaults.noise_bound);
  EXPECT_EQ(c.Sim(spec).record, (std::vector<int>{0, 13, 26}));
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c;
  c.benchmark = "spacecraft_line";
  c.subsystems = 12;
  c.samples = 30;
  c.seed = 123;
  c.runs = 4;
  RunConfig back = ConfigFromJson(ConfigToJson(c));
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(c));
  EXPECT_EQ(ConfigFromJson(nlohmann::json{{"benchmark", "lu_star"}}).benchmark, "lu_star");
}

TEST(RunConfig, RejectsInvalidSettings) {
  EXPECT_THROW(ConfigFromJson({{"benchmark", {{"name", "nope"}}}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson({{"benchmark", {{"name", "lorenz_ring"}, {"Q", 0}}}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson({{"sim", {{"dt", 0.0}}}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson({{"data", 3}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson({{"synth", {{"eps_grid", std::vector<double>{}}}}}), std::invalid_argument);
}

TEST(RunConfig, ShippedConfigsLoad) {
  for (const char* name : {"duffing_ring.toml", "lorenz_ring.toml"}) {
    const std::string path = std::string(CERTNET_SOURCE_DIR) + "/configs/" + name;
    EXPECT_NO_THROW(LoadConfig(path)) << path;
  }
}

TEST(MonitoredSubsystems, EvenlySpreadAndCapped) {
  EXPECT_EQ(MonitoredSubsystems(10, 4), (std::vector<int>{0, 2, 5, 7}));
  EXPECT_EQ(MonitoredSubsystems(3, 120), (std::vector<int>{0, 1, 2}));
  EXPECT_TRUE(MonitoredSubsystems(5, 0).empty());
  const auto m = MonitoredSubsystems(2000, 120);
  EXPECT_EQ(m.size(), 120u);
  EXPECT_TRUE(std::is_sorted(m.begin(), m.end()));
  EXPECT_EQ(std::adjacent_find(m.begin(), m.end()), m.end());
}

TEST(Pipeline, RepresentativeHasMostNeighbors) {
  const NetworkSpec star = Benchmark("lu_star", 6);
  EXPECT_EQ(Representative(star, 0), 1);  // edges run hub -> leaf, so a leaf has the most inputs
  const NetworkSpec het = Benchmark("heterogeneous_line", 20);
  for (int t = 0; t < static_cast<int>(het.templates.size()); ++t) EXPECT_EQ(het.TemplateOf(Representative(het, t)), t);
}

TEST(Pipeline, SynthesizeWriteLoadVerify) {
  RunConfig c;
  c.benchmark = "lorenz_ring";
  c.subsystems = 10;
  const NetworkSpec spec = c.Network();
  SynthesisOutcome out = SynthesizeNetwork(spec, c.Data(spec), c.synth, 0);
  ASSERT_TRUE(out.pass()) << out.compose.failure_reason;
  EXPECT_EQ(out.templates.size(), 1u);  // one synthesis for a homogeneous network
  EXPECT_EQ(out.summaries.size(), 10u);

  const auto dir = std::filesystem::temp_directory_path() / "certnet_pipeline_test";
  std::filesystem::remove_all(dir);
  WriteCertificates(dir.string(), spec, out.certs);
  auto loaded = LoadCertificates(dir.string(), spec);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_LT((loaded[0].P - out.certs[0].P).norm(), 1e-12 * out.certs[0].P.norm());
  EXPECT_TRUE(VerifyCertificates(spec, loaded, 2000, 5).pass());

  const nlohmann::json r = ComposeReportJson(spec, out);
  EXPECT_TRUE(r["pass"].get<bool>());
  EXPECT_EQ(r["templates"][0]["template"], spec.templates[0].name);
  EXPECT_EQ(r["subsystems"].size(), 10u);

  EXPECT_THROW(LoadCertificates((dir / "absent").string(), spec), std::runtime_error);
  EXPECT_THROW(LoadCertificates(dir.string(), Benchmark("duffing_ring", 3)), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, TooFewSamplesIsRejected) {
  const NetworkSpec spec = Benchmark("lorenz_ring", 4);
  RunConfig c;
  c.benchmark = "lorenz_ring";
  c.samples = 9;
  EXPECT_THROW(SynthesizeNetwork(spec, c.Data(spec), c.synth, 3), std::invalid_argument);
}

}  // namespace
}  // namespace certnet
