#include "certnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

#include "certnet/json_util.hpp"

namespace certnet {
namespace {

std::string Trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Drops a # comment that is not inside a string.
std::string StripComment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

nlohmann::json ParseScalar(const std::string& raw, int line) {
  const std::string v = Trim(raw);
  auto fail = [&] { throw std::invalid_argument("config line " + std::to_string(line) + ": bad value '" + v + "'"); };
  if (v.empty()) fail();
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail();
    return nlohmann::json::parse(v);  // handles escapes
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::string num;
  for (char c : v)
    if (c != '_') num.push_back(c);
  const bool integral = num.find_first_of(".eE") == std::string::npos || num.rfind("0x", 0) == 0;
  if (integral) {
    long long x = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), x);
    if (ec == std::errc() && p == num.data() + num.size()) return x;
    std::uint64_t ux = 0;
    auto [p2, ec2] = std::from_chars(num.data(), num.data() + num.size(), ux);
    if (ec2 == std::errc() && p2 == num.data() + num.size()) return ux;
  }
  double d = 0;
  auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
  if (ec != std::errc() || p != num.data() + num.size()) fail();
  return d;
}

nlohmann::json ParseValue(const std::string& raw, int line) {
  const std::string v = Trim(raw);
  if (v.empty() || v.front() != '[') return ParseScalar(v, line);
  if (v.back() != ']') throw std::invalid_argument("config line " + std::to_string(line) + ": unterminated array");
  nlohmann::json arr = nlohmann::json::array();
  const std::string body = Trim(v.substr(1, v.size() - 2));
  if (body.empty()) return arr;
  std::size_t start = 0;
  bool in_str = false;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i < body.size() && body[i] == '"') in_str = !in_str;
    if (i == body.size() || (body[i] == ',' && !in_str)) {
      const std::string item = Trim(body.substr(start, i - start));
      if (!item.empty()) arr.push_back(ParseScalar(item, line));
      start = i + 1;
    }
  }
  return arr;
}

template <typename T>
void Read(const nlohmann::json& sec, const char* key, T& out) {
  if (sec.contains(key)) out = sec.at(key).get<T>();
}

template <typename T>
void Read(const nlohmann::json& sec, const char* key, std::optional<T>& out) {
  if (sec.contains(key)) out = sec.at(key).get<T>();
}

const nlohmann::json& Section(const nlohmann::json& j, const char* name) {
  static const nlohmann::json kEmpty = nlohmann::json::object();
  if (!j.contains(name)) return kEmpty;
  if (!j.at(name).is_object()) throw std::invalid_argument(std::string("config section [") + name + "] must be a table");
  return j.at(name);
}

}  // namespace

nlohmann::json ParseTomlSubset(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = Trim(StripComment(text.substr(pos, end - pos)));
    ++line_no;
    pos = end + 1;
    // Arrays may span lines.
    while (!line.empty() && line.find('[') != std::string::npos && line.front() != '[' &&
           std::count(line.begin(), line.end(), '[') > std::count(line.begin(), line.end(), ']') &&
           pos <= text.size()) {
      end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      line += " " + Trim(StripComment(text.substr(pos, end - pos)));
      ++line_no;
      pos = end + 1;
    }
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.rfind("[[", 0) == 0)
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": unsupported table header");
      const std::string name = Trim(line.substr(1, line.size() - 2));
      if (name.empty() || name.find('.') != std::string::npos)
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": unsupported table name");
      if (root.contains(name)) throw std::invalid_argument("config: duplicate table [" + name + "]");
      root[name] = nlohmann::json::object();
      table = &root[name];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = Trim(line.substr(0, eq));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    if (table->contains(key)) throw std::invalid_argument("config: duplicate key '" + key + "'");
    (*table)[key] = ParseValue(line.substr(eq + 1), line_no);
  }
  return root;
}

RunConfig ConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a table");
  RunConfig c;
  const auto& bench = j.contains("benchmark") && j["benchmark"].is_string() ? nlohmann::json::object()
                                                                             : Section(j, "benchmark");
  if (j.contains("benchmark") && j["benchmark"].is_string()) c.benchmark = j["benchmark"].get<std::string>();
  Read(bench, "name", c.benchmark);
  Read(bench, "Q", c.subsystems);
  Read(bench, "subsystems", c.subsystems);

  const auto& data = Section(j, "data");
  Read(data, "T", c.samples);
  Read(data, "samples", c.samples);
  Read(data, "tau", c.tau);
  Read(data, "noise_bound", c.noise_bound);
  Read(data, "input_amplitude", c.input_amplitude);
  Read(data, "experiments", c.experiments);
  Read(data, "seed", c.seed);
  Read(j, "seed", c.seed);

  nlohmann::json synth = Section(j, "synth");
  if (synth.contains("deg_H")) {
    synth["deg_h"] = synth["deg_H"];
    synth.erase("deg_H");
  }
  int retries = c.max_retries;
  Read(synth, "max_retries", retries);
  synth.erase("max_retries");
  c.synth = synth.get<SynthConfig>();
  c.max_retries = retries;

  const auto& sim = Section(j, "sim");
  Read(sim, "t_end", c.t_end);
  Read(sim, "dt", c.dt);
  Read(sim, "runs", c.runs);
  Read(sim, "monitored", c.monitored);
  Read(sim, "record_stride", c.record_stride);
  Read(sim, "open_loop", c.open_loop);

  Read(Section(j, "verify"), "samples", c.verify_samples);
  Read(Section(j, "out"), "dir", c.out_dir);
  c.Validate();
  return c;
}

nlohmann::json ConfigToJson(const RunConfig& c) {
  nlohmann::json j;
  j["benchmark"] = {{"name", c.benchmark}};
  if (c.subsystems) j["benchmark"]["Q"] = *c.subsystems;
  nlohmann::json data = {{"seed", c.seed}};
  if (c.samples) data["T"] = *c.samples;
  if (c.tau) data["tau"] = *c.tau;
  if (c.noise_bound) data["noise_bound"] = *c.noise_bound;
  if (c.input_amplitude) data["input_amplitude"] = *c.input_amplitude;
  if (c.experiments) data["experiments"] = *c.experiments;
  j["data"] = data;
  j["synth"] = c.synth;
  j["synth"]["max_retries"] = c.max_retries;
  j["sim"] = {{"t_end", c.t_end},   {"dt", c.dt},   {"runs", c.runs}, {"monitored", c.monitored},
              {"record_stride", c.record_stride}, {"open_loop", c.open_loop}};
  j["verify"] = {{"samples", c.verify_samples}};
  j["out"] = {{"dir", c.out_dir}};
  return j;
}

RunConfig LoadConfig(const std::string& path) {
  const std::string text = ReadFile(path);
  const bool toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  return ConfigFromJson(toml ? ParseTomlSubset(text) : nlohmann::json::parse(text));
}

void RunConfig::Validate() const {
  const auto names = BenchmarkNames();
  if (std::find(names.begin(), names.end(), benchmark) == names.end())
    throw std::invalid_argument("unknown benchmark: " + benchmark);
  if (subsystems && *subsystems < 1) throw std::invalid_argument("subsystem count must be positive");
  if (samples && *samples < 1) throw std::invalid_argument("T must be positive");
  if (max_retries < 0) throw std::invalid_argument("max_retries must be non-negative");
  if (!(t_end >= 0) || !(dt > 0)) throw std::invalid_argument("need t_end >= 0 and dt > 0");
  if (runs < 0 || monitored < 0 || record_stride < 1) throw std::invalid_argument("invalid [sim] settings");
  if (verify_samples < 1) throw std::invalid_argument("verify samples must be positive");
  synth.Validate();
}

NetworkSpec RunConfig::Network() const {
  return subsystems ? Benchmark(benchmark, *subsystems) : Benchmark(benchmark);
}

DataConfig RunConfig::Data(const NetworkSpec& spec) const {
  const BenchmarkDefaults& d = spec.defaults;
  DataConfig c;
  c.samples = samples.value_or(d.samples);
  c.tau = tau.value_or(d.tau);
  c.noise_bound = noise_bound.value_or(d.noise_bound);
  c.input_amplitude = input_amplitude.value_or(d.input_amplitude);
  c.start_shrink = d.start_shrink;
  // Benchmarks that split T into one-sample experiments keep doing so when T changes.
  c.experiments = experiments.value_or(d.experiments == d.samples && d.experiments > 1 ? c.samples
                                                                                        : std::min(d.experiments, c.samples));
  c.seed = seed;
  return c;
}

SimConfig RunConfig::Sim(const NetworkSpec& spec) const {
  SimConfig s;
  s.runs = runs;
  s.t_end = t_end;
  s.dt = dt;
  s.seed = seed;
  s.open_loop = open_loop;
  s.record = MonitoredSubsystems(spec.Q, monitored);
  s.record_stride = record_stride;
  return s;
}

std::vector<int> MonitoredSubsystems(int q, int count) {
  std::vector<int> out;
  if (count <= 0 || q <= 0) return out;
  if (count >= q) {
    for (int i = 0; i < q; ++i) out.push_back(i);
    return out;
  }
  for (int k = 0; k < count; ++k) out.push_back(static_cast<int>(static_cast<long long>(k) * q / count));
  return out;
}

}  // namespace certnet
