#include "qsceom/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qsceom {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"seed", "1234", "master seed; per-run seeds are derived from (seed, run index)"},
      {"threads", "1", "worker threads for independent runs", false},
      {"output.dir", "out", "directory receiving CSV, SVG and the resolved config", false},
      {"fixture.dir", "tests/data", "directory holding <name>.fcidump fixtures"},
      {"fixture", "h2_0.74_sto3g", "fixture used by fci and dump-hamiltonian"},
      {"active.electrons", "0", "active electrons (0 = full space)"},
      {"active.orbitals", "0", "active spatial orbitals (0 = full space)"},
      {"sector.n_alpha", "-1", "alpha electrons of the target sector (-1 = from the fixture)"},
      {"sector.n_beta", "-1", "beta electrons of the target sector (-1 = from the fixture)"},
      {"ansatz.kind", "adapt", "adapt | uccsd | hea | lucj"},
      {"adapt.threshold", "1e-3", "pool-gradient 2-norm stopping threshold"},
      {"adapt.max_operators", "50", "maximum ADAPT iterations"},
      {"hea.layers", "4", "hardware-efficient layers"},
      {"hea.init_scale", "0.1", "initial angles uniform in [-scale, scale]"},
      {"hea.reference", "vacuum", "vacuum | hf"},
      {"lucj.layers", "2", "LUCJ layers"},
      {"optimizer.method", "gradient", "gradient | derivative-free"},
      {"optimizer.max_evaluations", "5000", "objective evaluation cap per optimization"},
      {"optimizer.gradient_tolerance", "1e-8", "gradient-method stopping tolerance"},
      {"manifold", "singles_doubles", "q-sc-EOM manifold (singles_doubles)"},
      {"eom.shift", "0", "constant subtracted from the diagonal of M"},
      {"eom.roots", "4", "roots reported per geometry"},
      {"solver", "dense", "dense | davidson"},
      {"davidson.k", "3", "Davidson roots"},
      {"davidson.tol", "1e-6", "Davidson residual tolerance"},
      {"davidson.max_subspace", "60", "Davidson subspace size before restart"},
      {"davidson.support_tol", "1e-7", "relative cutoff for correction-vector components"},
      {"davidson.symmetry", "on", "solve Z2 orbital-symmetry blocks separately when the ansatz preserves them"},
      {"expectations", "exact", "exact | sampled (pes only)"},
      {"shots.budget", "500000", "total shots per sampled build"},
      {"shots.allocation", "uniform", "uniform | adaptive"},
      {"shots.floor", "1", "minimum shots per setting"},
      {"shots.pilot_fraction", "0.1", "adaptive pilot share of the budget"},
      {"shots.pilot_floor", "10", "adaptive pilot shots per setting"},
      {"noise.readout", "0.02", "symmetric readout flip probability per qubit"},
      {"noise.depol_1q", "0.0001", "single-qubit depolarizing probability"},
      {"noise.depol_2q", "0.001", "two-qubit depolarizing probability"},
      {"noise.trajectories", "32", "gate-noise trajectories per prepared state"},
      {"mitigation.m3", "off", "on | off"},
      {"mitigation.postselect", "off", "on | off"},
      {"pes.fixtures", "h2_0.50_sto3g,h2_0.74_sto3g,h2_1.00_sto3g,h2_1.50_sto3g,h2_2.00_sto3g,h2_2.50_sto3g",
       "fixtures of the scan, one per geometry"},
      {"bench.fixture", "h4_linear_3.0_sto6g", "ansatz benchmark fixture"},
      {"bench.ansatze", "uccsd,hea,adapt", "ansatz rows of the benchmark"},
      {"bench.optimizers", "gradient,derivative-free", "optimizers of the comparison table"},
      {"bench.exact_max_evaluations", "30000", "evaluation cap per inner optimization of the exact-objective table"},
      {"bench.seeds", "5", "seeds of the shot-sampled optimizer comparison"},
      {"bench.sampled_shots", "1000", "shots per measurement group per sampled objective evaluation"},
      {"bench.sampled_max_evaluations", "1500", "evaluation cap of sampled-objective optimizations"},
      {"brg.fixtures",
       "hchain2_1.5_sto3g,hchain4_1.5_sto3g,hchain6_1.5_sto3g,hchain8_1.5_sto3g,hchain10_1.5_sto3g,"
       "hchain12_1.5_sto3g",
       "fixtures of the group-count sweep"},
      {"brg.cutoff", "factor_norm", "factor_norm (sqrt|w| of each rank) | weight (|w|)"},
      {"brg.tolerances", "1e-6,1e-4", "tolerances of the group-count sweep"},
      {"brg.sweep_fixture", "hchain4_1.5_sto3g", "fixture of the error-vs-tolerance sweep"},
      {"brg.sweep_tolerances", "1e-1,1e-2,1e-3,1e-4,1e-5,1e-6,1e-8,1e-10,0", "tolerances of the error sweep"},
      {"brg.chain_fixtures", "hchain2_1.5_sto3g,hchain4_1.5_sto3g,hchain6_1.5_sto3g",
       "fixtures of the error-vs-chain-length table"},
      {"brg.chain_tolerance", "1e-4", "tolerance of the error-vs-chain-length table"},
      {"brg.scaling_fixtures", "hchain2_1.5_sto3g,hchain4_1.5_sto3g,hchain6_1.5_sto3g",
       "fixtures of the measurement-cost scaling report"},
      {"brg.scaling_shots", "1000", "shots per setting in the scaling report"},
      {"noise.fixtures", "h2_0.74_sto3g,h2o_0.94_sto3g:2e2o", "fixtures (name[:<N>e<M>o]) of the noise benchmark"},
      {"noise.seeds", "5", "seeded runs per configuration"},
      {"noise.configurations", "exact,shots,shots+readout,shots+readout+depol", "noise configurations"},
      {"noise.mitigations", "none,m3,m3+postselect", "mitigation stacks"},
      {"noise.allocations", "uniform,adaptive", "allocation modes"},
      {"noise.budgets", "500000,100000", "total shot budgets"},
      {"noise.depol_sweep", "0,1e-3,1e-2", "depol_2q values of the gate-noise sweep (depol_1q = depol_2q/10)"},
      {"fci.roots", "4", "roots printed by the fci command"},
  };
  return schema;
}

namespace {

const ConfigKey* find_key(const std::string& key) {
  for (const auto& k : config_schema())
    if (k.name == key) return &k;
  return nullptr;
}

}  // namespace

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string item = trim(text.substr(start, pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = pos + 1;
  }
  return out;
}

ExperimentConfig::ExperimentConfig() {
  for (const auto& k : config_schema()) values_[k.name] = k.default_value;
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.erase(hash_pos);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!find_key(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError(where + ": key '" + key + "' already set on line " + std::to_string(it->second));
    seen[key] = lineno;
    cfg.values_[key] = value;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError("unknown key '" + key + "'");
  values_[key] = trim(value);
}

void ExperimentConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(std::string_view(assignment).substr(0, eq)), assignment.substr(eq + 1));
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

namespace {

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
}

}  // namespace

double ExperimentConfig::get_double(const std::string& key) const { return to_double(key, get(key)); }

std::int64_t ExperimentConfig::get_int(const std::string& key) const {
  const std::string& text = get(key);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  return v;
}

std::uint64_t ExperimentConfig::get_uint(const std::string& key) const {
  const std::string& text = get(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  std::string text = get(key);
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  if (text == "on" || text == "true" || text == "1" || text == "yes") return true;
  if (text == "off" || text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + key + "': expected on|off, got '" + get(key) + "'");
}

std::vector<std::string> ExperimentConfig::get_list(const std::string& key) const { return split_list(get(key)); }

std::vector<double> ExperimentConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) out.push_back(to_double(key, item));
  return out;
}

std::string ExperimentConfig::resolved_text() const {
  std::ostringstream out;
  for (const auto& k : config_schema()) out << k.name << " = " << values_.at(k.name) << '\n';
  return out.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& k : config_schema()) {
    if (!k.hashed) continue;
    const std::string line = k.name + "=" + values_.at(k.name) + "\n";
    for (unsigned char c : line) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::write_resolved(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "# config_hash=" << hash() << '\n' << resolved_text();
}

int ExperimentConfig::threads() const {
  const auto t = get_int("threads");
  if (t < 1) throw ConfigError("threads must be >= 1");
  return static_cast<int>(t);
}

}  // namespace qsceom
