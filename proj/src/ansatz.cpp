#include "qsceom/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace qsceom {

std::string to_string(AnsatzKind kind) {
  switch (kind) {
    case AnsatzKind::adapt: return "adapt";
    case AnsatzKind::uccsd: return "uccsd";
    case AnsatzKind::hea: return "hea";
    case AnsatzKind::lucj: return "lucj";
  }
  return "adapt";
}

AnsatzKind parse_ansatz_kind(const std::string& name) {
  if (name == "adapt") return AnsatzKind::adapt;
  if (name == "uccsd") return AnsatzKind::uccsd;
  if (name == "hea") return AnsatzKind::hea;
  if (name == "lucj") return AnsatzKind::lucj;
  throw std::invalid_argument("unknown ansatz kind '" + name + "'");
}

namespace {

int gate_param_count(const AnsatzGate& gate) {
  return std::visit(
      [](const auto& g) -> int {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ExcitationGate> || std::is_same_v<T, RyGate>) return 1;
        else if constexpr (std::is_same_v<T, OrbitalRotationGate>) return g.n_spatial * (g.n_spatial - 1) / 2;
        else if constexpr (std::is_same_v<T, JastrowGate>) return static_cast<int>(g.pairs.size());
        else return 0;
      },
      gate);
}

int gate_param_offset(const AnsatzGate& gate) {
  return std::visit(
      [](const auto& g) -> int {
        if constexpr (requires { g.param; }) return g.param;
        else return 0;
      },
      gate);
}

// CNOT ladder up and down over [lo, hi] plus basis changes and a Z rotation.
void excitation_sites(const FermionGenerator& g, std::vector<std::vector<int>>& sites) {
  std::vector<int> modes = g.occupied;
  modes.insert(modes.end(), g.virtual_.begin(), g.virtual_.end());
  std::sort(modes.begin(), modes.end());
  const int lo = modes.front(), hi = modes.back();
  const int n_terms = g.kind == FermionGenerator::Kind::single ? 2 : 8;
  for (int t = 0; t < n_terms; ++t) {
    for (int m : modes) sites.push_back({m});
    for (int q = lo; q < hi; ++q) sites.push_back({q, q + 1});
    sites.push_back({hi});
    for (int q = hi - 1; q >= lo; --q) sites.push_back({q, q + 1});
    for (int m : modes) sites.push_back({m});
  }
}

}  // namespace

std::vector<std::vector<int>> noise_sites(const AnsatzGate& gate) {
  std::vector<std::vector<int>> sites;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ExcitationGate>) {
          excitation_sites(g.generator, sites);
        } else if constexpr (std::is_same_v<T, RyGate>) {
          sites.push_back({g.qubit});
        } else if constexpr (std::is_same_v<T, CnotCascadeGate>) {
          // filled by the caller, which knows the register width
        } else if constexpr (std::is_same_v<T, OrbitalRotationGate>) {
          // each Givens rotation on neighbouring orbitals: two 2q sites per spin
          for (int p = 0; p + 1 < g.n_spatial; ++p) {
            const int reps = g.n_spatial - 1 - p;
            for (int r = 0; r < reps; ++r) {
              for (int s = 0; s < 2; ++s) {
                sites.push_back({2 * p + s, 2 * (p + 1) + s});
                sites.push_back({2 * p + s, 2 * (p + 1) + s});
              }
            }
          }
        } else if constexpr (std::is_same_v<T, JastrowGate>) {
          for (const auto& [i, j] : g.pairs) sites.push_back({i, j});
        }
      },
      gate);
  return sites;
}

void AnsatzCircuit::add_excitation(const FermionGenerator& g, double theta) {
  if (g.max_mode() >= n_qubits_) throw std::invalid_argument("generator exceeds register");
  const int idx = reserve_parameters(1, theta);
  gates_.push_back(ExcitationGate{g, idx});
}

void AnsatzCircuit::add_gate(AnsatzGate gate) {
  const int off = gate_param_offset(gate), cnt = gate_param_count(gate);
  if (off < 0 || static_cast<std::size_t>(off + cnt) > params_.size())
    throw std::invalid_argument("gate parameters out of range");
  gates_.push_back(std::move(gate));
}

int AnsatzCircuit::reserve_parameters(std::size_t count, double value) {
  const int first = static_cast<int>(params_.size());
  params_.resize(params_.size() + count, value);
  return first;
}

bool AnsatzCircuit::excitation_only() const {
  return std::all_of(gates_.begin(), gates_.end(),
                     [](const AnsatzGate& g) { return std::holds_alternative<ExcitationGate>(g); });
}

std::size_t AnsatzCircuit::excitation_count() const {
  return static_cast<std::size_t>(std::count_if(
      gates_.begin(), gates_.end(), [](const AnsatzGate& g) { return std::holds_alternative<ExcitationGate>(g); }));
}

Eigen::MatrixXd antisymmetric_from_params(int n, std::span<const double> params) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  std::size_t idx = 0;
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      k(p, q) = params[idx];
      k(q, p) = -params[idx];
      ++idx;
    }
  return k;
}

namespace {

void apply_gate(const AnsatzGate& gate, Statevector& state, std::span<const double> params) {
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ExcitationGate>) {
          apply_excitation(state, g.generator, params[static_cast<std::size_t>(g.param)]);
        } else if constexpr (std::is_same_v<T, RyGate>) {
          apply_ry(state, g.qubit, params[static_cast<std::size_t>(g.param)]);
        } else if constexpr (std::is_same_v<T, CnotCascadeGate>) {
          for (int q = 0; q + 1 < state.n_qubits(); ++q) apply_cnot(state, q, q + 1);
        } else if constexpr (std::is_same_v<T, OrbitalRotationGate>) {
          const auto n = static_cast<std::size_t>(g.n_spatial * (g.n_spatial - 1) / 2);
          Eigen::MatrixXd k = antisymmetric_from_params(g.n_spatial, params.subspan(static_cast<std::size_t>(g.param), n));
          if (k.isZero(0.0)) return;
          if (g.inverse) k = -k;
          const Eigen::MatrixXd r = k.exp();
          apply_orbital_rotation(state, r);
        } else if constexpr (std::is_same_v<T, JastrowGate>) {
          apply_number_phases(state, g.pairs, params.subspan(static_cast<std::size_t>(g.param), g.pairs.size()));
        }
      },
      gate);
}

}  // namespace

void AnsatzCircuit::apply(Statevector& state, std::span<const double> params) const {
  if (state.n_qubits() != n_qubits_) throw std::invalid_argument("state width does not match circuit");
  if (params.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
  for (const auto& g : gates_) apply_gate(g, state, params);
}

void AnsatzCircuit::apply_noisy(Statevector& state, std::span<const double> params, const NoiseModel& noise,
                                Rng& rng) const {
  if (!noise.has_gate_noise()) {
    apply(state, params);
    return;
  }
  if (state.n_qubits() != n_qubits_) throw std::invalid_argument("state width does not match circuit");
  if (params.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
  for (const auto& g : gates_) {
    apply_gate(g, state, params);
    std::vector<std::vector<int>> sites = noise_sites(g);
    if (std::holds_alternative<CnotCascadeGate>(g))
      for (int q = 0; q + 1 < n_qubits_; ++q) sites.push_back({q, q + 1});
    for (const auto& s : sites) apply_depolarizing(state, s, s.size() == 1 ? noise.depol_1q : noise.depol_2q, rng);
  }
}

Statevector AnsatzCircuit::prepare(const Statevector& reference) const {
  Statevector s = reference;
  apply(s);
  return s;
}

void AnsatzCircuit::write(std::ostream& out) const {
  out << "ansatz " << to_string(kind_) << "\n";
  out << "qubits " << n_qubits_ << "\n";
  out << "parameters " << params_.size() << "\n";
  for (const auto& gate : gates_) {
    std::visit(
        [&](const auto& g) {
          using T = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<T, ExcitationGate>) {
            out << "excitation " << g.param << " " << g.generator.to_string() << "\n";
          } else if constexpr (std::is_same_v<T, RyGate>) {
            out << "ry " << g.param << " " << g.qubit << "\n";
          } else if constexpr (std::is_same_v<T, CnotCascadeGate>) {
            out << "cnot_cascade\n";
          } else if constexpr (std::is_same_v<T, OrbitalRotationGate>) {
            out << "orbital_rotation " << g.param << " " << g.n_spatial << " " << (g.inverse ? 1 : 0) << "\n";
          } else if constexpr (std::is_same_v<T, JastrowGate>) {
            out << "jastrow " << g.param << " " << g.pairs.size();
            for (const auto& [i, j] : g.pairs) out << " " << i << " " << j;
            out << "\n";
          }
        },
        gate);
  }
  out << std::setprecision(17);
  for (std::size_t i = 0; i < params_.size(); ++i) out << "theta " << i << " " << params_[i] << "\n";
}

AnsatzCircuit AnsatzCircuit::read(std::istream& in) {
  AnsatzCircuit c;
  std::string line;
  std::size_t declared = 0;
  bool have_kind = false, have_qubits = false;
  std::vector<bool> seen;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("ansatz text line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "ansatz") {
      std::string k;
      ls >> k;
      c.kind_ = parse_ansatz_kind(k);
      have_kind = true;
    } else if (key == "qubits") {
      if (!(ls >> c.n_qubits_) || c.n_qubits_ < 0) fail("bad qubit count");
      have_qubits = true;
    } else if (key == "parameters") {
      if (!(ls >> declared)) fail("bad parameter count");
      c.params_.assign(declared, 0.0);
      seen.assign(declared, false);
    } else if (key == "excitation") {
      int p;
      if (!(ls >> p)) fail("missing parameter index");
      std::string rest;
      std::getline(ls, rest);
      const auto first = rest.find_first_not_of(' ');
      ExcitationGate g{FermionGenerator::parse(first == std::string::npos ? "" : rest.substr(first)), p};
      if (g.generator.max_mode() >= c.n_qubits_) fail("generator exceeds register");
      c.add_gate(g);
    } else if (key == "ry") {
      RyGate g;
      if (!(ls >> g.param >> g.qubit) || g.qubit < 0 || g.qubit >= c.n_qubits_) fail("bad ry gate");
      c.add_gate(g);
    } else if (key == "cnot_cascade") {
      c.add_gate(CnotCascadeGate{});
    } else if (key == "orbital_rotation") {
      OrbitalRotationGate g;
      int inv = 0;
      if (!(ls >> g.param >> g.n_spatial >> inv) || 2 * g.n_spatial != c.n_qubits_) fail("bad orbital rotation");
      g.inverse = inv != 0;
      c.add_gate(g);
    } else if (key == "jastrow") {
      JastrowGate g;
      std::size_t n = 0;
      if (!(ls >> g.param >> n)) fail("bad jastrow gate");
      for (std::size_t k = 0; k < n; ++k) {
        int i, j;
        if (!(ls >> i >> j) || i < 0 || j < 0 || i >= c.n_qubits_ || j >= c.n_qubits_) fail("bad jastrow pair");
        g.pairs.emplace_back(i, j);
      }
      c.add_gate(g);
    } else if (key == "theta") {
      std::size_t i;
      double v;
      if (!(ls >> i >> v) || i >= c.params_.size()) fail("bad theta line");
      c.params_[i] = v;
      seen[i] = true;
    } else {
      fail("unknown record '" + key + "'");
    }
  }
  if (!have_kind || !have_qubits) throw std::invalid_argument("ansatz text missing header");
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::invalid_argument("ansatz text missing theta values");
  return c;
}

std::string AnsatzCircuit::to_text() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

AnsatzCircuit AnsatzCircuit::from_text(const std::string& text) {
  std::istringstream is(text);
  return read(is);
}

double operator_gradient(const Statevector& state, const Statevector& h_state, const FermionGenerator& g) {
  const Statevector a_state = apply_generator(state, g);
  return 2.0 * h_state.inner(a_state).real();
}

double operator_gradient(const Statevector& state, const PauliSum& hamiltonian, const FermionGenerator& g) {
  const CompiledPauliSum h(hamiltonian);
  Statevector hs(state.n_qubits());
  h.apply(state.span(), hs.span());
  return operator_gradient(state, hs, g);
}

double circuit_energy(const AnsatzCircuit& circuit, std::span<const double> params,
                      const CompiledPauliSum& hamiltonian, const Statevector& reference) {
  Statevector s = reference;
  circuit.apply(s, params);
  return hamiltonian.expectation(s.span()).real();
}

double circuit_energy_and_gradient(const AnsatzCircuit& circuit, std::span<const double> params,
                                   const CompiledPauliSum& hamiltonian, const Statevector& reference,
                                   std::span<double> grad) {
  if (!circuit.excitation_only()) throw std::invalid_argument("analytic gradient needs an excitation-only circuit");
  Statevector psi = reference;
  circuit.apply(psi, params);
  Statevector lambda(psi.n_qubits());
  hamiltonian.apply(psi.span(), lambda.span());
  const double energy = psi.inner(lambda).real();
  std::fill(grad.begin(), grad.end(), 0.0);
  const auto& gates = circuit.gates();
  for (std::size_t k = gates.size(); k-- > 0;) {
    const auto& g = std::get<ExcitationGate>(gates[k]);
    const double theta = params[static_cast<std::size_t>(g.param)];
    grad[static_cast<std::size_t>(g.param)] += 2.0 * lambda.inner(apply_generator(psi, g.generator)).real();
    apply_excitation(psi, g.generator, -theta);
    apply_excitation(lambda, g.generator, -theta);
  }
  return energy;
}

VqeResult run_vqe(const AnsatzCircuit& circuit, const PauliSum& hamiltonian, const Statevector& reference,
                  const OptimizeOptions& options) {
  const CompiledPauliSum h(hamiltonian);
  Objective f = [&](std::span<const double> x) { return circuit_energy(circuit, x, h, reference); };
  ObjectiveWithGradient fg;
  if (circuit.excitation_only())
    fg = [&](std::span<const double> x, std::span<double> g) {
      return circuit_energy_and_gradient(circuit, x, h, reference, g);
    };
  OptimizeResult r = optimize(f, circuit.parameters(), options, fg);
  VqeResult out;
  out.circuit = circuit;
  out.circuit.parameters() = r.x;
  out.energy = r.value;
  out.status = r.status;
  out.evaluations = r.evaluations;
  return out;
}

void AdaptConfig::validate() const {
  if (!(gradient_norm_threshold > 0.0)) throw std::invalid_argument("ADAPT gradient threshold must be > 0");
  if (max_operators < 0) throw std::invalid_argument("ADAPT max_operators must be >= 0");
}

AdaptResult adapt_vqe(const PauliSum& hamiltonian, const std::vector<FermionGenerator>& pool,
                      const AdaptConfig& config, const Statevector& reference) {
  config.validate();
  if (pool.empty()) throw std::invalid_argument("ADAPT pool is empty");
  const int n = reference.n_qubits();
  for (const auto& g : pool)
    if (g.max_mode() >= n) throw std::invalid_argument("pool generator exceeds register");
  const CompiledPauliSum h(hamiltonian);

  AdaptResult res;
  res.circuit = AnsatzCircuit(AnsatzKind::adapt, n);
  Statevector psi = reference;
  Statevector hpsi(n);
  h.apply(psi.span(), hpsi.span());
  res.energy_trace.push_back(psi.inner(hpsi).real());

  while (true) {
    double norm2 = 0.0, best = -1.0;
    int best_idx = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double gi = operator_gradient(psi, hpsi, pool[i]);
      norm2 += gi * gi;
      if (std::abs(gi) > best) {  // strict: the lowest index wins ties
        best = std::abs(gi);
        best_idx = static_cast<int>(i);
      }
    }
    const double norm = std::sqrt(norm2);
    res.gradient_norms.push_back(norm);
    if (norm < config.gradient_norm_threshold) {
      res.threshold_reached = true;
      break;
    }
    if (static_cast<int>(res.circuit.excitation_count()) >= config.max_operators) break;

    res.circuit.add_excitation(pool[static_cast<std::size_t>(best_idx)], 0.0);
    res.selected.push_back(best_idx);

    AnsatzCircuit& c = res.circuit;
    Objective f = [&](std::span<const double> x) { return circuit_energy(c, x, h, reference); };
    ObjectiveWithGradient fg = [&](std::span<const double> x, std::span<double> g) {
      return circuit_energy_and_gradient(c, x, h, reference, g);
    };
    OptimizeResult r;
    if (config.reoptimize_all) {
      r = optimize(f, c.parameters(), config.optimizer, fg);
      c.parameters() = r.x;
    } else {
      // only the newest parameter moves
      std::vector<double> frozen = c.parameters();
      const std::size_t last = frozen.size() - 1;
      Objective f1 = [&](std::span<const double> x) {
        frozen[last] = x[0];
        return f(frozen);
      };
      r = optimize(f1, {0.0}, config.optimizer);
      c.parameters()[last] = r.x[0];
    }
    if (r.status != OptimizeStatus::converged) {
      res.warning = true;
      res.status = r.status;
    }
    psi = reference;
    c.apply(psi);
    h.apply(psi.span(), hpsi.span());
    res.energy_trace.push_back(psi.inner(hpsi).real());
    if (r.status == OptimizeStatus::failed) break;
  }
  return res;
}

AnsatzCircuit uccsd_ansatz(const std::vector<FermionGenerator>& pool, int n_qubits) {
  AnsatzCircuit c(AnsatzKind::uccsd, n_qubits);
  for (const auto& g : pool) c.add_excitation(g, 0.0);
  return c;
}

AnsatzCircuit hea_ansatz(int n_qubits, int layers, std::uint64_t seed, double init_scale) {
  if (layers < 1) throw std::invalid_argument("HEA needs at least one layer");
  if (n_qubits < 1) throw std::invalid_argument("HEA needs at least one qubit");
  AnsatzCircuit c(AnsatzKind::hea, n_qubits);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-init_scale, init_scale);
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q < n_qubits; ++q) {
      const int p = c.reserve_parameters(1, init_scale > 0.0 ? u(rng) : 0.0);
      c.add_gate(RyGate{q, p});
    }
    c.add_gate(CnotCascadeGate{});
  }
  return c;
}

LucjConfig LucjConfig::with_default_mask(int n_spatial, int layers) {
  LucjConfig cfg;
  cfg.n_spatial = n_spatial;
  cfg.layers = layers;
  for (int p = 0; p < n_spatial; ++p) {
    cfg.locality_mask.emplace_back(2 * p, 2 * p + 1);
    if (p + 1 < n_spatial) {
      cfg.locality_mask.emplace_back(2 * p, 2 * (p + 1));
      cfg.locality_mask.emplace_back(2 * p + 1, 2 * (p + 1) + 1);
    }
  }
  std::sort(cfg.locality_mask.begin(), cfg.locality_mask.end());
  return cfg;
}

void LucjConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("LUCJ needs at least one layer");
  if (n_spatial < 1) throw std::invalid_argument("LUCJ needs at least one orbital");
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : locality_mask) {
    if (i < 0 || j < 0 || i >= 2 * n_spatial || j >= 2 * n_spatial)
      throw std::invalid_argument("LUCJ mask pair out of range");
    if (i >= j) throw std::invalid_argument("LUCJ mask pairs must be listed once with i < j");
    if (!seen.insert({i, j}).second) throw std::invalid_argument("duplicate LUCJ mask pair");
  }
}

AnsatzCircuit lucj_ansatz(const LucjConfig& config, std::span<const double> parameters) {
  config.validate();
  if (parameters.size() != config.num_parameters())
    throw std::invalid_argument("LUCJ expects " + std::to_string(config.num_parameters()) + " parameters");
  AnsatzCircuit c(AnsatzKind::lucj, 2 * config.n_spatial);
  c.reserve_parameters(parameters.size());
  std::copy(parameters.begin(), parameters.end(), c.parameters().begin());
  for (int l = 0; l < config.layers; ++l) {
    const int base = l * static_cast<int>(config.params_per_layer());
    const int jbase = base + static_cast<int>(config.rotation_params());
    c.add_gate(OrbitalRotationGate{config.n_spatial, base, true});
    c.add_gate(JastrowGate{config.locality_mask, jbase});
    c.add_gate(OrbitalRotationGate{config.n_spatial, base, false});
  }
  return c;
}

std::vector<double> lucj_pack_parameters(const LucjConfig& config, const std::vector<Eigen::MatrixXd>& k,
                                         const std::vector<Eigen::MatrixXd>& j) {
  config.validate();
  const int n = config.n_spatial;
  if (k.size() != static_cast<std::size_t>(config.layers) || j.size() != k.size())
    throw std::invalid_argument("one K and one J matrix per LUCJ layer");
  std::set<std::pair<int, int>> mask(config.locality_mask.begin(), config.locality_mask.end());
  std::vector<double> out;
  out.reserve(config.num_parameters());
  constexpr double tol = 1e-12;
  for (int l = 0; l < config.layers; ++l) {
    const auto& kl = k[static_cast<std::size_t>(l)];
    const auto& jl = j[static_cast<std::size_t>(l)];
    if (kl.rows() != n || kl.cols() != n) throw std::invalid_argument("K must be n_spatial x n_spatial");
    if ((kl + kl.transpose()).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("K is not antisymmetric");
    if (jl.rows() != 2 * n || jl.cols() != 2 * n) throw std::invalid_argument("J must be 2n x 2n");
    if ((jl - jl.transpose()).cwiseAbs().maxCoeff() > tol) throw std::invalid_argument("J is not symmetric");
    for (int a = 0; a < 2 * n; ++a)
      for (int b = a; b < 2 * n; ++b)
        if (std::abs(jl(a, b)) > tol && !mask.count({a, b}))
          throw std::invalid_argument("J entry (" + std::to_string(a) + "," + std::to_string(b) +
                                      ") violates the locality mask");
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) out.push_back(kl(p, q));
    // exp(i sum_{a<b} J_ab n_a n_b) with the symmetric pair counted once
    for (const auto& [a, b] : config.locality_mask) out.push_back(jl(a, b));
  }
  return out;
}

}  // namespace qsceom
