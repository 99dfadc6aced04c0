#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qsceom/fermion.hpp"
#include "qsceom/optimize.hpp"
#include "qsceom/pauli.hpp"
#include "qsceom/random.hpp"
#include "qsceom/sampling.hpp"
#include "qsceom/statevector.hpp"

namespace qsceom {

enum class AnsatzKind { adapt, uccsd, hea, lucj };

std::string to_string(AnsatzKind kind);
AnsatzKind parse_ansatz_kind(const std::string& name);

/// exp(theta (G - G^dag)), one parameter.
struct ExcitationGate {
  FermionGenerator generator;
  int param = 0;
};

/// Ry(theta) = exp(-i theta Y / 2), one parameter.
struct RyGate {
  int qubit = 0;
  int param = 0;
};

/// CNOT(q, q+1) for q = 0..n-2, no parameters.
struct CnotCascadeGate {};

/// Orbital rotation exp(K) (or exp(-K) when `inverse`) on both spins. K is real
/// antisymmetric with its upper triangle (p < q, row-major) read from
/// parameters[param .. param + n(n-1)/2).
struct OrbitalRotationGate {
  int n_spatial = 0;
  int param = 0;
  bool inverse = false;
};

/// exp(i sum_k J_k n_{i_k} n_{j_k}) over spin-orbital pairs; parameters
/// [param .. param + pairs.size()).
struct JastrowGate {
  std::vector<std::pair<int, int>> pairs;
  int param = 0;
};

using AnsatzGate = std::variant<ExcitationGate, RyGate, CnotCascadeGate, OrbitalRotationGate, JastrowGate>;

/// Qubit tuples (1 or 2 entries) at which the depolarizing model inserts
/// errors after a gate; a nominal compilation of each gate type.
std::vector<std::vector<int>> noise_sites(const AnsatzGate& gate);

/// Ordered gate list defining U(theta). Gates are applied first to last.
class AnsatzCircuit {
 public:
  AnsatzCircuit() = default;
  AnsatzCircuit(AnsatzKind kind, int n_qubits) : kind_(kind), n_qubits_(n_qubits) {}

  AnsatzKind kind() const { return kind_; }
  int n_qubits() const { return n_qubits_; }
  const std::vector<AnsatzGate>& gates() const { return gates_; }
  const std::vector<double>& parameters() const { return params_; }
  std::vector<double>& parameters() { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  /// Appends an excitation gate with a fresh parameter.
  void add_excitation(const FermionGenerator& g, double theta = 0.0);
  void add_gate(AnsatzGate gate);
  /// Grows the parameter vector; returns the index of the first new entry.
  int reserve_parameters(std::size_t count, double value = 0.0);

  /// True when every gate is an excitation (analytic gradients available).
  bool excitation_only() const;
  std::size_t excitation_count() const;

  void apply(Statevector& state) const { apply(state, params_); }
  void apply(Statevector& state, std::span<const double> params) const;
  /// Same as apply, followed after every gate by depolarizing errors at the
  /// gate's noise sites.
  void apply_noisy(Statevector& state, std::span<const double> params, const NoiseModel& noise, Rng& rng) const;

  Statevector prepare(const Statevector& reference) const;

  /// Line-oriented text form: header lines, one gate per line, one theta per line.
  void write(std::ostream& out) const;
  static AnsatzCircuit read(std::istream& in);
  std::string to_text() const;
  static AnsatzCircuit from_text(const std::string& text);

 private:
  AnsatzKind kind_ = AnsatzKind::adapt;
  int n_qubits_ = 0;
  std::vector<AnsatzGate> gates_;
  std::vector<double> params_;
};

/// <psi|[H, A]|psi> = 2 Re <H psi | A psi>, A the anti-Hermitian image of g.
/// Equals d/dtheta <psi| e^{-theta A} H e^{theta A} |psi> at 0, matching the
/// exp(theta A) convention of apply_excitation.
double operator_gradient(const Statevector& state, const PauliSum& hamiltonian, const FermionGenerator& g);
/// Same with H|psi> precomputed.
double operator_gradient(const Statevector& state, const Statevector& h_state, const FermionGenerator& g);

double circuit_energy(const AnsatzCircuit& circuit, std::span<const double> params,
                      const CompiledPauliSum& hamiltonian, const Statevector& reference);

/// Energy and exact gradient of an excitation-only circuit (reverse sweep).
double circuit_energy_and_gradient(const AnsatzCircuit& circuit, std::span<const double> params,
                                   const CompiledPauliSum& hamiltonian, const Statevector& reference,
                                   std::span<double> grad);

struct VqeResult {
  AnsatzCircuit circuit;  // parameters set to the optimum
  double energy = 0.0;
  OptimizeStatus status = OptimizeStatus::failed;
  int evaluations = 0;
};

/// Minimizes <H> over the circuit parameters starting from circuit.parameters().
VqeResult run_vqe(const AnsatzCircuit& circuit, const PauliSum& hamiltonian, const Statevector& reference,
                  const OptimizeOptions& options);

struct AdaptConfig {
  double gradient_norm_threshold = 1e-3;
  int max_operators = 50;
  OptimizeOptions optimizer;
  bool reoptimize_all = true;

  void validate() const;
};

struct AdaptResult {
  AnsatzCircuit circuit;
  /// Energy before any operator, then after each accepted iteration.
  std::vector<double> energy_trace;
  /// Pool-gradient 2-norm at the start of each iteration.
  std::vector<double> gradient_norms;
  std::vector<int> selected;
  OptimizeStatus status = OptimizeStatus::converged;
  /// Set when an inner optimization failed or ran out of budget.
  bool warning = false;
  bool threshold_reached = false;
};

AdaptResult adapt_vqe(const PauliSum& hamiltonian, const std::vector<FermionGenerator>& pool,
                      const AdaptConfig& config, const Statevector& reference);

/// One excitation per pool generator, pool order, all parameters zero.
AnsatzCircuit uccsd_ansatz(const std::vector<FermionGenerator>& pool, int n_qubits);

/// Per layer: Ry on every qubit, then the CNOT cascade. Parameters drawn
/// uniformly from [-init_scale, init_scale] with the given seed.
AnsatzCircuit hea_ansatz(int n_qubits, int layers, std::uint64_t seed = 7, double init_scale = 0.1);

struct LucjConfig {
  int n_spatial = 0;
  int layers = 1;
  /// Spin-orbital pairs (i < j) allowed in each Jastrow matrix.
  std::vector<std::pair<int, int>> locality_mask;

  /// Same-spin nearest neighbours plus opposite-spin pairs on one orbital.
  static LucjConfig with_default_mask(int n_spatial, int layers);
  void validate() const;
  std::size_t rotation_params() const { return static_cast<std::size_t>(n_spatial * (n_spatial - 1) / 2); }
  std::size_t params_per_layer() const { return rotation_params() + locality_mask.size(); }
  std::size_t num_parameters() const { return static_cast<std::size_t>(layers) * params_per_layer(); }
};

/// Per layer exp(K) exp(iJ) exp(-K): the Jastrow phases act in the rotated
/// orbital basis. Parameters are laid out per layer as [K upper triangle,
/// J over the mask].
AnsatzCircuit lucj_ansatz(const LucjConfig& config, std::span<const double> parameters);

/// Flattens per-layer K (antisymmetric n x n) and J (symmetric 2n x 2n)
/// matrices; rejects non-antisymmetric K, non-symmetric J and J entries
/// outside the mask.
std::vector<double> lucj_pack_parameters(const LucjConfig& config, const std::vector<Eigen::MatrixXd>& k,
                                         const std::vector<Eigen::MatrixXd>& j);

/// Real antisymmetric generator from upper-triangle parameters.
Eigen::MatrixXd antisymmetric_from_params(int n, std::span<const double> params);

}  // namespace qsceom
