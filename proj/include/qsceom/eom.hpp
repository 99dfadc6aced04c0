#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsceom/ansatz.hpp"
#include "qsceom/measurement.hpp"
#include "qsceom/mitigation.hpp"
#include "qsceom/sampling.hpp"

namespace qsceom {

/// [identity, singles..., doubles...] acting on the reference determinant.
struct EomBasis {
  int n_qubits = 0;
  std::uint64_t reference_bits = 0;
  std::vector<std::optional<FermionGenerator>> entries;

  /// Closed- or open-shell filling with the lowest n_alpha / n_beta orbitals
  /// occupied; generators follow build_excitation_pool ordering.
  static EomBasis singles_doubles(int n_qubits, int n_alpha, int n_beta);

  std::size_t size() const { return entries.size(); }
  /// G_J |ref> as (bits, sign); throws when G_J annihilates the reference.
  BasisImage determinant(std::size_t j) const;
  int n_occupied() const;
  int n_virtual() const { return n_qubits - n_occupied(); }
};

struct CostLedger {
  std::uint64_t elements_evaluated = 0;
  std::uint64_t circuits_executed = 0;
  std::uint64_t shots_consumed = 0;

  CostLedger& operator+=(const CostLedger& o) {
    elements_evaluated += o.elements_evaluated;
    circuits_executed += o.circuits_executed;
    shots_consumed += o.shots_consumed;
    return *this;
  }
};

/// elements,circuits,shots
void write_ledger_csv(std::ostream& out, const CostLedger& ledger);

struct EomMatrix {
  Eigen::MatrixXd values;
  Eigen::MatrixXd imaginary;  // measured Im parts (sampled builds only)
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> shots;
  Eigen::MatrixXd standard_error;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> evaluated;
  std::vector<std::pair<int, int>> flagged;  // postselection emptied a group
  double shift = 0.0;
  bool finalized = false;

  static EomMatrix zeros(std::size_t n, double shift = 0.0);
  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  /// values <- (values + values^T) / 2; idempotent.
  void finalize();
  /// I,J,value,shots,stderr
  void write_csv(std::ostream& out) const;
};

struct EomSolution {
  std::vector<double> total_energies;       // ascending
  std::vector<double> excitation_energies;  // relative to root 0
  Eigen::MatrixXd eigenvectors;             // columns
  std::vector<bool> degenerate;             // root within tolerance of a neighbour
  bool converged = true;

  /// root,total_energy,excitation_energy
  void write_csv(std::ostream& out) const;
};

/// U * G_J |reference>, normalized.
Statevector build_basis_state(const AnsatzCircuit& ansatz, const std::optional<FermionGenerator>& entry,
                              const Statevector& reference);

/// All basis states U |Phi_J> in basis order.
std::vector<Statevector> prepare_basis_states(const AnsatzCircuit& ansatz, const EomBasis& basis);

/// M_IJ = <Phi_I|U^dag H U|Phi_J> - delta_IJ shift, finalized.
EomMatrix build_m_exact(const AnsatzCircuit& ansatz, const PauliSum& hamiltonian, const EomBasis& basis,
                        double shift = 0.0);
EomMatrix build_m_exact(const std::vector<Statevector>& states, const PauliSum& hamiltonian, double shift = 0.0);

/// Lazily evaluated exact elements with H U|Phi_J> cached per column.
class ExactElementOracle {
 public:
  ExactElementOracle(std::vector<Statevector> states, const PauliSum& hamiltonian);
  double operator()(int i, int j);
  Eigen::VectorXd diagonal();
  std::size_t size() const { return states_.size(); }

 private:
  const Statevector& h_state(int j);
  std::vector<Statevector> states_;
  CompiledPauliSum h_;
  std::vector<std::optional<Statevector>> h_states_;
};

/// Every (I, J, phase, group) setting of the brute-force build: diagonal
/// settings for I == J, two phase settings for each I < J.
std::vector<MeasurementSetting> enumerate_settings(std::size_t n_basis, std::size_t n_groups);

struct SampledBuildOptions {
  NoiseModel noise;
  MitigationConfig mitigation;
  int trajectories = 32;     // gate-noise trajectories averaged per state
  bool analytic = false;     // exact distributions instead of finite shots
};

struct SampledBuild {
  EomMatrix matrix;
  CostLedger ledger;
  double mean_retained_fraction = 1.0;  // over postselected settings
};

using SettingCounts = std::map<std::size_t, CountsHistogram>;

/// Per-setting raw counts for a plan (used for pilots and by build_m_sampled).
SettingCounts measure_settings(const AnsatzCircuit& ansatz, const GroupedObservable& observable,
                               const EomBasis& basis, const ShotPlan& plan, const SampledBuildOptions& options,
                               std::uint64_t seed);

/// Shot-sampled (or analytic) build following `plan`. Counts from `pilot`
/// (keyed by setting index of the same plan) are pooled before mitigation.
SampledBuild build_m_sampled(const AnsatzCircuit& ansatz, const GroupedObservable& observable,
                             const EomBasis& basis, const ShotPlan& plan, const SampledBuildOptions& options,
                             std::uint64_t seed, const SettingCounts* pilot = nullptr, double shift = 0.0);

/// M from BRG-grouped measurements. Diagonal elements measure U|Phi_I>, real
/// off-diagonal parts measure (U|Phi_I> + U|Phi_J>)/sqrt2 and subtract the
/// diagonal mean (real ansatze have Im M = 0). shots_per_group = 0 evaluates
/// the infinite-shot limit of the same estimator.
SampledBuild build_m_brg(const std::vector<Statevector>& states, const BrgFactorization& factorization,
                         std::uint64_t shots_per_group, const NoiseModel& noise, std::uint64_t seed,
                         double shift = 0.0);

enum class AllocationMode { uniform, adaptive };
AllocationMode parse_allocation_mode(const std::string& name);
std::string to_string(AllocationMode m);

struct BudgetedBuildOptions {
  std::uint64_t budget = 0;
  AllocationMode allocation = AllocationMode::uniform;
  std::uint64_t floor = 1;
  double pilot_fraction = 0.1;
  std::uint64_t pilot_floor = 10;
};

/// Spends exactly `budget` shots: uniform split, or a uniform pilot followed by
/// sqrt-variance allocation of the remainder with pilot counts pooled.
SampledBuild build_m_budgeted(const AnsatzCircuit& ansatz, const GroupedObservable& observable,
                              const EomBasis& basis, const BudgetedBuildOptions& budget,
                              const SampledBuildOptions& options, std::uint64_t seed);

/// Dense symmetric eigendecomposition; energies include the build shift.
EomSolution diagonalize(const EomMatrix& m, double degeneracy_tol = 1e-8);

struct DavidsonOptions {
  int k = 3;
  double tol = 1e-6;          // residual 2-norm
  int max_subspace = 60;
  int max_iterations = 200;
  /// Correction components below this fraction of the largest one are dropped,
  /// so columns the solution does not need are never requested.
  double support_tol = 1e-7;
};

struct DavidsonResult {
  EomSolution solution;
  CostLedger ledger;
  std::vector<double> residual_norms;
  int iterations = 0;
};

/// Lowest k eigenpairs of a symmetric matrix available through an element
/// oracle. Elements are requested lazily and memoized; the ledger counts
/// distinct unordered elements including the supplied diagonal.
DavidsonResult davidson_solve(const std::function<double(int, int)>& element, const Eigen::VectorXd& diag,
                              const DavidsonOptions& options, double shift = 0.0);

/// Sector label of every basis entry under Z2 orbital gradings (bit g = parity
/// of the generator's orbitals under mask g); the reference entry is 0.
std::vector<std::uint32_t> basis_symmetry_labels(const EomBasis& basis, const std::vector<std::uint64_t>& gradings);

/// True when every gate of U commutes with all gradings, so M is block
/// diagonal in the labels: excitations of label 0 and Jastrow gates qualify,
/// qubit-level and orbital-rotation gates do not.
bool preserves_symmetries(const AnsatzCircuit& circuit, const std::vector<std::uint64_t>& gradings);

/// Davidson run independently inside each label block; cross-block elements
/// are known zeros and never requested. Returns the lowest k roots overall
/// with eigenvectors embedded in the full basis; the ledger sums the blocks.
DavidsonResult davidson_solve_blocked(const std::function<double(int, int)>& element, const Eigen::VectorXd& diag,
                                      const std::vector<std::uint32_t>& labels, const DavidsonOptions& options,
                                      double shift = 0.0);

enum class ScalingMode { brute, davidson, davidson_brg };
ScalingMode parse_scaling_mode(const std::string& name);
std::string to_string(ScalingMode m);

struct ScalingRow {
  std::string system;
  int n_orbitals = 0;
  std::size_t n_basis = 0;
  CostLedger ledger;
};

struct ScalingReport {
  ScalingMode mode = ScalingMode::brute;
  std::vector<ScalingRow> rows;
  double slope_elements = 0.0;  // d log(cost) / d log(n_orbitals)
  double slope_circuits = 0.0;
  double slope_shots = 0.0;
};

/// Ledger of a measured element set: each diagonal element costs u circuits,
/// each off-diagonal element 2u, every circuit `shots_per_setting` shots.
CostLedger element_cost(std::uint64_t n_diagonal, std::uint64_t n_off_diagonal, std::uint64_t groups_per_state,
                        std::uint64_t shots_per_setting);

ScalingReport scaling_report(ScalingMode mode, std::vector<ScalingRow> rows);
/// mode,system,n_orbitals,n_basis,elements,circuits,shots then slope comments
void write_scaling_csv(std::ostream& out, const ScalingReport& report);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qsceom
