#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qsceom/ansatz.hpp"
#include "qsceom/config.hpp"
#include "qsceom/eom.hpp"
#include "qsceom/integrals.hpp"
#include "qsceom/report.hpp"

namespace qsceom {

/// "name" or "name:<N>e<M>o" (active space override).
struct FixtureSpec {
  std::string name;
  int active_electrons = 0;  // 0 = use the config's active space
  int active_orbitals = 0;
  static FixtureSpec parse(const std::string& text);
};

/// Numeric geometry parameter embedded in a fixture name (second field of
/// "<system>_<distance>_<basis>"); NaN when absent.
double fixture_distance(const std::string& name);

/// Resolves a fixture name to "<fixture.dir>/<name>.fcidump" unless it already
/// names an existing file. Throws std::invalid_argument when missing.
std::filesystem::path fixture_path(const ExperimentConfig& config, const std::string& name);

/// Active-space integrals, qubit Hamiltonian, sector and q-sc-EOM basis.
struct Problem {
  std::string name;
  MolecularIntegrals integrals;
  PauliSum hamiltonian;
  int n_alpha = 0;
  int n_beta = 0;
  EomBasis basis;
  int n_qubits() const { return 2 * integrals.n_spatial; }
  Statevector hartree_fock() const { return hartree_fock_state(n_qubits(), n_alpha, n_beta); }
};

Problem load_problem(const ExperimentConfig& config, const FixtureSpec& fixture);

OptimizeOptions optimizer_options(const ExperimentConfig& config, std::uint64_t seed);

struct GroundState {
  AnsatzKind kind = AnsatzKind::adapt;
  AnsatzCircuit circuit;
  Statevector reference;
  double energy = 0.0;
  int evaluations = 0;
  OptimizeStatus status = OptimizeStatus::converged;
  bool warning = false;
};

/// Builds and optimizes the requested ansatz with the config's knobs.
GroundState solve_ground_state(const ExperimentConfig& config, const Problem& problem, AnsatzKind kind,
                               std::uint64_t seed);

/// Noise model of the config (readout on every qubit, gate depolarizing).
NoiseModel config_noise(const ExperimentConfig& config, int n_qubits);
MitigationConfig config_mitigation(const ExperimentConfig& config, const Problem& problem, const NoiseModel& noise);
BudgetedBuildOptions config_budget(const ExperimentConfig& config);

/// Estimate of <H> from `shots_per_group` samples in every QWC group.
double sampled_energy(const Statevector& state, const GroupedObservable& observable, std::uint64_t shots_per_group,
                      const NoiseModel& noise, std::uint64_t seed);

/// Runs fn(0..n-1) on up to `threads` workers; results must be written to
/// per-index slots so output does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Root-wise outcome stored in the run record.
struct RootRecord {
  std::string system;
  int root = 0;
  double energy = 0.0;
  double reference = 0.0;
};

struct RunRecord {
  std::string command;
  std::string config_hash;
  std::vector<RootRecord> roots;
  CostLedger ledger;
  double wall_time_seconds = 0.0;
  void write_json(const std::filesystem::path& path) const;
};

struct CommandResult {
  std::map<std::string, Table> tables;  // file stem -> table
  std::vector<std::filesystem::path> files;
  RunRecord record;
};

/// Each command writes CSV tables, SVG plots rendered from those CSVs, the
/// resolved config and a run record into config.output_dir().
CommandResult cmd_pes(const ExperimentConfig& config);
CommandResult cmd_ansatz_bench(const ExperimentConfig& config);
CommandResult cmd_brg_sweep(const ExperimentConfig& config);
CommandResult cmd_noise_bench(const ExperimentConfig& config);
CommandResult cmd_fci(const ExperimentConfig& config);
CommandResult cmd_dump_hamiltonian(const ExperimentConfig& config);

/// Plot renderers; pure functions of the CSV tables.
PlotSpec plot_pes(const Table& pes);
PlotSpec plot_ansatz_errors(const Table& errors);
PlotSpec plot_brg_counts(const Table& counts);
PlotSpec plot_brg_tolerance(const Table& sweep);
PlotSpec plot_brg_chains(const Table& chains);
PlotSpec plot_noise_summary(const Table& summary, const std::string& fixture);
PlotSpec plot_depol_sweep(const Table& sweep, const std::string& fixture);

/// Least-squares line y = a + b x with its coefficient of determination.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qsceom
