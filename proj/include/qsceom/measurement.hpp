#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsceom/integrals.hpp"
#include "qsceom/pauli.hpp"
#include "qsceom/sampling.hpp"
#include "qsceom/statevector.hpp"

namespace qsceom {

/// Qubit-wise compatible terms sharing one single-qubit measurement basis.
struct MeasurementGroup {
  std::string basis;  // per qubit 'I', 'X', 'Y' or 'Z', index = qubit
  std::vector<PauliString> members;
  std::vector<double> coefficients;

  /// Value of sum_l c_l P_l on a measured outcome in the rotated basis.
  double outcome_value(std::uint64_t bits) const;
  /// Estimate of sum_l c_l <P_l> from (possibly quasi) counts.
  double estimate(const CountsHistogram& counts) const;
  /// Per-member <P_l> estimates.
  std::vector<double> member_expectations(const CountsHistogram& counts) const;
  /// Sample variance of the per-shot outcome value under `counts`.
  double outcome_variance(const CountsHistogram& counts) const;
  bool z_diagonal() const;
};

struct GroupedObservable {
  int n_qubits = 0;
  double offset = 0.0;  // identity coefficient
  std::vector<MeasurementGroup> groups;
};

/// Greedy first-fit over the canonical term order of a Hermitian sum.
GroupedObservable group_pauli_terms(const PauliSum& observable);

/// group_id,basis_pattern,member_count (basis printed qubit 0 rightmost)
void write_group_report(std::ostream& out, const GroupedObservable& grouped);

/// Quantity compared with the truncation tolerance.
enum class BrgCutoff {
  factor_norm,  // sqrt|w_r|: Frobenius norm of the eigenvalue-absorbed factor sqrt|w_r| L^(r)
  weight,       // |w_r|
};
BrgCutoff parse_brg_cutoff(const std::string& name);
std::string to_string(BrgCutoff c);

struct BrgRank {
  double weight = 0.0;       // signed eigenvalue w_r of the composite matrix
  Eigen::MatrixXd l;         // unit-Frobenius-norm symmetric L^(r)
  Eigen::MatrixXd rotation;  // U_r, columns are eigenvectors of L^(r)
  Eigen::VectorXd lambda;    // eigenvalues of L^(r)
};

struct BrgFactorization {
  int n_spatial = 0;
  double core_energy = 0.0;
  double tolerance = 0.0;
  BrgCutoff cutoff = BrgCutoff::factor_norm;
  Eigen::MatrixXd one_body;      // h~ = h - 1/2 sum_k g_ikkj
  Eigen::MatrixXd one_body_rotation;  // U_0
  Eigen::VectorXd one_body_eigenvalues;  // d_i
  std::vector<BrgRank> ranks;

  /// sum_r w_r L_ij L_kl in chemist order (dense n^4).
  std::vector<double> reconstruct_eri() const;
};

/// Eigendecomposes the composite (ij),(kl) matrix of g and keeps ranks whose
/// cutoff quantity exceeds the tolerance. At tolerance 0 only numerically null
/// directions (below n^2 * eps * max|eigenvalue|) are dropped.
BrgFactorization brg_factorize(const MolecularIntegrals& integrals, double tolerance,
                               BrgCutoff cutoff = BrgCutoff::factor_norm);

/// 1 + R: the one-body group plus one group per retained rank.
int brg_group_count(const BrgFactorization& f);

/// Diagonal observable of each group evaluated on every basis index of the
/// rotated frame (group 0 = one-body, then ranks): index with [group][bits].
std::vector<std::vector<double>> brg_group_diagonals(const BrgFactorization& f);

/// Orbital rotation taking the state into the measurement frame of a group.
Eigen::MatrixXd brg_group_frame(const BrgFactorization& f, int group);

struct BrgEstimate {
  double energy = 0.0;
  std::vector<double> group_values;  // core energy excluded
};

/// shots_per_group = 0 uses exact probabilities (infinite-shot limit).
BrgEstimate brg_estimate_energy(const Statevector& state, const BrgFactorization& f, std::uint64_t shots_per_group,
                                const NoiseModel& noise, std::uint64_t seed);

/// system,tolerance,group_count
struct BrgSweepRow {
  std::string system;
  double tolerance = 0.0;
  int group_count = 0;
};
void write_brg_sweep(std::ostream& out, const std::vector<BrgSweepRow>& rows);

/// One measured circuit: basis-state pair, phase and Pauli group.
/// phase 0 = diagonal (I == J), 1 = (|I>+|J>)/sqrt2, 2 = (|I>+i|J>)/sqrt2.
struct MeasurementSetting {
  int i = 0;
  int j = 0;
  int phase = 0;
  int group = 0;
  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;
};

struct ShotPlan {
  std::vector<MeasurementSetting> settings;
  std::vector<std::uint64_t> shots;  // parallel to settings
  std::uint64_t budget = 0;
  std::uint64_t floor = 0;

  std::uint64_t total() const;
  void validate() const;
};

/// Equal split; the remainder goes one shot each to the first settings.
ShotPlan allocate_shots_uniform(const std::vector<MeasurementSetting>& settings, std::uint64_t budget,
                                std::uint64_t floor);

/// v_s = sum_l c_l^2 (1 - <P_l>_s^2).
double variance_proxy(std::span<const double> coefficients, std::span<const double> expectations);

/// Allocates budget - pilot_cost shots with n_s - floor proportional to
/// sqrt(v_s), largest-remainder rounding. All v_s = 0 falls back to uniform.
ShotPlan allocate_shots_adaptive(const std::vector<MeasurementSetting>& settings,
                                 const std::vector<std::vector<double>>& pilot_expectations,
                                 const std::vector<std::vector<double>>& coefficients, std::uint64_t budget,
                                 std::uint64_t pilot_cost, std::uint64_t floor);

/// Same from precomputed variance proxies.
ShotPlan allocate_shots_from_variances(const std::vector<MeasurementSetting>& settings,
                                       std::span<const double> variances, std::uint64_t shots,
                                       std::uint64_t floor);

/// B = u * n * n_m.
std::uint64_t budget_accounting(std::uint64_t groups_per_element, std::uint64_t shots_per_unit,
                                std::uint64_t n_elements);

/// setting_id,i,j,phase,group,shots
void write_shot_plan(std::ostream& out, const ShotPlan& plan);

}  // namespace qsceom
