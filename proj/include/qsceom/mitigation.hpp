#pragma once

#include <stdexcept>
#include <vector>

#include "qsceom/sampling.hpp"

namespace qsceom {

class SingularModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when postselection leaves no weight in the target sector.
class EmptySectorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric per-qubit assignment model, A_q = [[1-e, e], [e, 1-e]].
struct AssignmentModel {
  std::vector<double> eps;

  static AssignmentModel from_noise(const NoiseModel& noise, int n_qubits);
  bool is_identity() const;
};

struct SymmetrySector {
  int n_alpha = 0;
  int n_beta = 0;
};

/// Inverts the assignment model on the span of observed bitstrings and their
/// single-flip neighbours. Returns normalized quasi-probabilities.
CountsHistogram m3_correct(const CountsHistogram& counts, const AssignmentModel& model);

struct PostselectResult {
  CountsHistogram counts;
  double retained_fraction = 0.0;
};

/// Keeps bitstrings with n_alpha set even qubits and n_beta set odd qubits.
PostselectResult symmetry_postselect(const CountsHistogram& counts, const SymmetrySector& sector);

struct MitigationConfig {
  bool m3 = false;
  bool postselect = false;
  SymmetrySector sector;
  AssignmentModel model;
};

/// M3 first, then postselection. Postselection only touches settings whose
/// measured terms are all I/Z (`z_diagonal_setting`); other settings pass
/// through it unchanged.
CountsHistogram mitigation_stack(const CountsHistogram& counts, const MitigationConfig& config,
                                 bool z_diagonal_setting = true, double* retained_fraction = nullptr);

}  // namespace qsceom
