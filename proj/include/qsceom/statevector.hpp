#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qsceom/fermion.hpp"
#include "qsceom/pauli.hpp"

namespace qsceom {

/// Dense 2^n amplitude vector. Qubit 0 is the least-significant bit of the
/// basis-state index.
class Statevector {
 public:
  Statevector() = default;
  explicit Statevector(int n_qubits);
  Statevector(int n_qubits, Eigen::VectorXcd amplitudes);

  static Statevector basis_state(int n_qubits, std::uint64_t index);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
  cplx& operator[](std::size_t i) { return amps_[static_cast<Eigen::Index>(i)]; }

  std::span<const cplx> span() const { return {amps_.data(), dim()}; }
  std::span<cplx> span() { return {amps_.data(), dim()}; }

  double norm() const { return amps_.norm(); }
  void normalize();
  cplx inner(const Statevector& other) const { return amps_.dot(other.amps_); }
  /// |<this|other>|^2 for normalized inputs.
  double fidelity(const Statevector& other) const { return std::norm(inner(other)); }

 private:
  int n_qubits_ = 0;
  Eigen::VectorXcd amps_;
};

/// Lowest `n_electrons` spin orbitals occupied.
Statevector hartree_fock_state(int n_qubits, int n_electrons);
/// Closed- or open-shell reference with n_alpha / n_beta lowest orbitals filled.
Statevector hartree_fock_state(int n_qubits, int n_alpha, int n_beta);
std::uint64_t hartree_fock_bits(int n_alpha, int n_beta);

/// exp(angle * generator) for an anti-Hermitian Pauli sum. Mutually commuting
/// terms use the closed-form rotation per term; otherwise the exponential is
/// evaluated exactly on the Krylov space of the state.
void apply_exp_pauli(Statevector& state, const PauliSum& generator, double angle);

/// exp(theta * (G - G^dag)) acting directly on occupation bitstrings. Same
/// operator as apply_exp_pauli(anti_hermitian_image(g), theta).
void apply_excitation(Statevector& state, const FermionGenerator& g, double theta);
/// state <- (G - G^dag) state
Statevector apply_generator(const Statevector& state, const FermionGenerator& g);
/// Applies a ladder product (no exponential); amplitudes it annihilates vanish.
Statevector apply_ladder(const Statevector& state, const std::vector<LadderOp>& ops);

double expectation(const Statevector& state, const PauliSum& observable);
double expectation(const Statevector& state, const CompiledPauliSum& observable);

/// Single-qubit gates and CNOT.
void apply_pauli(Statevector& state, const PauliString& p);
void apply_ry(Statevector& state, int qubit, double angle);
void apply_hadamard(Statevector& state, int qubit);
void apply_sdg(Statevector& state, int qubit);
void apply_cnot(Statevector& state, int control, int target);

/// Rotates each qubit so that its axis ('X', 'Y', 'Z' or 'I') is measured in
/// the computational basis: H for X, H*Sdg for Y.
void apply_basis_change(Statevector& state, std::span<const char> axes);

/// Real orthogonal one-body rotation applied identically to both spin sectors:
/// the creation operator of orbital p maps to sum_q R(q,p) a_q^dag. Realized
/// as a sequence of two-mode fermionic Givens rotations on neighbouring
/// orbitals plus sign flips for a reflection component.
void apply_orbital_rotation(Statevector& state, const Eigen::MatrixXd& rotation);

/// Same as above for one spin sector (0 = alpha, 1 = beta).
void apply_orbital_rotation_spin(Statevector& state, const Eigen::MatrixXd& rotation, int spin);

struct GivensRotation {
  int p = 0;  // orbital p -> cos(theta) p + sin(theta) q
  int q = 0;
  double theta = 0.0;
};

struct GivensDecomposition {
  std::vector<int> reflected;               // orbitals carrying a -1
  std::vector<GivensRotation> rotations;    // applied in order after reflections
};

GivensDecomposition givens_decompose(const Eigen::MatrixXd& rotation, double tol = 1e-10);

/// exp(i * sum_{(p,q)} phi_pq n_p n_q) as computational-basis phases.
void apply_number_phases(Statevector& state, std::span<const std::pair<int, int>> pairs,
                         std::span<const double> angles);

/// Probabilities |a_b|^2 of every computational basis state.
std::vector<double> probabilities(const Statevector& state);

}  // namespace qsceom
