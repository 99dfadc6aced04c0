#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "qsceom/integrals.hpp"

namespace qsceom {

/// Lowest eigenpairs of the qubit Hamiltonian inside one (N, Sz) sector.
struct SpectrumReference {
  std::vector<double> energies;  // ascending, Hartree, including the core energy
  Eigen::MatrixXcd vectors;      // 2^n x k, columns in the full qubit basis
  int n_qubits = 0;
};

/// Occupation bitstrings with n_alpha electrons on even qubits and n_beta on
/// odd qubits, in ascending integer order.
std::vector<std::uint64_t> sector_basis(int n_spatial, int n_alpha, int n_beta);

/// Dense Hamiltonian over sector_basis(...) built directly from the
/// second-quantized operator (no qubit mapping involved).
Eigen::MatrixXd sector_hamiltonian(const MolecularIntegrals& ints, const std::vector<std::uint64_t>& basis);

SpectrumReference fci_solve(const MolecularIntegrals& ints, int n_roots);

/// root_index,energy_hartree
void write_spectrum_csv(std::ostream& out, const SpectrumReference& spectrum);

}  // namespace qsceom
