#include "qsceom/fci.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "qsceom/fermion.hpp"

namespace qsceom {

std::vector<std::uint64_t> sector_basis(int n_spatial, int n_alpha, int n_beta) {
  std::vector<std::uint64_t> out;
  std::uint64_t alpha_mask = 0;
  for (int p = 0; p < n_spatial; ++p) alpha_mask |= std::uint64_t{1} << spin_orbital(p, 0);
  const std::uint64_t beta_mask = alpha_mask << 1;
  const std::uint64_t dim = std::uint64_t{1} << (2 * n_spatial);
  for (std::uint64_t b = 0; b < dim; ++b)
    if (std::popcount(b & alpha_mask) == n_alpha && std::popcount(b & beta_mask) == n_beta) out.push_back(b);
  return out;
}

Eigen::MatrixXd sector_hamiltonian(const MolecularIntegrals& ints, const std::vector<std::uint64_t>& basis) {
  const FermionOperator op = molecular_fermion_operator(ints);
  const Eigen::Index dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (const FermionTerm& t : op.terms()) {
      const auto img = apply_ladder(t.ops, basis[static_cast<std::size_t>(col)]);
      if (!img) continue;
      const auto it = std::lower_bound(basis.begin(), basis.end(), img->bits);
      if (it == basis.end() || *it != img->bits) throw std::logic_error("Hamiltonian leaves the sector");
      m(it - basis.begin(), col) += img->sign * t.coefficient.real();
    }
  }
  return 0.5 * (m + m.transpose());
}

SpectrumReference fci_solve(const MolecularIntegrals& ints, int n_roots) {
  ints.validate();
  if (2 * ints.n_spatial > 24) throw std::invalid_argument("FCI oracle limited to 24 qubits");
  const auto basis = sector_basis(ints.n_spatial, ints.n_alpha(), ints.n_beta());
  if (n_roots < 1 || static_cast<std::size_t>(n_roots) > basis.size())
    throw std::invalid_argument("n_roots " + std::to_string(n_roots) + " exceeds sector dimension " +
                                std::to_string(basis.size()));
  const Eigen::MatrixXd h = sector_hamiltonian(ints, basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  SpectrumReference out;
  out.n_qubits = 2 * ints.n_spatial;
  out.vectors = Eigen::MatrixXcd::Zero(Eigen::Index{1} << out.n_qubits, n_roots);
  for (int r = 0; r < n_roots; ++r) {
    out.energies.push_back(es.eigenvalues()[r]);
    Eigen::VectorXd v = es.eigenvectors().col(r);
    // deterministic sign: largest-magnitude component positive
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    for (std::size_t k = 0; k < basis.size(); ++k)
      out.vectors(static_cast<Eigen::Index>(basis[k]), r) = v[static_cast<Eigen::Index>(k)];
  }
  return out;
}

void write_spectrum_csv(std::ostream& out, const SpectrumReference& spectrum) {
  out << "root_index,energy_hartree\n";
  char buf[64];
  for (std::size_t i = 0; i < spectrum.energies.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.12f\n", i, spectrum.energies[i]);
    out << buf;
  }
}

}  // namespace qsceom
