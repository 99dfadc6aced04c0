#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsceom/integrals.hpp"

namespace qsceom::testing {

inline std::filesystem::path data_dir() { return QSCEOM_TEST_DATA; }

inline MolecularIntegrals fixture(const std::string& name) { return read_fcidump(data_dir() / (name + ".fcidump")); }

/// pyscf energies keyed by "<fixture>" or "<fixture>@cas<N>e<M>o".
inline std::map<std::string, std::vector<double>> reference_energies() {
  std::map<std::string, std::vector<double>> out;
  std::ifstream in(data_dir() / "pyscf_fci_reference.csv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("fixture,", 0) == 0) continue;
    std::stringstream s(line);
    std::string name, root, energy;
    std::getline(s, name, ',');
    std::getline(s, root, ',');
    std::getline(s, energy, ',');
    out[name].push_back(std::stod(energy));
  }
  return out;
}

/// Annihilation operator on mode p in the occupation-number basis (bit q of
/// the index = occupation of mode q), sign from occupied modes below p.
inline Eigen::MatrixXd dense_annihilator(int p, int n_modes) {
  const std::uint64_t dim = std::uint64_t{1} << n_modes;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (!((b >> p) & 1U)) continue;
    const int below = std::popcount(b & ((std::uint64_t{1} << p) - 1));
    a(static_cast<Eigen::Index>(b ^ (std::uint64_t{1} << p)), static_cast<Eigen::Index>(b)) = below % 2 ? -1.0 : 1.0;
  }
  return a;
}

/// Second-quantized molecular Hamiltonian as a dense matrix, mode 2p+s for
/// spatial orbital p and spin s. Independent of the Pauli-string code path.
inline Eigen::MatrixXd dense_hamiltonian(const MolecularIntegrals& ints) {
  const int n = ints.n_spatial, modes = 2 * n;
  std::vector<Eigen::MatrixXd> a;
  for (int m = 0; m < modes; ++m) a.push_back(dense_annihilator(m, modes));
  const Eigen::Index dim = a[0].rows();
  Eigen::MatrixXd h = ints.core_energy * Eigen::MatrixXd::Identity(dim, dim);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int s = 0; s < 2; ++s)
        if (ints.h(p, q) != 0.0) h += ints.h(p, q) * a[2 * p + s].transpose() * a[2 * q + s];
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int t = 0; t < n; ++t) {
          const double g = ints.eri(p, q, r, t);
          if (g == 0.0) continue;
          for (int s = 0; s < 2; ++s)
            for (int u = 0; u < 2; ++u)
              h += 0.5 * g * a[2 * p + s].transpose() * a[2 * r + u].transpose() * a[2 * t + u] * a[2 * q + s];
        }
  return h;
}

/// Lowest eigenvalues of a dense Hamiltonian restricted to n_alpha / n_beta.
inline std::vector<double> sector_eigenvalues(const Eigen::MatrixXd& h, int n_modes, int n_alpha, int n_beta) {
  std::vector<Eigen::Index> idx;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << n_modes); ++b) {
    int na = 0, nb = 0;
    for (int m = 0; m < n_modes; ++m)
      if ((b >> m) & 1U) (m % 2 ? nb : na)++;
    if (na == n_alpha && nb == n_beta) idx.push_back(static_cast<Eigen::Index>(b));
  }
  Eigen::MatrixXd sub(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = h(idx[i], idx[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace qsceom::testing
