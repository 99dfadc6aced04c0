#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qsceom {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One- and two-electron integrals over real spatial orbitals.
///
/// `g` is stored densely in chemist order (ij|kl) with index ((i*n+j)*n+k)*n+l.
struct MolecularIntegrals {
  int n_spatial = 0;
  int n_electrons = 0;
  int ms2 = 0;
  double core_energy = 0.0;
  Eigen::MatrixXd h;
  std::vector<double> g;

  static MolecularIntegrals zeros(int n_spatial, int n_electrons, int ms2 = 0);

  std::size_t eri_index(int i, int j, int k, int l) const {
    const std::size_t n = static_cast<std::size_t>(n_spatial);
    return ((static_cast<std::size_t>(i) * n + j) * n + k) * n + l;
  }
  double eri(int i, int j, int k, int l) const { return g[eri_index(i, j, k, l)]; }
  /// Writes all eight symmetry-equivalent slots.
  void set_eri(int i, int j, int k, int l, double v);

  int n_alpha() const { return (n_electrons + ms2) / 2; }
  int n_beta() const { return (n_electrons - ms2) / 2; }
  int n_qubits() const { return 2 * n_spatial; }

  /// Throws std::invalid_argument when a structural invariant fails.
  void validate(double tol = 1e-10) const;
};

MolecularIntegrals parse_fcidump(std::istream& in);
MolecularIntegrals read_fcidump(const std::filesystem::path& path);
/// Writes unique entries (i>=j, k>=l, ij>=kl) with round-trip precision.
void write_fcidump(std::ostream& out, const MolecularIntegrals& ints);

struct ActiveSpace {
  std::vector<int> active_orbitals;
  int n_active_electrons = 0;
};

/// Active window of `n_orbitals` orbitals holding `n_electrons`, with every
/// orbital below it frozen doubly occupied.
ActiveSpace centered_active_space(const MolecularIntegrals& ints, int n_electrons, int n_orbitals);

/// Frozen-core effective integrals: non-active orbitals below the lowest
/// active index are doubly occupied, the rest are dropped.
MolecularIntegrals restrict_active(const MolecularIntegrals& ints, const ActiveSpace& space);

/// Z2 orbital gradings respected by the integrals: bit p of each mask is the
/// parity of spatial orbital p, and every |h_pq| or |(pq|rs)| above `tol` has
/// even total parity. Returns a GF(2) basis of all such gradings, excluding the
/// all-ones mask (particle-number parity), which every Hamiltonian respects.
std::vector<std::uint64_t> orbital_z2_symmetries(const MolecularIntegrals& ints, double tol = 1e-10);

}  // namespace qsceom
