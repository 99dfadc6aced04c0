#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsceom/pauli.hpp"

namespace qsceom {

struct MolecularIntegrals;

/// Spin-orbital index of spatial orbital p with spin sigma (0 = alpha, 1 = beta).
constexpr int spin_orbital(int spatial, int spin) { return 2 * spatial + spin; }
constexpr int spatial_of(int spin_orb) { return spin_orb / 2; }
constexpr int spin_of(int spin_orb) { return spin_orb % 2; }

struct LadderOp {
  int mode = 0;
  bool creation = false;
  friend bool operator==(const LadderOp&, const LadderOp&) = default;
};

/// coefficient * op[0] op[1] ... op[k-1] (leftmost acts last).
struct FermionTerm {
  cplx coefficient{1.0, 0.0};
  std::vector<LadderOp> ops;
};

/// Result of a ladder product acting on an occupation bitstring.
struct BasisImage {
  std::uint64_t bits = 0;
  double sign = 1.0;
};

/// Applies a ladder-operator product to an occupation-number basis state.
/// Bit q of `bits` is the occupation of mode q; the Jordan-Wigner sign counts
/// occupied modes with a lower index. Returns nullopt when the image vanishes.
std::optional<BasisImage> apply_ladder(const std::vector<LadderOp>& ops, std::uint64_t bits);

class FermionOperator {
 public:
  FermionOperator() = default;
  explicit FermionOperator(int n_modes) : n_modes_(n_modes) {}

  int n_modes() const { return n_modes_; }
  const std::vector<FermionTerm>& terms() const { return terms_; }
  void add(cplx coefficient, std::vector<LadderOp> ops);
  FermionOperator adjoint() const;

 private:
  int n_modes_ = 0;
  std::vector<FermionTerm> terms_;
};

/// Jordan-Wigner image: a_p = Z_0...Z_{p-1} (X_p + iY_p)/2.
PauliSum jordan_wigner(const FermionTerm& term, int n_qubits);
PauliSum jordan_wigner(const FermionOperator& op);

/// Second-quantized molecular Hamiltonian (spin-orbital form, including the
/// core energy as a constant term).
FermionOperator molecular_fermion_operator(const MolecularIntegrals& integrals);

/// Qubit Hamiltonian on 2*n_spatial qubits.
PauliSum build_hamiltonian(const MolecularIntegrals& integrals);

/// Total number operator and 2*Sz on `n_qubits` spin-orbital qubits.
PauliSum number_operator(int n_qubits);
PauliSum sz_operator(int n_qubits);

/// Excitation a_a^dag a_i (single) or a_a^dag a_b^dag a_i a_j (double), where
/// occupied = {i, j} and virtual = {a, b}, spin-orbital indices.
struct FermionGenerator {
  enum class Kind { single, double_ };
  Kind kind = Kind::single;
  std::vector<int> occupied;
  std::vector<int> virtual_;

  static FermionGenerator make_single(int i, int a);
  static FermionGenerator make_double(int i, int j, int a, int b);

  /// Ladder product for G (annihilators of occupied, creators of virtual).
  std::vector<LadderOp> ladder() const;
  bool conserves_sz() const;
  int max_mode() const;
  std::string to_string() const;
  static FermionGenerator parse(const std::string& text);

  friend bool operator==(const FermionGenerator&, const FermionGenerator&) = default;
};

/// All Sz-conserving singles and doubles out of the first n_occ_spin spin
/// orbitals into the next n_virt_spin ones. Singles first; each block in
/// lexicographic order of (occupied, virtual).
std::vector<FermionGenerator> build_excitation_pool(int n_occ_spin, int n_virt_spin);

/// Jordan-Wigner image of G - G^dag.
PauliSum anti_hermitian_image(const FermionGenerator& g, int n_qubits);

}  // namespace qsceom
