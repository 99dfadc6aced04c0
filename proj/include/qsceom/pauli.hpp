#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qsceom {

using cplx = std::complex<double>;

/// Pauli string over at most 64 qubits in symplectic form.
///
/// Qubit q carries X when bit q of `x` is set, Z when bit q of `z` is set and
/// Y when both are set. The operator is P = i^{|x&z|} X^x Z^z, so the stored
/// masks are the canonical form: only non-identity axes, addressed by
/// ascending qubit index.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  static PauliString identity() { return {}; }
  static PauliString single(int qubit, char axis);
  /// Parses "X0Z1Y3" (or "I" / "" for identity).
  static PauliString parse(std::string_view text);

  bool is_identity() const { return (x | z) == 0; }
  bool is_diagonal() const { return x == 0; }
  std::uint64_t support() const { return x | z; }
  int weight() const;
  int y_count() const;
  char axis(int qubit) const;
  std::string to_string() const;

  bool commutes_with(const PauliString& other) const;
  /// Qubit-wise commutation: on every shared qubit the axes agree.
  bool qubitwise_commutes_with(const PauliString& other) const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend auto operator<=>(const PauliString& a, const PauliString& b) {
    if (a.x != b.x) return a.x <=> b.x;
    return a.z <=> b.z;
  }
};

/// Product a*b = phase * c, returned as (phase, c).
std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b);

/// Weighted sum of Pauli strings on a fixed qubit register.
///
/// Terms are kept in ascending (x, z) order, which is the canonical order used
/// everywhere a deterministic term sequence matters (grouping, serialization).
class PauliSum {
 public:
  static constexpr double kPruneTolerance = 1e-12;

  PauliSum() = default;
  explicit PauliSum(int n_qubits) : n_qubits_(n_qubits) {}

  static PauliSum constant(int n_qubits, cplx value);

  int n_qubits() const { return n_qubits_; }
  const std::map<PauliString, cplx>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  void add(const PauliString& p, cplx c);
  /// Drops terms with |c| below tol.
  void simplify(double tol = kPruneTolerance);

  cplx coefficient(const PauliString& p) const;
  cplx identity_coefficient() const { return coefficient(PauliString::identity()); }

  PauliSum adjoint() const;
  bool is_hermitian(double tol = 1e-10) const;
  bool is_anti_hermitian(double tol = 1e-10) const;
  bool is_diagonal() const;

  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator-=(const PauliSum& other);
  PauliSum& operator*=(cplx s);
  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, cplx s) { return a *= s; }
  friend PauliSum operator*(cplx s, PauliSum a) { return a *= s; }
  friend PauliSum operator*(const PauliSum& a, const PauliSum& b);

  /// out = this * in on a 2^n amplitude vector.
  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& in) const;

  /// Dense 2^n x 2^n matrix; intended for small-register checks.
  Eigen::MatrixXcd to_dense() const;

  /// One term per line: "<real> <axes>" for Hermitian sums, otherwise
  /// "<real> <imag> <axes>". Identity is written as "I".
  std::string to_text() const;
  static PauliSum from_text(std::string_view text, int n_qubits);

 private:
  int n_qubits_ = 0;
  std::map<PauliString, cplx> terms_;
};

/// Application kernel with terms bucketed by X mask; every bucket moves
/// amplitude b to b^x with a sign depending only on b&z.
class CompiledPauliSum {
 public:
  CompiledPauliSum() = default;
  explicit CompiledPauliSum(const PauliSum& sum);

  int n_qubits() const { return n_qubits_; }
  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  /// <psi|O|psi>
  cplx expectation(std::span<const cplx> psi) const;

 private:
  struct Bucket {
    std::uint64_t x = 0;
    std::vector<std::uint64_t> z;
    std::vector<cplx> c;  // includes the i^{|x&z|} factor
  };
  int n_qubits_ = 0;
  std::vector<Bucket> buckets_;
};

}  // namespace qsceom
