#include "qsceom/fermion.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

#include "qsceom/integrals.hpp"

namespace qsceom {

std::optional<BasisImage> apply_ladder(const std::vector<LadderOp>& ops, std::uint64_t bits) {
  double sign = 1.0;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const std::uint64_t bit = std::uint64_t{1} << it->mode;
    const bool occupied = bits & bit;
    if (it->creation == occupied) return std::nullopt;
    if (std::popcount(bits & (bit - 1)) & 1) sign = -sign;
    bits ^= bit;
  }
  return BasisImage{bits, sign};
}

void FermionOperator::add(cplx coefficient, std::vector<LadderOp> ops) {
  for (const LadderOp& op : ops) {
    if (op.mode < 0 || op.mode >= n_modes_) {
      throw std::out_of_range("ladder operator mode " + std::to_string(op.mode) +
                              " outside register of " + std::to_string(n_modes_));
    }
  }
  terms_.push_back({coefficient, std::move(ops)});
}

FermionOperator FermionOperator::adjoint() const {
  FermionOperator out(n_modes_);
  for (const FermionTerm& t : terms_) {
    std::vector<LadderOp> ops(t.ops.rbegin(), t.ops.rend());
    for (LadderOp& op : ops) op.creation = !op.creation;
    out.terms_.push_back({std::conj(t.coefficient), std::move(ops)});
  }
  return out;
}

PauliSum jordan_wigner(const FermionTerm& term, int n_qubits) {
  PauliSum acc = PauliSum::constant(n_qubits, term.coefficient);
  for (const LadderOp& op : term.ops) {
    if (op.mode < 0 || op.mode >= n_qubits) {
      throw std::out_of_range("ladder operator mode " + std::to_string(op.mode) +
                              " outside register of " + std::to_string(n_qubits));
    }
    const std::uint64_t zstring = (std::uint64_t{1} << op.mode) - 1;
    const std::uint64_t bit = std::uint64_t{1} << op.mode;
    PauliSum ladder(n_qubits);
    // a^dag = Z..(X - iY)/2, a = Z..(X + iY)/2
    ladder.add(PauliString{bit, zstring}, 0.5);
    ladder.add(PauliString{bit, zstring | bit}, op.creation ? cplx(0.0, -0.5) : cplx(0.0, 0.5));
    acc = acc * ladder;
  }
  acc.simplify();
  return acc;
}

PauliSum jordan_wigner(const FermionOperator& op) {
  PauliSum out(op.n_modes());
  for (const FermionTerm& t : op.terms()) {
    const PauliSum img = jordan_wigner(t, op.n_modes());
    for (const auto& [p, c] : img.terms()) out.add(p, c);
  }
  out.simplify();
  return out;
}

FermionOperator molecular_fermion_operator(const MolecularIntegrals& ints) {
  const int n = ints.n_spatial;
  FermionOperator op(2 * n);
  op.add(ints.core_energy, {});
  for (int s = 0; s < 2; ++s)
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const double v = ints.h(p, q);
        if (v == 0.0) continue;
        op.add(v, {{spin_orbital(p, s), true}, {spin_orbital(q, s), false}});
      }
  // 1/2 sum g_pqrs a+_{p s} a+_{r t} a_{s t} a_{q s}
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t)
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
          for (int r = 0; r < n; ++r)
            for (int u = 0; u < n; ++u) {
              const double v = ints.eri(p, q, r, u);
              if (v == 0.0) continue;
              const int P = spin_orbital(p, s), Q = spin_orbital(q, s);
              const int R = spin_orbital(r, t), U = spin_orbital(u, t);
              if (P == R || Q == U) continue;
              op.add(0.5 * v, {{P, true}, {R, true}, {U, false}, {Q, false}});
            }
  return op;
}

PauliSum build_hamiltonian(const MolecularIntegrals& ints) {
  ints.validate();
  PauliSum h = jordan_wigner(molecular_fermion_operator(ints));
  // Hermitian by construction; drop round-off imaginary parts.
  PauliSum out(h.n_qubits());
  for (const auto& [p, c] : h.terms()) out.add(p, c.real());
  out.simplify();
  return out;
}

PauliSum number_operator(int n_qubits) {
  PauliSum n(n_qubits);
  n.add(PauliString::identity(), 0.5 * n_qubits);
  for (int q = 0; q < n_qubits; ++q) n.add(PauliString::single(q, 'Z'), -0.5);
  return n;
}

PauliSum sz_operator(int n_qubits) {
  PauliSum sz(n_qubits);
  for (int q = 0; q < n_qubits; ++q) sz.add(PauliString::single(q, 'Z'), spin_of(q) == 0 ? -0.5 : 0.5);
  sz.simplify();
  return sz;
}

FermionGenerator FermionGenerator::make_single(int i, int a) {
  return {Kind::single, {i}, {a}};
}

FermionGenerator FermionGenerator::make_double(int i, int j, int a, int b) {
  if (i == j || a == b) throw std::invalid_argument("double excitation needs distinct modes");
  return {Kind::double_, {i, j}, {a, b}};
}

std::vector<LadderOp> FermionGenerator::ladder() const {
  if (kind == Kind::single) return {{virtual_[0], true}, {occupied[0], false}};
  return {{virtual_[0], true}, {virtual_[1], true}, {occupied[0], false}, {occupied[1], false}};
}

bool FermionGenerator::conserves_sz() const {
  int d = 0;
  for (int o : occupied) d -= spin_of(o) == 0 ? 1 : -1;
  for (int v : virtual_) d += spin_of(v) == 0 ? 1 : -1;
  return d == 0;
}

int FermionGenerator::max_mode() const {
  int m = 0;
  for (int o : occupied) m = std::max(m, o);
  for (int v : virtual_) m = std::max(m, v);
  return m;
}

std::string FermionGenerator::to_string() const {
  std::ostringstream os;
  if (kind == Kind::single)
    os << "S " << occupied[0] << ' ' << virtual_[0];
  else
    os << "D " << occupied[0] << ' ' << occupied[1] << ' ' << virtual_[0] << ' ' << virtual_[1];
  return os.str();
}

FermionGenerator FermionGenerator::parse(const std::string& text) {
  std::istringstream is(text);
  std::string tag;
  is >> tag;
  if (tag == "S") {
    int i = 0, a = 0;
    if (!(is >> i >> a)) throw std::invalid_argument("malformed single excitation: " + text);
    return make_single(i, a);
  }
  if (tag == "D") {
    int i = 0, j = 0, a = 0, b = 0;
    if (!(is >> i >> j >> a >> b)) throw std::invalid_argument("malformed double excitation: " + text);
    return make_double(i, j, a, b);
  }
  throw std::invalid_argument("unknown generator tag in: " + text);
}

std::vector<FermionGenerator> build_excitation_pool(int n_occ_spin, int n_virt_spin) {
  std::vector<FermionGenerator> pool;
  const int n = n_occ_spin + n_virt_spin;
  for (int i = 0; i < n_occ_spin; ++i)
    for (int a = n_occ_spin; a < n; ++a)
      if (spin_of(i) == spin_of(a)) pool.push_back(FermionGenerator::make_single(i, a));
  for (int i = 0; i < n_occ_spin; ++i)
    for (int j = i + 1; j < n_occ_spin; ++j)
      for (int a = n_occ_spin; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          FermionGenerator g = FermionGenerator::make_double(i, j, a, b);
          if (g.conserves_sz()) pool.push_back(std::move(g));
        }
  return pool;
}

PauliSum anti_hermitian_image(const FermionGenerator& g, int n_qubits) {
  FermionOperator op(n_qubits);
  op.add(1.0, g.ladder());
  const FermionOperator adj = op.adjoint();
  PauliSum out = jordan_wigner(op) - jordan_wigner(adj);
  return out;
}

}  // namespace qsceom
