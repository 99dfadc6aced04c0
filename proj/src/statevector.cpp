#include "qsceom/statevector.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace qsceom {

Statevector::Statevector(int n_qubits)
    : n_qubits_(n_qubits), amps_(Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits)) {
  if (n_qubits < 0 || n_qubits > 30) throw std::invalid_argument("statevector qubit count out of range");
  amps_[0] = 1.0;
}

Statevector::Statevector(int n_qubits, Eigen::VectorXcd amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (amps_.size() != (Eigen::Index{1} << n_qubits))
    throw std::invalid_argument("amplitude vector length is not 2^n");
}

Statevector Statevector::basis_state(int n_qubits, std::uint64_t index) {
  Statevector s(n_qubits);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[static_cast<Eigen::Index>(index)] = 1.0;
  return s;
}

void Statevector::normalize() {
  const double n = norm();
  if (n == 0.0) throw std::runtime_error("cannot normalize a zero vector");
  amps_ /= n;
}

std::uint64_t hartree_fock_bits(int n_alpha, int n_beta) {
  std::uint64_t bits = 0;
  for (int p = 0; p < n_alpha; ++p) bits |= std::uint64_t{1} << spin_orbital(p, 0);
  for (int p = 0; p < n_beta; ++p) bits |= std::uint64_t{1} << spin_orbital(p, 1);
  return bits;
}

Statevector hartree_fock_state(int n_qubits, int n_electrons) {
  if (n_electrons < 0 || n_electrons > n_qubits)
    throw std::invalid_argument("more electrons than spin orbitals");
  const std::uint64_t bits = n_electrons == 0 ? 0 : (std::uint64_t{1} << n_electrons) - 1;
  return Statevector::basis_state(n_qubits, bits);
}

Statevector hartree_fock_state(int n_qubits, int n_alpha, int n_beta) {
  if (2 * std::max(n_alpha, n_beta) > n_qubits) throw std::invalid_argument("more electrons than spin orbitals");
  return Statevector::basis_state(n_qubits, hartree_fock_bits(n_alpha, n_beta));
}

namespace {

bool terms_commute(const PauliSum& gen) {
  std::vector<PauliString> ps;
  for (const auto& [p, c] : gen.terms()) ps.push_back(p);
  for (std::size_t a = 0; a < ps.size(); ++a)
    for (std::size_t b = a + 1; b < ps.size(); ++b)
      if (!ps[a].commutes_with(ps[b])) return false;
  return true;
}

void apply_pauli_rotation(Statevector& state, const PauliString& p, double phi) {
  // exp(i phi P) = cos(phi) + i sin(phi) P
  const cplx c = std::cos(phi);
  const cplx is = cplx(0.0, std::sin(phi));
  const int ny = p.y_count();
  static const cplx iph[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx yph = iph[ny % 4];
  Eigen::VectorXcd& a = state.amplitudes();
  const std::size_t dim = state.dim();
  if (p.x == 0) {
    for (std::size_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & p.z) & 1) ? -1.0 : 1.0;
      a[static_cast<Eigen::Index>(b)] *= c + is * yph * sign;
    }
    return;
  }
  const std::uint64_t pivot = std::uint64_t{1} << std::countr_zero(p.x);
  for (std::size_t b = 0; b < dim; ++b) {
    if (b & pivot) continue;
    const std::size_t b2 = b ^ p.x;
    const double s1 = (std::popcount(b & p.z) & 1) ? -1.0 : 1.0;   // P|b> = yph s1 |b2>
    const double s2 = (std::popcount(b2 & p.z) & 1) ? -1.0 : 1.0;  // P|b2> = yph s2 |b>
    const cplx a1 = a[static_cast<Eigen::Index>(b)];
    const cplx a2 = a[static_cast<Eigen::Index>(b2)];
    a[static_cast<Eigen::Index>(b)] = c * a1 + is * yph * s2 * a2;
    a[static_cast<Eigen::Index>(b2)] = c * a2 + is * yph * s1 * a1;
  }
}

// exp(i t K) psi for Hermitian K via Lanczos with full reorthogonalization.
void krylov_exp(Statevector& state, const PauliSum& hermitian, double t) {
  const CompiledPauliSum k(hermitian);
  const Eigen::Index dim = static_cast<Eigen::Index>(state.dim());
  const double beta0 = state.norm();
  if (beta0 == 0.0) return;
  const int max_m = static_cast<int>(std::min<Eigen::Index>(dim, 64));
  std::vector<Eigen::VectorXcd> v;
  std::vector<double> alpha, beta;
  v.push_back(state.amplitudes() / beta0);
  Eigen::VectorXcd w(dim);
  for (int j = 0; j < max_m; ++j) {
    k.apply({v[j].data(), static_cast<std::size_t>(dim)}, {w.data(), static_cast<std::size_t>(dim)});
    alpha.push_back(v[j].dot(w).real());
    for (int r = 0; r < 2; ++r)
      for (const auto& vi : v) w -= vi * vi.dot(w);
    const double b = w.norm();
    if (b < 1e-13 * std::max(1.0, std::abs(alpha.back())) || j + 1 == max_m) break;
    beta.push_back(b);
    v.push_back(w / b);
  }
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd tmat = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    tmat(j, j) = alpha[j];
    if (j + 1 < m) tmat(j, j + 1) = tmat(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tmat);
  Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(m);
  for (int r = 0; r < m; ++r) {
    const cplx ph = std::exp(cplx(0.0, t * es.eigenvalues()[r]));
    coeff += es.eigenvectors().col(r).cast<cplx>() * (ph * es.eigenvectors()(0, r));
  }
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim);
  for (int j = 0; j < m; ++j) out += v[j] * coeff[j];
  state.amplitudes() = out * beta0;
}

}  // namespace

void apply_exp_pauli(Statevector& state, const PauliSum& generator, double angle) {
  if (generator.n_qubits() > state.n_qubits()) throw std::invalid_argument("generator exceeds register");
  if (!generator.is_anti_hermitian()) throw std::invalid_argument("generator is not anti-Hermitian");
  if (angle == 0.0 || generator.empty()) return;
  if (terms_commute(generator)) {
    // generator = sum_t i k_t P_t
    for (const auto& [p, c] : generator.terms()) {
      if (p.is_identity()) {
        state.amplitudes() *= std::exp(cplx(0.0, c.imag() * angle));
        continue;
      }
      apply_pauli_rotation(state, p, c.imag() * angle);
    }
    return;
  }
  PauliSum k(generator.n_qubits());
  for (const auto& [p, c] : generator.terms()) k.add(p, c.imag());
  krylov_exp(state, k, angle);
}

namespace {

std::uint64_t mask_of(const std::vector<int>& modes) {
  std::uint64_t m = 0;
  for (int q : modes) m |= std::uint64_t{1} << q;
  return m;
}

}  // namespace

void apply_excitation(Statevector& state, const FermionGenerator& g, double theta) {
  if (theta == 0.0) return;
  if (g.max_mode() >= state.n_qubits()) throw std::invalid_argument("generator exceeds register");
  const std::uint64_t occ = mask_of(g.occupied);
  const std::uint64_t vir = mask_of(g.virtual_);
  const std::vector<LadderOp> ops = g.ladder();
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::VectorXcd& a = state.amplitudes();
  const std::size_t dim = state.dim();
  for (std::size_t b = 0; b < dim; ++b) {
    if ((b & occ) != occ || (b & vir) != 0) continue;
    const auto img = apply_ladder(ops, b);
    const Eigen::Index i1 = static_cast<Eigen::Index>(b);
    const Eigen::Index i2 = static_cast<Eigen::Index>(img->bits);
    const cplx a1 = a[i1], a2 = a[i2];
    a[i1] = c * a1 - img->sign * s * a2;
    a[i2] = c * a2 + img->sign * s * a1;
  }
}

Statevector apply_generator(const Statevector& state, const FermionGenerator& g) {
  const std::uint64_t occ = mask_of(g.occupied);
  const std::uint64_t vir = mask_of(g.virtual_);
  const std::vector<LadderOp> ops = g.ladder();
  Statevector out(state.n_qubits(), Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(state.dim())));
  const std::size_t dim = state.dim();
  for (std::size_t b = 0; b < dim; ++b) {
    if ((b & occ) != occ || (b & vir) != 0) continue;
    const auto img = apply_ladder(ops, b);
    const Eigen::Index i1 = static_cast<Eigen::Index>(b);
    const Eigen::Index i2 = static_cast<Eigen::Index>(img->bits);
    // A|b> = s|b'>, A|b'> = -s|b>
    out.amplitudes()[i2] += img->sign * state.amplitudes()[i1];
    out.amplitudes()[i1] -= img->sign * state.amplitudes()[i2];
  }
  return out;
}

Statevector apply_ladder(const Statevector& state, const std::vector<LadderOp>& ops) {
  Statevector out(state.n_qubits(), Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(state.dim())));
  for (std::size_t b = 0; b < state.dim(); ++b) {
    const cplx amp = state[b];
    if (amp == cplx{}) continue;
    if (auto img = apply_ladder(ops, b)) out[img->bits] += img->sign * amp;
  }
  return out;
}

double expectation(const Statevector& state, const PauliSum& observable) {
  if (observable.n_qubits() != state.n_qubits()) throw std::invalid_argument("qubit-count mismatch");
  if (!observable.is_hermitian()) throw std::invalid_argument("observable is not Hermitian");
  return CompiledPauliSum(observable).expectation(state.span()).real();
}

double expectation(const Statevector& state, const CompiledPauliSum& observable) {
  if (observable.n_qubits() != state.n_qubits()) throw std::invalid_argument("qubit-count mismatch");
  return observable.expectation(state.span()).real();
}

void apply_pauli(Statevector& state, const PauliString& p) {
  static const cplx iph[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx yph = iph[p.y_count() % 4];
  Eigen::VectorXcd out(state.amplitudes().size());
  for (std::size_t b = 0; b < state.dim(); ++b) {
    const double sign = (std::popcount(b & p.z) & 1) ? -1.0 : 1.0;
    out[static_cast<Eigen::Index>(b ^ p.x)] = yph * sign * state[b];
  }
  state.amplitudes() = std::move(out);
}

void apply_ry(Statevector& state, int qubit, double angle) {
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t b = 0; b < state.dim(); ++b) {
    if (b & bit) continue;
    const cplx a0 = state[b], a1 = state[b | bit];
    state[b] = c * a0 - s * a1;
    state[b | bit] = s * a0 + c * a1;
  }
}

void apply_hadamard(Statevector& state, int qubit) {
  const double r = 1.0 / std::sqrt(2.0);
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t b = 0; b < state.dim(); ++b) {
    if (b & bit) continue;
    const cplx a0 = state[b], a1 = state[b | bit];
    state[b] = r * (a0 + a1);
    state[b | bit] = r * (a0 - a1);
  }
}

void apply_sdg(Statevector& state, int qubit) {
  const std::size_t bit = std::size_t{1} << qubit;
  for (std::size_t b = 0; b < state.dim(); ++b)
    if (b & bit) state[b] *= cplx(0.0, -1.0);
}

void apply_cnot(Statevector& state, int control, int target) {
  const std::size_t cb = std::size_t{1} << control, tb = std::size_t{1} << target;
  for (std::size_t b = 0; b < state.dim(); ++b)
    if ((b & cb) && !(b & tb)) std::swap(state[b], state[b | tb]);
}

void apply_basis_change(Statevector& state, std::span<const char> axes) {
  for (std::size_t q = 0; q < axes.size(); ++q) {
    switch (axes[q]) {
      case 'X': apply_hadamard(state, static_cast<int>(q)); break;
      case 'Y':
        apply_sdg(state, static_cast<int>(q));
        apply_hadamard(state, static_cast<int>(q));
        break;
      case 'Z':
      case 'I': break;
      default: throw std::invalid_argument("unknown measurement axis");
    }
  }
}

GivensDecomposition givens_decompose(const Eigen::MatrixXd& rotation, double tol) {
  const Eigen::Index n = rotation.rows();
  if (rotation.cols() != n) throw std::invalid_argument("rotation must be square");
  if ((rotation.transpose() * rotation - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("rotation matrix is not orthogonal");
  Eigen::MatrixXd work = rotation;
  std::vector<GivensRotation> generated;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    for (Eigen::Index i = n - 1; i > j; --i) {
      const double a = work(i - 1, j), b = work(i, j);
      if (b == 0.0) continue;
      const double r = std::hypot(a, b);
      const double c = a / r, s = b / r;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double u = work(i - 1, k), v = work(i, k);
        work(i - 1, k) = c * u + s * v;
        work(i, k) = -s * u + c * v;
      }
      // The transpose of this row rotation maps orbital i-1 -> c (i-1) + s i.
      generated.push_back({static_cast<int>(i - 1), static_cast<int>(i), std::atan2(s, c)});
    }
  }
  GivensDecomposition out;
  for (Eigen::Index p = 0; p < n; ++p)
    if (work(p, p) < 0.0) out.reflected.push_back(static_cast<int>(p));
  out.rotations.assign(generated.rbegin(), generated.rend());
  return out;
}

void apply_orbital_rotation_spin(Statevector& state, const Eigen::MatrixXd& rotation, int spin) {
  const int n = static_cast<int>(rotation.rows());
  if (2 * n > state.n_qubits()) throw std::invalid_argument("rotation exceeds register");
  const GivensDecomposition dec = givens_decompose(rotation);
  std::uint64_t refl = 0;
  for (int p : dec.reflected) refl |= std::uint64_t{1} << spin_orbital(p, spin);
  if (refl) {
    for (std::size_t b = 0; b < state.dim(); ++b)
      if (std::popcount(b & refl) & 1) state[b] = -state[b];
  }
  for (const GivensRotation& gr : dec.rotations) {
    apply_excitation(state, FermionGenerator::make_single(spin_orbital(gr.p, spin), spin_orbital(gr.q, spin)),
                     gr.theta);
  }
}

void apply_orbital_rotation(Statevector& state, const Eigen::MatrixXd& rotation) {
  apply_orbital_rotation_spin(state, rotation, 0);
  apply_orbital_rotation_spin(state, rotation, 1);
}

void apply_number_phases(Statevector& state, std::span<const std::pair<int, int>> pairs,
                         std::span<const double> angles) {
  if (pairs.size() != angles.size()) throw std::invalid_argument("pair/angle count mismatch");
  std::vector<std::uint64_t> masks;
  for (auto [p, q] : pairs) masks.push_back((std::uint64_t{1} << p) | (std::uint64_t{1} << q));
  for (std::size_t b = 0; b < state.dim(); ++b) {
    double phase = 0.0;
    for (std::size_t t = 0; t < masks.size(); ++t)
      if ((b & masks[t]) == masks[t]) phase += angles[t];
    if (phase != 0.0) state[b] *= std::exp(cplx(0.0, phase));
  }
}

std::vector<double> probabilities(const Statevector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t b = 0; b < state.dim(); ++b) p[b] = std::norm(state[b]);
  return p;
}

}  // namespace qsceom
