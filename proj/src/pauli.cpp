#include "qsceom/pauli.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qsceom {

namespace {

cplx i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

PauliString PauliString::single(int qubit, char axis) {
  if (qubit < 0 || qubit >= 64) throw std::out_of_range("qubit index out of range");
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  switch (axis) {
    case 'I': return {};
    case 'X': return {bit, 0};
    case 'Y': return {bit, bit};
    case 'Z': return {0, bit};
    default: throw std::invalid_argument(std::string("unknown Pauli axis '") + axis + "'");
  }
}

PauliString PauliString::parse(std::string_view text) {
  PauliString p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char axis = static_cast<char>(std::toupper(static_cast<unsigned char>(text[pos])));
    ++pos;
    if (axis == 'I' && (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))) {
      continue;
    }
    int qubit = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), qubit);
    if (ec != std::errc{}) throw std::invalid_argument("malformed Pauli string: " + std::string(text));
    pos = static_cast<std::size_t>(ptr - text.data());
    const PauliString s = single(qubit, axis);
    if (s.support() & p.support()) {
      throw std::invalid_argument("repeated qubit in Pauli string: " + std::string(text));
    }
    p.x |= s.x;
    p.z |= s.z;
  }
  return p;
}

int PauliString::weight() const { return std::popcount(x | z); }
int PauliString::y_count() const { return std::popcount(x & z); }

char PauliString::axis(int qubit) const {
  const bool xb = (x >> qubit) & 1U;
  const bool zb = (z >> qubit) & 1U;
  if (xb && zb) return 'Y';
  if (xb) return 'X';
  if (zb) return 'Z';
  return 'I';
}

std::string PauliString::to_string() const {
  if (is_identity()) return "I";
  std::string out;
  std::uint64_t s = support();
  while (s) {
    const int q = std::countr_zero(s);
    out += axis(q);
    out += std::to_string(q);
    s &= s - 1;
  }
  return out;
}

bool PauliString::commutes_with(const PauliString& o) const {
  return (std::popcount((x & o.z) ^ (z & o.x)) & 1) == 0;
}

bool PauliString::qubitwise_commutes_with(const PauliString& o) const {
  const std::uint64_t shared = support() & o.support();
  return ((x ^ o.x) & shared) == 0 && ((z ^ o.z) & shared) == 0;
}

std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b) {
  const PauliString c{a.x ^ b.x, a.z ^ b.z};
  int k = a.y_count() + b.y_count() - c.y_count();
  if (std::popcount(a.z & b.x) & 1) k += 2;
  return {i_power(k), c};
}

PauliSum PauliSum::constant(int n_qubits, cplx value) {
  PauliSum s(n_qubits);
  s.add(PauliString::identity(), value);
  return s;
}

void PauliSum::add(const PauliString& p, cplx c) {
  if (n_qubits_ < 64 && (p.support() >> n_qubits_) != 0) {
    throw std::out_of_range("Pauli string " + p.to_string() + " exceeds register of " +
                            std::to_string(n_qubits_) + " qubits");
  }
  auto [it, inserted] = terms_.try_emplace(p, c);
  if (!inserted) it->second += c;
}

void PauliSum::simplify(double tol) {
  std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) < tol; });
}

cplx PauliSum::coefficient(const PauliString& p) const {
  auto it = terms_.find(p);
  return it == terms_.end() ? cplx{} : it->second;
}

PauliSum PauliSum::adjoint() const {
  PauliSum out(n_qubits_);
  for (const auto& [p, c] : terms_) out.terms_.emplace(p, std::conj(c));
  return out;
}

bool PauliSum::is_hermitian(double tol) const {
  for (const auto& [p, c] : terms_)
    if (std::abs(c.imag()) > tol) return false;
  return true;
}

bool PauliSum::is_anti_hermitian(double tol) const {
  for (const auto& [p, c] : terms_)
    if (std::abs(c.real()) > tol) return false;
  return true;
}

bool PauliSum::is_diagonal() const {
  for (const auto& [p, c] : terms_)
    if (!p.is_diagonal()) return false;
  return true;
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (other.n_qubits_ > n_qubits_) n_qubits_ = other.n_qubits_;
  for (const auto& [p, c] : other.terms_) add(p, c);
  simplify();
  return *this;
}

PauliSum& PauliSum::operator-=(const PauliSum& other) {
  if (other.n_qubits_ > n_qubits_) n_qubits_ = other.n_qubits_;
  for (const auto& [p, c] : other.terms_) add(p, -c);
  simplify();
  return *this;
}

PauliSum& PauliSum::operator*=(cplx s) {
  for (auto& [p, c] : terms_) c *= s;
  simplify();
  return *this;
}

PauliSum operator*(const PauliSum& a, const PauliSum& b) {
  PauliSum out(std::max(a.n_qubits(), b.n_qubits()));
  for (const auto& [pa, ca] : a.terms())
    for (const auto& [pb, cb] : b.terms()) {
      auto [phase, pc] = multiply(pa, pb);
      out.add(pc, phase * ca * cb);
    }
  out.simplify();
  return out;
}

void PauliSum::apply(std::span<const cplx> in, std::span<cplx> out) const {
  CompiledPauliSum(*this).apply(in, out);
}

Eigen::VectorXcd PauliSum::apply(const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd out(in.size());
  apply(std::span<const cplx>(in.data(), static_cast<std::size_t>(in.size())),
        std::span<cplx>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Eigen::MatrixXcd PauliSum::to_dense() const {
  const std::size_t dim = std::size_t{1} << n_qubits_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [p, c] : terms_) {
    const cplx yph = i_power(p.y_count());
    for (std::size_t b = 0; b < dim; ++b) {
      const double sign = (std::popcount(b & p.z) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(b ^ p.x), static_cast<Eigen::Index>(b)) += c * yph * sign;
    }
  }
  return m;
}

std::string PauliSum::to_text() const {
  const bool herm = is_hermitian(0.0);
  std::ostringstream os;
  for (const auto& [p, c] : terms_) {
    os << format_double(c.real());
    if (!herm) os << ' ' << format_double(c.imag());
    os << ' ' << p.to_string() << '\n';
  }
  return os.str();
}

PauliSum PauliSum::from_text(std::string_view text, int n_qubits) {
  PauliSum out(n_qubits);
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    try {
      if (tok.size() == 2) {
        out.add(PauliString::parse(tok[1]), std::stod(tok[0]));
      } else if (tok.size() == 3) {
        out.add(PauliString::parse(tok[2]), cplx(std::stod(tok[0]), std::stod(tok[1])));
      } else {
        throw std::invalid_argument("expected 2 or 3 fields");
      }
    } catch (const std::exception& e) {
      throw std::invalid_argument("PauliSum text line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

CompiledPauliSum::CompiledPauliSum(const PauliSum& sum) : n_qubits_(sum.n_qubits()) {
  for (const auto& [p, c] : sum.terms()) {
    if (buckets_.empty() || buckets_.back().x != p.x) buckets_.push_back(Bucket{p.x, {}, {}});
    buckets_.back().z.push_back(p.z);
    buckets_.back().c.push_back(c * i_power(p.y_count()));
  }
}

void CompiledPauliSum::apply(std::span<const cplx> in, std::span<cplx> out) const {
  const std::size_t dim = in.size();
  std::fill(out.begin(), out.end(), cplx{});
  for (const Bucket& bk : buckets_) {
    const std::size_t nt = bk.z.size();
    for (std::size_t b = 0; b < dim; ++b) {
      const cplx a = in[b];
      if (a == cplx{}) continue;
      cplx acc{};
      for (std::size_t t = 0; t < nt; ++t) {
        if (std::popcount(b & bk.z[t]) & 1)
          acc -= bk.c[t];
        else
          acc += bk.c[t];
      }
      out[b ^ bk.x] += acc * a;
    }
  }
}

cplx CompiledPauliSum::expectation(std::span<const cplx> psi) const {
  const std::size_t dim = psi.size();
  cplx total{};
  for (const Bucket& bk : buckets_) {
    const std::size_t nt = bk.z.size();
    for (std::size_t b = 0; b < dim; ++b) {
      const cplx a = psi[b];
      if (a == cplx{}) continue;
      cplx acc{};
      for (std::size_t t = 0; t < nt; ++t) {
        if (std::popcount(b & bk.z[t]) & 1)
          acc -= bk.c[t];
        else
          acc += bk.c[t];
      }
      total += std::conj(psi[b ^ bk.x]) * acc * a;
    }
  }
  return total;
}

}  // namespace qsceom
