#include "qsceom/integrals.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <optional>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace qsceom {

MolecularIntegrals MolecularIntegrals::zeros(int n_spatial, int n_electrons, int ms2) {
  MolecularIntegrals m;
  m.n_spatial = n_spatial;
  m.n_electrons = n_electrons;
  m.ms2 = ms2;
  m.h = Eigen::MatrixXd::Zero(n_spatial, n_spatial);
  const std::size_t n = static_cast<std::size_t>(n_spatial);
  m.g.assign(n * n * n * n, 0.0);
  return m;
}

void MolecularIntegrals::set_eri(int i, int j, int k, int l, double v) {
  for (auto [a, b, c, d] : {std::array{i, j, k, l}, std::array{j, i, k, l}, std::array{i, j, l, k},
                            std::array{j, i, l, k}, std::array{k, l, i, j}, std::array{l, k, i, j},
                            std::array{k, l, j, i}, std::array{l, k, j, i}}) {
    g[eri_index(a, b, c, d)] = v;
  }
}

void MolecularIntegrals::validate(double tol) const {
  const std::size_t n = static_cast<std::size_t>(n_spatial);
  if (n_spatial < 0 || n_spatial > 32) throw std::invalid_argument("n_spatial out of range");
  if (h.rows() != n_spatial || h.cols() != n_spatial)
    throw std::invalid_argument("one-body matrix has wrong shape");
  if (g.size() != n * n * n * n) throw std::invalid_argument("two-body tensor has wrong size");
  if (n_electrons < 0 || n_electrons > 2 * n_spatial)
    throw std::invalid_argument("electron count exceeds 2 * n_spatial");
  if (std::abs(ms2) > n_electrons || (n_electrons - ms2) % 2 != 0)
    throw std::invalid_argument("MS2 inconsistent with electron count");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("one-body matrix is not symmetric");
  for (int i = 0; i < n_spatial; ++i)
    for (int j = 0; j < n_spatial; ++j)
      for (int k = 0; k < n_spatial; ++k)
        for (int l = 0; l < n_spatial; ++l) {
          const double v = eri(i, j, k, l);
          if (std::abs(v - eri(j, i, k, l)) > tol || std::abs(v - eri(i, j, l, k)) > tol ||
              std::abs(v - eri(k, l, i, j)) > tol)
            throw std::invalid_argument("two-body tensor lacks 8-fold symmetry");
        }
}

namespace {

double parse_value(std::string tok, int lineno) {
  std::replace(tok.begin(), tok.end(), 'D', 'E');
  std::replace(tok.begin(), tok.end(), 'd', 'e');
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size())
    throw FormatError("FCIDUMP line " + std::to_string(lineno) + ": non-numeric value '" + tok + "'");
  return v;
}

int parse_index(const std::string& tok, int lineno) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size())
    throw FormatError("FCIDUMP line " + std::to_string(lineno) + ": bad index '" + tok + "'");
  return v;
}

std::map<std::string, std::vector<std::string>> parse_namelist(const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream is(cleaned);
  std::string current;
  for (std::string tok; is >> tok;) {
    std::string upper = tok;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "&FCI" || upper == "&END" || upper == "/") continue;
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      current = upper.substr(0, eq);
      out[current];
      std::string rest = tok.substr(eq + 1);
      if (!rest.empty()) out[current].push_back(rest);
    } else if (!current.empty()) {
      out[current].push_back(tok);
    }
  }
  return out;
}

int header_int(const std::map<std::string, std::vector<std::string>>& hdr, const std::string& key,
               std::optional<int> fallback) {
  auto it = hdr.find(key);
  if (it == hdr.end() || it->second.empty()) {
    if (fallback) return *fallback;
    throw FormatError("FCIDUMP header missing " + key);
  }
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(it->second.front(), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.front().size()) throw FormatError("FCIDUMP header has invalid " + key);
  return v;
}

}  // namespace

MolecularIntegrals parse_fcidump(std::istream& in) {
  std::string header;
  std::string line;
  int lineno = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++lineno;
    header += line;
    header += ' ';
    std::string upper = line;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper.find("&END") != std::string::npos || upper.find('/') != std::string::npos) {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw FormatError("FCIDUMP header not terminated by &END");
  const auto hdr = parse_namelist(header);
  const int norb = header_int(hdr, "NORB", std::nullopt);
  const int nelec = header_int(hdr, "NELEC", std::nullopt);
  const int ms2 = header_int(hdr, "MS2", 0);
  if (norb <= 0 || norb > 32) throw FormatError("FCIDUMP NORB out of range");
  if (nelec < 0 || nelec > 2 * norb) throw FormatError("FCIDUMP NELEC out of range");

  MolecularIntegrals ints = MolecularIntegrals::zeros(norb, nelec, ms2);
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 5)
      throw FormatError("FCIDUMP line " + std::to_string(lineno) + ": expected 'value i j k l'");
    const double v = parse_value(tok[0], lineno);
    int idx[4];
    for (int t = 0; t < 4; ++t) {
      idx[t] = parse_index(tok[t + 1], lineno);
      if (idx[t] < 0 || idx[t] > norb)
        throw FormatError("FCIDUMP line " + std::to_string(lineno) + ": index out of range");
    }
    const auto [i, j, k, l] = idx;
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      ints.core_energy = v;
    } else if (k == 0 && l == 0) {
      if (i == 0 || j == 0)
        throw FormatError("FCIDUMP line " + std::to_string(lineno) + ": malformed one-body record");
      ints.h(i - 1, j - 1) = v;
      ints.h(j - 1, i - 1) = v;
    } else {
      if (i == 0 || j == 0 || k == 0 || l == 0)
        throw FormatError("FCIDUMP line " + std::to_string(lineno) + ": malformed two-body record");
      ints.set_eri(i - 1, j - 1, k - 1, l - 1, v);
    }
  }
  return ints;
}

MolecularIntegrals read_fcidump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open FCIDUMP file " + path.string());
  return parse_fcidump(in);
}

void write_fcidump(std::ostream& out, const MolecularIntegrals& ints) {
  const int n = ints.n_spatial;
  out << " &FCI NORB=" << n << ",NELEC=" << ints.n_electrons << ",MS2=" << ints.ms2 << ",\n";
  out << "  ORBSYM=";
  for (int i = 0; i < n; ++i) out << "1,";
  out << "\n  ISYM=1,\n &END\n";
  char buf[96];
  auto emit = [&](double v, int i, int j, int k, int l) {
    std::snprintf(buf, sizeof buf, "%.17g %d %d %d %d\n", v, i, j, k, l);
    out << buf;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l <= k; ++l) {
          if (i * (i + 1) / 2 + j < k * (k + 1) / 2 + l) continue;
          const double v = ints.eri(i, j, k, l);
          if (v != 0.0) emit(v, i + 1, j + 1, k + 1, l + 1);
        }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      if (ints.h(i, j) != 0.0) emit(ints.h(i, j), i + 1, j + 1, 0, 0);
  emit(ints.core_energy, 0, 0, 0, 0);
}

ActiveSpace centered_active_space(const MolecularIntegrals& ints, int n_electrons, int n_orbitals) {
  const int n_core_electrons = ints.n_electrons - n_electrons;
  if (n_core_electrons < 0 || n_core_electrons % 2 != 0)
    throw std::invalid_argument("active electron count must leave an even number of core electrons");
  const int n_core = n_core_electrons / 2;
  if (n_core + n_orbitals > ints.n_spatial)
    throw std::invalid_argument("active window exceeds the orbital count");
  ActiveSpace space;
  space.n_active_electrons = n_electrons;
  for (int p = 0; p < n_orbitals; ++p) space.active_orbitals.push_back(n_core + p);
  return space;
}

MolecularIntegrals restrict_active(const MolecularIntegrals& ints, const ActiveSpace& space) {
  const auto& act = space.active_orbitals;
  if (act.empty()) throw std::invalid_argument("active space is empty");
  std::set<int> seen;
  for (int p : act) {
    if (p < 0 || p >= ints.n_spatial) throw std::invalid_argument("active orbital index out of range");
    if (!seen.insert(p).second) throw std::invalid_argument("duplicate active orbital index");
  }
  const int lowest = *seen.begin();
  std::vector<int> core;
  for (int p = 0; p < lowest; ++p) core.push_back(p);
  const int na = static_cast<int>(act.size());
  if (ints.n_electrons - 2 * static_cast<int>(core.size()) != space.n_active_electrons)
    throw std::invalid_argument("active space inconsistent with electron count");
  if (space.n_active_electrons > 2 * na || std::abs(ints.ms2) > space.n_active_electrons ||
      (space.n_active_electrons - ints.ms2) % 2 != 0)
    throw std::invalid_argument("active space inconsistent with electron count");

  MolecularIntegrals out = MolecularIntegrals::zeros(na, space.n_active_electrons, ints.ms2);
  double ecore = ints.core_energy;
  for (int c : core) ecore += 2.0 * ints.h(c, c);
  for (int c : core)
    for (int d : core) ecore += 2.0 * ints.eri(c, c, d, d) - ints.eri(c, d, d, c);
  out.core_energy = ecore;
  for (int p = 0; p < na; ++p)
    for (int q = 0; q < na; ++q) {
      const int P = act[p], Q = act[q];
      double v = ints.h(P, Q);
      for (int c : core) v += 2.0 * ints.eri(P, Q, c, c) - ints.eri(P, c, c, Q);
      out.h(p, q) = v;
    }
  for (int p = 0; p < na; ++p)
    for (int q = 0; q < na; ++q)
      for (int r = 0; r < na; ++r)
        for (int s = 0; s < na; ++s) out.g[out.eri_index(p, q, r, s)] = ints.eri(act[p], act[q], act[r], act[s]);
  return out;
}

std::vector<std::uint64_t> orbital_z2_symmetries(const MolecularIntegrals& ints, double tol) {
  const int n = ints.n_spatial;
  if (n > 64) throw std::invalid_argument("symmetry detection supports at most 64 orbitals");
  // Each non-negligible integral constrains the XOR of its odd-multiplicity indices.
  std::set<std::uint64_t> rows;
  auto bit = [](int p) { return std::uint64_t{1} << p; };
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      if (std::abs(ints.h(p, q)) > tol && p != q) rows.insert(bit(p) ^ bit(q));
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s)
          if (std::abs(ints.eri(p, q, r, s)) > tol) {
            const std::uint64_t m = bit(p) ^ bit(q) ^ bit(r) ^ bit(s);
            if (m) rows.insert(m);
          }
  // Reduced row echelon form over GF(2); pivot[c] = row index owning column c.
  std::vector<std::uint64_t> basis;
  std::vector<int> pivot(static_cast<std::size_t>(n), -1);
  for (std::uint64_t r : rows) {
    for (int c = 0; c < n; ++c)
      if ((r & bit(c)) && pivot[static_cast<std::size_t>(c)] >= 0) r ^= basis[static_cast<std::size_t>(pivot[static_cast<std::size_t>(c)])];
    if (!r) continue;
    const int c = std::countr_zero(r);
    for (auto& b : basis)
      if (b & bit(c)) b ^= r;
    pivot[static_cast<std::size_t>(c)] = static_cast<int>(basis.size());
    basis.push_back(r);
  }
  // One null-space vector per free column.
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : bit(n) - 1;
  std::vector<std::uint64_t> out;
  std::vector<std::uint64_t> span;  // echelon form of accepted vectors plus all-ones
  auto reduce = [&](std::uint64_t v) {
    for (std::uint64_t s : span) v = std::min(v, v ^ s);
    return v;
  };
  auto accept = [&](std::uint64_t v) {
    v = reduce(v);
    if (!v) return false;
    span.push_back(v);
    std::sort(span.begin(), span.end(), std::greater<>());
    return true;
  };
  accept(all);
  for (int f = 0; f < n; ++f) {
    if (pivot[static_cast<std::size_t>(f)] >= 0) continue;
    std::uint64_t v = bit(f);
    for (int c = 0; c < n; ++c) {
      const int pr = pivot[static_cast<std::size_t>(c)];
      if (pr >= 0 && (basis[static_cast<std::size_t>(pr)] & bit(f))) v |= bit(c);
    }
    if (accept(v)) out.push_back(v);
  }
  return out;
}

}  // namespace qsceom
