#include "qsceom/sampling.hpp"

#include <bit>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace qsceom {

NoiseModel NoiseModel::uniform_readout(int n_qubits, double eps) {
  NoiseModel m;
  m.readout_eps.assign(static_cast<std::size_t>(n_qubits), eps);
  return m;
}

bool NoiseModel::has_readout_noise() const {
  for (double e : readout_eps)
    if (e > 0.0) return true;
  return false;
}

void NoiseModel::validate() const {
  auto check = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  };
  check(depol_1q, "depol_1q");
  check(depol_2q, "depol_2q");
  for (double e : readout_eps)
    if (!(e >= 0.0 && e <= 0.5)) throw std::invalid_argument("readout flip probability must lie in [0, 0.5]");
}

double CountsHistogram::total() const {
  double t = 0.0;
  for (const auto& [b, v] : values) t += v;
  return t;
}

double CountsHistogram::probability(std::uint64_t bits) const {
  auto it = values.find(bits);
  if (it == values.end()) return 0.0;
  return it->second / total();
}

std::string CountsHistogram::bitstring(std::uint64_t bits) const {
  std::string s(static_cast<std::size_t>(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q)
    if ((bits >> q) & 1U) s[static_cast<std::size_t>(n_qubits - 1 - q)] = '1';
  return s;
}

void CountsHistogram::write_csv(std::ostream& out) const {
  out << "# qubit 0 is the rightmost character of each bitstring\n";
  out << (quasi ? "bitstring,quasi_probability\n" : "bitstring,count\n");
  char buf[64];
  for (const auto& [b, v] : values) {
    if (quasi)
      std::snprintf(buf, sizeof buf, "%.17g", v);
    else
      std::snprintf(buf, sizeof buf, "%.0f", v);
    out << bitstring(b) << ',' << buf << '\n';
  }
}

void apply_readout_channel(std::vector<double>& probs, int n_qubits, const NoiseModel& noise) {
  for (int q = 0; q < n_qubits; ++q) {
    const double eps = noise.readout(q);
    if (eps == 0.0) continue;
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t b = 0; b < probs.size(); ++b) {
      if (b & bit) continue;
      const double p0 = probs[b], p1 = probs[b | bit];
      probs[b] = (1.0 - eps) * p0 + eps * p1;
      probs[b | bit] = eps * p0 + (1.0 - eps) * p1;
    }
  }
}

namespace {

std::vector<double> measured_probabilities(const Statevector& state, std::span<const char> basis_axes,
                                           const NoiseModel& noise) {
  noise.validate();
  std::vector<double> probs;
  if (basis_axes.empty()) {
    probs = probabilities(state);
  } else {
    if (basis_axes.size() != static_cast<std::size_t>(state.n_qubits()))
      throw std::invalid_argument("basis change must list one axis per qubit");
    Statevector rotated = state;
    apply_basis_change(rotated, basis_axes);
    probs = probabilities(rotated);
  }
  if (noise.has_readout_noise()) apply_readout_channel(probs, state.n_qubits(), noise);
  return probs;
}

}  // namespace

CountsHistogram exact_distribution(const Statevector& state, std::span<const char> basis_axes,
                                   const NoiseModel& noise) {
  const std::vector<double> probs = measured_probabilities(state, basis_axes, noise);
  CountsHistogram h;
  h.n_qubits = state.n_qubits();
  h.quasi = true;
  for (std::size_t b = 0; b < probs.size(); ++b)
    if (probs[b] != 0.0) h.values.emplace(b, probs[b]);
  return h;
}

CountsHistogram sample_from_probabilities(std::span<const double> probs, int n_qubits, std::uint64_t shots,
                                          Rng& rng) {
  CountsHistogram h;
  h.n_qubits = n_qubits;
  h.shots = shots;
  double remaining_mass = 0.0;
  for (double p : probs) remaining_mass += p;
  std::uint64_t remaining = shots;
  for (std::size_t b = 0; b < probs.size() && remaining > 0; ++b) {
    const double p = probs[b];
    if (p <= 0.0) continue;
    std::uint64_t k = 0;
    const double frac = std::min(1.0, p / remaining_mass);
    if (frac >= 1.0) {
      k = remaining;
    } else {
      std::binomial_distribution<std::uint64_t> dist(remaining, frac);
      k = dist(rng);
    }
    remaining_mass -= p;
    if (k > 0) {
      h.values.emplace(b, static_cast<double>(k));
      remaining -= k;
    }
  }
  return h;
}

CountsHistogram sample_counts(const Statevector& state, std::span<const char> basis_axes, std::uint64_t shots,
                              const NoiseModel& noise, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  const std::vector<double> probs = measured_probabilities(state, basis_axes, noise);
  Rng rng(seed);
  return sample_from_probabilities(probs, state.n_qubits(), shots, rng);
}

double estimate_from_counts(const CountsHistogram& counts, const PauliSum& diagonal_terms) {
  if (!diagonal_terms.is_diagonal()) throw std::invalid_argument("estimate_from_counts needs I/Z-only terms");
  const double total = counts.total();
  if (total == 0.0) throw std::invalid_argument("empty histogram");
  double out = 0.0;
  for (const auto& [p, c] : diagonal_terms.terms()) {
    double acc = 0.0;
    for (const auto& [b, v] : counts.values) acc += (std::popcount(b & p.z) & 1) ? -v : v;
    out += c.real() * acc / total;
  }
  return out;
}

bool apply_depolarizing(Statevector& state, std::span<const int> qubits, double p, Rng& rng) {
  if (p <= 0.0) return false;
  if (qubits.empty() || qubits.size() > 2) throw std::invalid_argument("depolarizing acts on 1 or 2 qubits");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) >= p) return false;
  const int n_paulis = (1 << (2 * static_cast<int>(qubits.size()))) - 1;
  std::uniform_int_distribution<int> pick(1, n_paulis);
  int code = pick(rng);
  PauliString err;
  for (int q : qubits) {
    static const char axes[4] = {'I', 'X', 'Y', 'Z'};
    const PauliString s = PauliString::single(q, axes[code & 3]);
    err.x |= s.x;
    err.z |= s.z;
    code >>= 2;
  }
  apply_pauli(state, err);
  return true;
}

}  // namespace qsceom
