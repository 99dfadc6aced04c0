#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qsceom/pauli.hpp"
#include "qsceom/random.hpp"
#include "qsceom/statevector.hpp"

namespace qsceom {

struct NoiseModel {
  double depol_1q = 0.0;
  double depol_2q = 0.0;
  std::vector<double> readout_eps;  // per qubit; empty means no readout error

  static NoiseModel noiseless() { return {}; }
  static NoiseModel uniform_readout(int n_qubits, double eps);

  double readout(int qubit) const {
    return readout_eps.empty() ? 0.0 : readout_eps.at(static_cast<std::size_t>(qubit));
  }
  bool has_gate_noise() const { return depol_1q > 0.0 || depol_2q > 0.0; }
  bool has_readout_noise() const;
  void validate() const;
};

/// Measurement outcomes keyed by basis index (qubit 0 = least-significant
/// bit, printed rightmost). Raw histograms hold integer counts summing to
/// `shots`; quasi histograms hold (possibly negative) weights summing to 1.
struct CountsHistogram {
  int n_qubits = 0;
  std::map<std::uint64_t, double> values;
  std::uint64_t shots = 0;
  bool quasi = false;

  double total() const;
  double probability(std::uint64_t bits) const;
  std::string bitstring(std::uint64_t bits) const;
  /// bitstring,count or bitstring,quasi_probability
  void write_csv(std::ostream& out) const;
};

/// Outcome distribution after the basis change and the readout channel, as a
/// quasi histogram (the infinite-shot limit).
CountsHistogram exact_distribution(const Statevector& state, std::span<const char> basis_axes,
                                   const NoiseModel& noise);

/// Draws `shots` samples from exact_distribution(...); deterministic for a seed.
CountsHistogram sample_counts(const Statevector& state, std::span<const char> basis_axes, std::uint64_t shots,
                              const NoiseModel& noise, std::uint64_t seed);

/// Multinomial draw of `shots` outcomes from a probability vector.
CountsHistogram sample_from_probabilities(std::span<const double> probs, int n_qubits, std::uint64_t shots,
                                          Rng& rng);

/// Applies the symmetric per-qubit flip channel in place.
void apply_readout_channel(std::vector<double>& probs, int n_qubits, const NoiseModel& noise);

/// sum_l c_l sum_b p(b) (-1)^{|b & z_l|}; every term must be I/Z only.
double estimate_from_counts(const CountsHistogram& counts, const PauliSum& diagonal_terms);

/// With probability p, applies a uniformly random non-identity Pauli on the
/// given qubits (1 or 2 of them). Returns true when an error was inserted.
bool apply_depolarizing(Statevector& state, std::span<const int> qubits, double p, Rng& rng);

}  // namespace qsceom
