#include "qsceom/eom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>

namespace qsceom {

// ---------------------------------------------------------------- basis

EomBasis EomBasis::singles_doubles(int n_qubits, int n_alpha, int n_beta) {
  if (n_alpha != n_beta) throw std::invalid_argument("q-sc-EOM basis needs a closed-shell reference");
  if (n_alpha + n_beta > n_qubits) throw std::invalid_argument("more electrons than spin orbitals");
  EomBasis b;
  b.n_qubits = n_qubits;
  b.reference_bits = hartree_fock_bits(n_alpha, n_beta);
  b.entries.emplace_back(std::nullopt);
  for (auto& g : build_excitation_pool(n_alpha + n_beta, n_qubits - n_alpha - n_beta)) b.entries.emplace_back(g);
  return b;
}

int EomBasis::n_occupied() const { return std::popcount(reference_bits); }

BasisImage EomBasis::determinant(std::size_t j) const {
  if (j >= entries.size()) throw std::out_of_range("basis entry index");
  if (!entries[j]) return {reference_bits, 1.0};
  const auto img = apply_ladder(entries[j]->ladder(), reference_bits);
  if (!img) throw std::invalid_argument("excitation " + entries[j]->to_string() + " annihilates the reference");
  return *img;
}

void write_ledger_csv(std::ostream& out, const CostLedger& l) {
  out << "elements_evaluated,circuits_executed,shots_consumed\n";
  out << l.elements_evaluated << "," << l.circuits_executed << "," << l.shots_consumed << "\n";
}

// ---------------------------------------------------------------- matrices

EomMatrix EomMatrix::zeros(std::size_t n, double shift) {
  const auto k = static_cast<Eigen::Index>(n);
  EomMatrix m;
  m.values = Eigen::MatrixXd::Zero(k, k);
  m.imaginary = Eigen::MatrixXd::Zero(k, k);
  m.shots = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
  m.standard_error = Eigen::MatrixXd::Zero(k, k);
  m.evaluated = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(k, k, false);
  m.shift = shift;
  return m;
}

void EomMatrix::finalize() {
  const Eigen::MatrixXd sym = (values + values.transpose()) * 0.5;
  values = sym;
  finalized = true;
}

void EomMatrix::write_csv(std::ostream& out) const {
  out << "I,J,value,shots,stderr\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      out << i << "," << j << "," << values(i, j) << "," << (shots.size() ? shots(i, j) : 0) << ","
          << (standard_error.size() ? standard_error(i, j) : 0.0) << "\n";
}

void EomSolution::write_csv(std::ostream& out) const {
  out << "root,total_energy,excitation_energy\n";
  out << std::setprecision(15);
  for (std::size_t r = 0; r < total_energies.size(); ++r)
    out << r << "," << total_energies[r] << "," << excitation_energies[r] << "\n";
}

Statevector build_basis_state(const AnsatzCircuit& ansatz, const std::optional<FermionGenerator>& entry,
                              const Statevector& reference) {
  if (reference.n_qubits() != ansatz.n_qubits()) throw std::invalid_argument("reference width mismatch");
  Statevector s = entry ? apply_ladder(reference, entry->ladder()) : reference;
  const double nrm = s.norm();
  if (nrm < 1e-12) throw std::invalid_argument("excitation " + entry->to_string() + " annihilates the reference");
  s.amplitudes() /= nrm;
  ansatz.apply(s);
  return s;
}

std::vector<Statevector> prepare_basis_states(const AnsatzCircuit& ansatz, const EomBasis& basis) {
  const Statevector ref = Statevector::basis_state(basis.n_qubits, basis.reference_bits);
  std::vector<Statevector> out;
  out.reserve(basis.size());
  for (const auto& e : basis.entries) out.push_back(build_basis_state(ansatz, e, ref));
  return out;
}

EomMatrix build_m_exact(const std::vector<Statevector>& states, const PauliSum& hamiltonian, double shift) {
  const std::size_t n = states.size();
  const CompiledPauliSum h(hamiltonian);
  EomMatrix m = EomMatrix::zeros(n, shift);
  std::vector<Statevector> hs;
  hs.reserve(n);
  for (const auto& s : states) {
    Statevector t(s.n_qubits());
    h.apply(s.span(), t.span());
    hs.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      m.values(a, b) = states[i].inner(hs[j]).real() - (i == j ? shift : 0.0);
      m.evaluated(a, b) = true;
    }
  m.finalize();
  return m;
}

EomMatrix build_m_exact(const AnsatzCircuit& ansatz, const PauliSum& hamiltonian, const EomBasis& basis,
                        double shift) {
  return build_m_exact(prepare_basis_states(ansatz, basis), hamiltonian, shift);
}

ExactElementOracle::ExactElementOracle(std::vector<Statevector> states, const PauliSum& hamiltonian)
    : states_(std::move(states)), h_(hamiltonian), h_states_(states_.size()) {}

const Statevector& ExactElementOracle::h_state(int j) {
  auto& slot = h_states_.at(static_cast<std::size_t>(j));
  if (!slot) {
    const Statevector& s = states_[static_cast<std::size_t>(j)];
    Statevector t(s.n_qubits());
    h_.apply(s.span(), t.span());
    slot = std::move(t);
  }
  return *slot;
}

double ExactElementOracle::operator()(int i, int j) {
  return states_.at(static_cast<std::size_t>(i)).inner(h_state(j)).real();
}

Eigen::VectorXd ExactElementOracle::diagonal() {
  Eigen::VectorXd d(static_cast<Eigen::Index>(states_.size()));
  for (std::size_t j = 0; j < states_.size(); ++j)
    d[static_cast<Eigen::Index>(j)] = h_.expectation(states_[j].span()).real();
  return d;
}

// ---------------------------------------------------------------- sampling

std::vector<MeasurementSetting> enumerate_settings(std::size_t n_basis, std::size_t n_groups) {
  std::vector<MeasurementSetting> out;
  out.reserve(n_basis * n_basis * n_groups);
  for (std::size_t i = 0; i < n_basis; ++i)
    for (std::size_t j = i; j < n_basis; ++j)
      for (int phase : {0, 1, 2}) {
        if ((i == j) != (phase == 0)) continue;
        for (std::size_t g = 0; g < n_groups; ++g)
          out.push_back({static_cast<int>(i), static_cast<int>(j), phase, static_cast<int>(g)});
      }
  return out;
}

namespace {

using StateKey = std::tuple<int, int, int>;

// Determinant or two-determinant superposition before U, with the nominal
// preparation noise sites (X gates, one H, CNOT fan-out, S for the i phase).
Statevector prepare_pre_state(const EomBasis& basis, const StateKey& key, std::vector<std::vector<int>>* sites) {
  const auto [i, j, phase] = key;
  const BasisImage di = basis.determinant(static_cast<std::size_t>(i));
  Statevector s(basis.n_qubits, Eigen::VectorXcd::Zero(Eigen::Index{1} << basis.n_qubits));
  if (phase == 0) {
    s[di.bits] = di.sign;
    if (sites)
      for (int q = 0; q < basis.n_qubits; ++q)
        if ((di.bits >> q) & 1) sites->push_back({q});
    return s;
  }
  const BasisImage dj = basis.determinant(static_cast<std::size_t>(j));
  const double r = 1.0 / std::sqrt(2.0);
  s[di.bits] += di.sign * r;
  s[dj.bits] += (phase == 1 ? cplx{1.0, 0.0} : cplx{0.0, 1.0}) * dj.sign * r;
  if (sites) {
    const std::uint64_t common = di.bits & dj.bits;
    for (int q = 0; q < basis.n_qubits; ++q)
      if ((common >> q) & 1) sites->push_back({q});
    const std::uint64_t diff = di.bits ^ dj.bits;
    int lead = -1;
    for (int q = 0; q < basis.n_qubits; ++q) {
      if (!((diff >> q) & 1)) continue;
      if (lead < 0) {
        lead = q;
        sites->push_back({q});
        if (phase == 2) sites->push_back({q});
      } else {
        sites->push_back({lead, q});
      }
    }
  }
  return s;
}

std::vector<Statevector> prepare_trajectories(const AnsatzCircuit& ansatz, const EomBasis& basis, const StateKey& key,
                                              const SampledBuildOptions& opt, std::uint64_t seed) {
  std::vector<Statevector> out;
  if (!opt.noise.has_gate_noise()) {
    Statevector s = prepare_pre_state(basis, key, nullptr);
    ansatz.apply(s);
    out.push_back(std::move(s));
    return out;
  }
  const int t_count = std::max(1, opt.trajectories);
  for (int t = 0; t < t_count; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(std::get<0>(key)), static_cast<std::uint64_t>(std::get<1>(key)),
                               static_cast<std::uint64_t>(std::get<2>(key)), static_cast<std::uint64_t>(t), 0x7472ULL}));
    std::vector<std::vector<int>> sites;
    Statevector s = prepare_pre_state(basis, key, &sites);
    for (const auto& site : sites)
      apply_depolarizing(s, site, site.size() == 1 ? opt.noise.depol_1q : opt.noise.depol_2q, rng);
    ansatz.apply_noisy(s, ansatz.parameters(), opt.noise, rng);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> averaged_probabilities(const std::vector<Statevector>& states, const std::string& basis_axes,
                                           const NoiseModel& noise) {
  const std::size_t dim = states.front().dim();
  std::vector<double> p(dim, 0.0);
  for (const auto& st : states) {
    Statevector r = st;
    apply_basis_change(r, std::span<const char>(basis_axes.data(), basis_axes.size()));
    for (std::size_t b = 0; b < dim; ++b) p[b] += std::norm(r[b]);
  }
  for (double& v : p) v /= static_cast<double>(states.size());
  apply_readout_channel(p, states.front().n_qubits(), noise);
  return p;
}

CountsHistogram quasi_from_probabilities(const std::vector<double>& p, int n_qubits) {
  CountsHistogram h;
  h.n_qubits = n_qubits;
  h.quasi = true;
  for (std::size_t b = 0; b < p.size(); ++b)
    if (p[b] != 0.0) h.values[b] = p[b];
  return h;
}

std::map<StateKey, std::vector<std::size_t>> settings_by_state(const ShotPlan& plan) {
  std::map<StateKey, std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < plan.settings.size(); ++s) {
    const auto& st = plan.settings[s];
    out[{st.i, st.j, st.phase}].push_back(s);
  }
  return out;
}

void check_plan(const ShotPlan& plan, const EomBasis& basis, const GroupedObservable& obs) {
  if (plan.shots.size() != plan.settings.size()) throw std::invalid_argument("shot plan size mismatch");
  const int n = static_cast<int>(basis.size());
  std::set<std::tuple<int, int, int, int>> seen;
  for (const auto& s : plan.settings) {
    if (s.i < 0 || s.j < 0 || s.i >= n || s.j >= n || s.i > s.j)
      throw std::invalid_argument("plan/basis mismatch: setting outside the basis");
    if ((s.i == s.j) != (s.phase == 0) || s.phase < 0 || s.phase > 2)
      throw std::invalid_argument("plan/basis mismatch: bad phase");
    if (s.group < 0 || s.group >= static_cast<int>(obs.groups.size()))
      throw std::invalid_argument("plan/basis mismatch: group out of range");
    if (!seen.insert({s.i, s.j, s.phase, s.group}).second)
      throw std::invalid_argument("plan/basis mismatch: duplicate setting");
  }
}

}  // namespace

SettingCounts measure_settings(const AnsatzCircuit& ansatz, const GroupedObservable& observable,
                               const EomBasis& basis, const ShotPlan& plan, const SampledBuildOptions& options,
                               std::uint64_t seed) {
  check_plan(plan, basis, observable);
  if (ansatz.n_qubits() != basis.n_qubits || observable.n_qubits != basis.n_qubits)
    throw std::invalid_argument("register width mismatch");
  options.noise.validate();
  SettingCounts out;
  for (const auto& [key, idxs] : settings_by_state(plan)) {
    const auto states = prepare_trajectories(ansatz, basis, key, options, seed);
    for (std::size_t s : idxs) {
      const auto& st = plan.settings[s];
      const auto& grp = observable.groups[static_cast<std::size_t>(st.group)];
      const std::vector<double> p = averaged_probabilities(states, grp.basis, options.noise);
      if (options.analytic) {
        out[s] = quasi_from_probabilities(p, basis.n_qubits);
      } else if (plan.shots[s] > 0) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(st.i), static_cast<std::uint64_t>(st.j),
                                   static_cast<std::uint64_t>(st.phase), static_cast<std::uint64_t>(st.group),
                                   0x73686f74ULL}));
        out[s] = sample_from_probabilities(p, basis.n_qubits, plan.shots[s], rng);
      }
    }
  }
  return out;
}

SampledBuild build_m_sampled(const AnsatzCircuit& ansatz, const GroupedObservable& observable,
                             const EomBasis& basis, const ShotPlan& plan, const SampledBuildOptions& options,
                             std::uint64_t seed, const SettingCounts* pilot, double shift) {
  SettingCounts counts = measure_settings(ansatz, observable, basis, plan, options, seed);
  SampledBuild out;
  const std::size_t n = basis.size();
  out.matrix = EomMatrix::zeros(n, shift);

  if (pilot) {
    for (const auto& [s, h] : *pilot) {
      if (s >= plan.settings.size()) throw std::invalid_argument("pilot setting outside the plan");
      if (h.quasi) throw std::invalid_argument("pilot counts must be raw");
      auto& dst = counts[s];
      if (dst.values.empty() && dst.shots == 0) {
        dst = h;
        continue;
      }
      for (const auto& [b, c] : h.values) dst.values[b] += c;
      dst.shots += h.shots;
    }
  }

  struct StateEstimate {
    double value = 0.0;
    double variance = 0.0;
    std::uint64_t shots = 0;
    std::size_t groups = 0;
    bool flagged = false;
  };
  std::map<StateKey, StateEstimate> est;
  double retained_sum = 0.0;
  std::size_t retained_n = 0;
  MitigationConfig no_post = options.mitigation;
  no_post.postselect = false;

  for (std::size_t s = 0; s < plan.settings.size(); ++s) {
    const auto& st = plan.settings[s];
    auto& e = est[{st.i, st.j, st.phase}];
    auto it = counts.find(s);
    if (it == counts.end() || it->second.total() == 0.0)
      throw std::invalid_argument("plan/basis mismatch: setting " + std::to_string(s) + " has no shots");
    const auto& grp = observable.groups[static_cast<std::size_t>(st.group)];
    CountsHistogram mitigated;
    double retained = 1.0;
    try {
      mitigated = mitigation_stack(it->second, options.mitigation, grp.z_diagonal(), &retained);
    } catch (const EmptySectorError&) {
      e.flagged = true;
      retained = 0.0;
      mitigated = mitigation_stack(it->second, no_post, grp.z_diagonal());
    }
    if (options.mitigation.postselect && grp.z_diagonal()) {
      retained_sum += retained;
      ++retained_n;
    }
    e.value += grp.estimate(mitigated);
    const std::uint64_t shots = options.analytic ? 0 : it->second.shots;
    if (shots > 0) e.variance += grp.outcome_variance(mitigated) / static_cast<double>(shots);
    e.shots += shots;
    ++e.groups;
    ++out.ledger.circuits_executed;
  }
  out.ledger.shots_consumed = plan.total();
  out.mean_retained_fraction = retained_n ? retained_sum / static_cast<double>(retained_n) : 1.0;

  for (auto& [key, e] : est) {
    if (e.groups != observable.groups.size())
      throw std::invalid_argument("plan/basis mismatch: state missing measurement groups");
    e.value += observable.offset;
  }
  auto get = [&](int i, int j, int phase) -> const StateEstimate& {
    auto it = est.find({i, j, phase});
    if (it == est.end()) throw std::invalid_argument("plan/basis mismatch: element not covered");
    return it->second;
  };

  auto& m = out.matrix;
  std::set<std::pair<int, int>> elements;
  for (const auto& [key, e] : est) elements.insert({std::get<0>(key), std::get<1>(key)});
  for (const auto& [i, j] : elements) {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    if (i == j) {
      const auto& d = get(i, i, 0);
      m.values(a, a) = d.value - shift;
      m.shots(a, a) = d.shots;
      m.standard_error(a, a) = std::sqrt(d.variance);
      m.evaluated(a, a) = true;
      if (d.flagged) m.flagged.emplace_back(i, i);
      continue;
    }
    const auto& di = get(i, i, 0);
    const auto& dj = get(j, j, 0);
    const auto& sp = get(i, j, 1);
    const auto& si = get(i, j, 2);
    const double mean_diag = 0.5 * (di.value + dj.value);
    const double re = sp.value - mean_diag;
    const double im = mean_diag - si.value;
    const double se = std::sqrt(sp.variance + 0.25 * (di.variance + dj.variance));
    m.values(a, b) = m.values(b, a) = re;
    m.imaginary(a, b) = im;
    m.imaginary(b, a) = -im;
    m.shots(a, b) = m.shots(b, a) = sp.shots + si.shots;
    m.standard_error(a, b) = m.standard_error(b, a) = se;
    m.evaluated(a, b) = m.evaluated(b, a) = true;
    if (sp.flagged || si.flagged) m.flagged.emplace_back(i, j);
  }
  out.ledger.elements_evaluated = elements.size();
  m.finalize();
  return out;
}

AllocationMode parse_allocation_mode(const std::string& name) {
  if (name == "uniform") return AllocationMode::uniform;
  if (name == "adaptive") return AllocationMode::adaptive;
  throw std::invalid_argument("unknown allocation mode '" + name + "'");
}

std::string to_string(AllocationMode m) { return m == AllocationMode::uniform ? "uniform" : "adaptive"; }

SampledBuild build_m_budgeted(const AnsatzCircuit& ansatz, const GroupedObservable& observable,
                              const EomBasis& basis, const BudgetedBuildOptions& budget,
                              const SampledBuildOptions& options, std::uint64_t seed) {
  const auto settings = enumerate_settings(basis.size(), observable.groups.size());
  if (budget.allocation == AllocationMode::uniform) {
    const ShotPlan plan = allocate_shots_uniform(settings, budget.budget, budget.floor);
    return build_m_sampled(ansatz, observable, basis, plan, options, derive_seed(seed, {2}));
  }
  const std::uint64_t n_settings = settings.size();
  const auto frac_share =
      static_cast<std::uint64_t>(std::floor(budget.pilot_fraction * static_cast<double>(budget.budget))) / n_settings;
  const std::uint64_t per_setting = std::max(budget.pilot_floor, frac_share);
  const std::uint64_t pilot_cost = per_setting * n_settings;
  if (pilot_cost + budget.floor * n_settings > budget.budget)
    throw std::invalid_argument("budget too small for the pilot pass and floor");
  ShotPlan pilot_plan;
  pilot_plan.settings = settings;
  pilot_plan.shots.assign(settings.size(), per_setting);
  pilot_plan.budget = pilot_cost;
  SampledBuildOptions pilot_opt = options;
  pilot_opt.analytic = false;
  const SettingCounts pilot = measure_settings(ansatz, observable, basis, pilot_plan, pilot_opt, derive_seed(seed, {1}));
  std::vector<double> v(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const auto& grp = observable.groups[static_cast<std::size_t>(settings[s].group)];
    v[s] = variance_proxy(grp.coefficients, grp.member_expectations(pilot.at(s)));
  }
  const ShotPlan plan = allocate_shots_from_variances(settings, v, budget.budget - pilot_cost, budget.floor);
  SampledBuild out = build_m_sampled(ansatz, observable, basis, plan, options, derive_seed(seed, {2}), &pilot);
  out.ledger.shots_consumed += pilot_cost;
  out.ledger.circuits_executed += n_settings;
  return out;
}

// ---------------------------------------------------------------- BRG build

SampledBuild build_m_brg(const std::vector<Statevector>& states, const BrgFactorization& f,
                         std::uint64_t shots_per_group, const NoiseModel& noise, std::uint64_t seed, double shift) {
  if (states.empty()) throw std::invalid_argument("empty basis");
  const int nq = states.front().n_qubits();
  if (nq != 2 * f.n_spatial) throw std::invalid_argument("state width does not match factorization");
  noise.validate();
  const std::size_t n = states.size();
  const auto k = static_cast<Eigen::Index>(n);
  const int groups = brg_group_count(f);
  auto diag = brg_group_diagonals(f);
  SampledBuild out;
  out.matrix = EomMatrix::zeros(n, shift);
  Eigen::MatrixXd energy_pair = Eigen::MatrixXd::Zero(k, k);  // E(I,J) per superposition, E(I,I) diagonal
  Eigen::MatrixXd var_pair = Eigen::MatrixXd::Zero(k, k);
  const auto dim = static_cast<Eigen::Index>(states.front().dim());
  for (int g = 0; g < groups; ++g) {
    auto& d = diag[static_cast<std::size_t>(g)];
    const Eigen::MatrixXd frame = brg_group_frame(f, g);
    Eigen::MatrixXcd rotated(dim, k);
    for (std::size_t i = 0; i < n; ++i) {
      Statevector s = states[i];
      apply_orbital_rotation(s, frame);
      rotated.col(static_cast<Eigen::Index>(i)) = s.amplitudes();
    }
    if (shots_per_group == 0) {
      // Readout flips act linearly on probabilities and the channel is
      // symmetric, so they fold into the diagonal observable.
      if (noise.has_readout_noise()) apply_readout_channel(d, nq, noise);
      const Eigen::Map<const Eigen::VectorXd> dv(d.data(), dim);
      const Eigen::MatrixXcd weighted = dv.asDiagonal() * rotated;
      const Eigen::MatrixXd bil = (rotated.adjoint() * weighted).real();
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j)
          energy_pair(i, j) += i == j ? bil(i, i) : 0.5 * (bil(i, i) + bil(j, j)) + bil(i, j);
      continue;
    }
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i; j < k; ++j) {
        Eigen::VectorXcd amp = rotated.col(i);
        if (j != i) amp = (amp + rotated.col(j)) / std::sqrt(2.0);
        std::vector<double> probs(static_cast<std::size_t>(dim));
        for (Eigen::Index b = 0; b < dim; ++b) probs[static_cast<std::size_t>(b)] = std::norm(amp[b]);
        apply_readout_channel(probs, nq, noise);
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j),
                                   static_cast<std::uint64_t>(g)}));
        const auto counts = sample_from_probabilities(probs, nq, shots_per_group, rng);
        double m1 = 0.0, m2 = 0.0;
        for (const auto& [bits, c] : counts.values) {
          const double v = d[bits];
          m1 += c * v;
          m2 += c * v * v;
        }
        const double total = counts.total();
        m1 /= total;
        m2 /= total;
        energy_pair(i, j) += m1;
        var_pair(i, j) += std::max(0.0, m2 - m1 * m1) / static_cast<double>(shots_per_group);
      }
  }
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j) {
      double v = 0.0, var = 0.0;
      if (i == j) {
        v = energy_pair(i, i) + f.core_energy - shift;
        var = var_pair(i, i);
      } else {
        v = energy_pair(i, j) - 0.5 * (energy_pair(i, i) + energy_pair(j, j));
        var = var_pair(i, j) + 0.25 * (var_pair(i, i) + var_pair(j, j));
      }
      out.matrix.values(i, j) = out.matrix.values(j, i) = v;
      out.matrix.standard_error(i, j) = out.matrix.standard_error(j, i) = std::sqrt(var);
      const std::uint64_t s = shots_per_group * static_cast<std::uint64_t>(groups);
      out.matrix.shots(i, j) = out.matrix.shots(j, i) = s;
      out.matrix.evaluated(i, j) = out.matrix.evaluated(j, i) = true;
    }
  out.matrix.finalize();
  const std::uint64_t elements = n * (n + 1) / 2;
  out.ledger.elements_evaluated = elements;
  out.ledger.circuits_executed = elements * static_cast<std::uint64_t>(groups);
  out.ledger.shots_consumed = out.ledger.circuits_executed * shots_per_group;
  return out;
}

// ---------------------------------------------------------------- solvers

namespace {

std::vector<bool> degeneracy_flags(const std::vector<double>& e, double tol) {
  std::vector<bool> flags(e.size(), false);
  for (std::size_t r = 0; r + 1 < e.size(); ++r)
    if (std::abs(e[r + 1] - e[r]) < tol) flags[r] = flags[r + 1] = true;
  return flags;
}

}  // namespace

EomSolution diagonalize(const EomMatrix& m, double degeneracy_tol) {
  if (!m.finalized) throw std::invalid_argument("EOM matrix must be finalized before diagonalization");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.values);
  EomSolution sol;
  sol.eigenvectors = es.eigenvectors();
  for (Eigen::Index r = 0; r < es.eigenvalues().size(); ++r) sol.total_energies.push_back(es.eigenvalues()[r] + m.shift);
  for (double e : sol.total_energies) sol.excitation_energies.push_back(e - sol.total_energies.front());
  sol.degenerate = degeneracy_flags(sol.total_energies, degeneracy_tol);
  return sol;
}

namespace {

class LazySymmetric {
 public:
  LazySymmetric(const std::function<double(int, int)>& f, const Eigen::VectorXd& diag)
      : f_(f), diag_(diag), n_(diag.size()), cols_(static_cast<std::size_t>(n_)) {}

  double get(Eigen::Index i, Eigen::Index j) {
    if (i == j) return diag_[i];
    const auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const double v = f_(static_cast<int>(key.first), static_cast<int>(key.second));
    cache_.emplace(key, v);
    return v;
  }

  const Eigen::VectorXd& column(Eigen::Index j) {
    auto& c = cols_[static_cast<std::size_t>(j)];
    if (!c) {
      Eigen::VectorXd v(n_);
      for (Eigen::Index i = 0; i < n_; ++i) v[i] = get(i, j);
      c = std::move(v);
    }
    return *c;
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index j = 0; j < n_; ++j)
      if (x[j] != 0.0) y += x[j] * column(j);
    return y;
  }

  std::uint64_t distinct() const { return cache_.size() + static_cast<std::uint64_t>(n_); }

 private:
  const std::function<double(int, int)>& f_;
  const Eigen::VectorXd& diag_;
  Eigen::Index n_;
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> cache_;
  std::vector<std::optional<Eigen::VectorXd>> cols_;
};

// Orthogonalizes t against the columns of v (modified Gram-Schmidt, repeated
// once when the norm collapses below 0.7 of its input); returns the final norm.
double orthogonalize(Eigen::VectorXd& t, const Eigen::MatrixXd& v, Eigen::Index cols) {
  for (int pass = 0; pass < 2; ++pass) {
    const double before = t.norm();
    for (Eigen::Index c = 0; c < cols; ++c) t -= v.col(c).dot(t) * v.col(c);
    const double after = t.norm();
    if (after >= 0.7 * before) return after;
  }
  return t.norm();
}

}  // namespace

DavidsonResult davidson_solve(const std::function<double(int, int)>& element, const Eigen::VectorXd& diag,
                              const DavidsonOptions& opt, double shift) {
  const Eigen::Index n = diag.size();
  if (opt.k < 1 || opt.k > n) throw std::invalid_argument("Davidson needs 1 <= k <= matrix size");
  if (opt.max_subspace < 2 * opt.k && opt.max_subspace < n)
    throw std::invalid_argument("Davidson max_subspace must be at least 2k");
  const Eigen::Index k = opt.k;
  const Eigen::Index cap = std::min<Eigen::Index>(std::max(opt.max_subspace, opt.k), n);
  LazySymmetric m(element, diag);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return diag[a] < diag[b]; });

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, cap);
  Eigen::MatrixXd av = Eigen::MatrixXd::Zero(n, cap);
  Eigen::Index cols = 0;
  for (Eigen::Index r = 0; r < k; ++r) {
    v(order[static_cast<std::size_t>(r)], cols) = 1.0;
    av.col(cols) = m.column(order[static_cast<std::size_t>(r)]);
    ++cols;
  }

  DavidsonResult res;
  Eigen::VectorXd theta(k);
  Eigen::MatrixXd x(n, k), resid(n, k);
  bool converged = false;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    res.iterations = iter + 1;
    const Eigen::MatrixXd hs = v.leftCols(cols).transpose() * av.leftCols(cols);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((hs + hs.transpose()) * 0.5);
    const Eigen::MatrixXd y = es.eigenvectors().leftCols(k);
    theta = es.eigenvalues().head(k);
    x = v.leftCols(cols) * y;
    resid = av.leftCols(cols) * y - x * theta.asDiagonal();
    res.residual_norms.assign(static_cast<std::size_t>(k), 0.0);
    std::vector<Eigen::Index> open;
    for (Eigen::Index r = 0; r < k; ++r) {
      res.residual_norms[static_cast<std::size_t>(r)] = resid.col(r).norm();
      if (!(resid.col(r).norm() < opt.tol)) open.push_back(r);
    }
    if (open.empty()) {
      converged = true;
      break;
    }
    if (cols + static_cast<Eigen::Index>(open.size()) > cap) {
      // restart on the current Ritz vectors (converged ones stay locked in)
      const Eigen::MatrixXd new_av = av.leftCols(cols) * y;
      v.setZero();
      av.setZero();
      v.leftCols(k) = x;
      av.leftCols(k) = new_av;
      cols = k;
    }
    Eigen::Index added = 0;
    for (Eigen::Index r : open) {
      if (cols >= cap) break;
      Eigen::VectorXd t(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        double den = diag[i] - theta[r];
        if (std::abs(den) < 1e-8) den = den < 0.0 ? -1e-8 : 1e-8;
        t[i] = resid(i, r) / den;
      }
      const double tmax = t.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(t[i]) < opt.support_tol * tmax) t[i] = 0.0;
      const double before = t.norm();
      if (before == 0.0) continue;
      const double after = orthogonalize(t, v, cols);
      if (after < 1e-10 * before) continue;
      t /= after;
      for (Eigen::Index i = 0; i < n; ++i)
        if (t[i] != 0.0 && std::abs(t[i]) < 1e-15) t[i] = 0.0;
      v.col(cols) = t;
      av.col(cols) = m.multiply(t);
      ++cols;
      ++added;
    }
    if (added == 0) break;  // stagnated: no new direction survived
  }

  EomSolution& sol = res.solution;
  sol.converged = converged;
  sol.eigenvectors = x;
  for (Eigen::Index r = 0; r < k; ++r) sol.total_energies.push_back(theta[r] + shift);
  for (double e : sol.total_energies) sol.excitation_energies.push_back(e - sol.total_energies.front());
  sol.degenerate = degeneracy_flags(sol.total_energies, opt.tol);
  res.ledger.elements_evaluated = m.distinct();
  return res;
}

namespace {

std::uint32_t generator_symmetry_label(const FermionGenerator& g, const std::vector<std::uint64_t>& gradings) {
  std::uint32_t label = 0;
  for (std::size_t k = 0; k < gradings.size(); ++k) {
    int parity = 0;
    for (const auto* modes : {&g.occupied, &g.virtual_})
      for (int m : *modes) parity ^= static_cast<int>((gradings[k] >> (m / 2)) & 1U);
    label |= static_cast<std::uint32_t>(parity) << k;
  }
  return label;
}

}  // namespace

std::vector<std::uint32_t> basis_symmetry_labels(const EomBasis& basis, const std::vector<std::uint64_t>& gradings) {
  if (gradings.size() > 32) throw std::invalid_argument("at most 32 gradings are supported");
  std::vector<std::uint32_t> labels(basis.size(), 0);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (!basis.entries[j]) continue;
    labels[j] = generator_symmetry_label(*basis.entries[j], gradings);
  }
  return labels;
}

bool preserves_symmetries(const AnsatzCircuit& circuit, const std::vector<std::uint64_t>& gradings) {
  for (const auto& gate : circuit.gates()) {
    if (const auto* e = std::get_if<ExcitationGate>(&gate)) {
      if (generator_symmetry_label(e->generator, gradings) != 0) return false;
    } else if (!std::holds_alternative<JastrowGate>(gate)) {
      return false;
    }
  }
  return true;
}

DavidsonResult davidson_solve_blocked(const std::function<double(int, int)>& element, const Eigen::VectorXd& diag,
                                      const std::vector<std::uint32_t>& labels, const DavidsonOptions& opt,
                                      double shift) {
  const Eigen::Index n = diag.size();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw std::invalid_argument("one label per basis entry required");
  if (opt.k < 1 || opt.k > n) throw std::invalid_argument("Davidson needs 1 <= k <= matrix size");
  std::map<std::uint32_t, std::vector<int>> blocks;
  for (Eigen::Index i = 0; i < n; ++i) blocks[labels[static_cast<std::size_t>(i)]].push_back(static_cast<int>(i));

  struct Root {
    double energy;
    double residual;
    Eigen::VectorXd vector;
  };
  std::vector<Root> roots;
  DavidsonResult res;
  bool converged = true;
  for (const auto& [label, idx] : blocks) {
    const auto b = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd sub_diag(b);
    for (Eigen::Index i = 0; i < b; ++i) sub_diag[i] = diag[idx[static_cast<std::size_t>(i)]];
    DavidsonOptions sub = opt;
    sub.k = static_cast<int>(std::min<Eigen::Index>(opt.k, b));
    sub.max_subspace = std::max(opt.max_subspace, 2 * sub.k);
    const auto r = davidson_solve(
        [&](int i, int j) { return element(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]); },
        sub_diag, sub, 0.0);
    converged = converged && r.solution.converged;
    res.ledger += r.ledger;
    res.iterations += r.iterations;
    for (int c = 0; c < sub.k; ++c) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < b; ++i) v[idx[static_cast<std::size_t>(i)]] = r.solution.eigenvectors(i, c);
      roots.push_back({r.solution.total_energies[static_cast<std::size_t>(c)], r.residual_norms[static_cast<std::size_t>(c)],
                       std::move(v)});
    }
  }
  std::stable_sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.energy < b.energy; });
  EomSolution& sol = res.solution;
  sol.converged = converged;
  sol.eigenvectors = Eigen::MatrixXd(n, opt.k);
  for (int c = 0; c < opt.k; ++c) {
    const auto& root = roots[static_cast<std::size_t>(c)];
    sol.eigenvectors.col(c) = root.vector;
    sol.total_energies.push_back(root.energy + shift);
    res.residual_norms.push_back(root.residual);
  }
  for (double e : sol.total_energies) sol.excitation_energies.push_back(e - sol.total_energies.front());
  sol.degenerate = degeneracy_flags(sol.total_energies, opt.tol);
  return res;
}

// ---------------------------------------------------------------- scaling

ScalingMode parse_scaling_mode(const std::string& name) {
  if (name == "brute") return ScalingMode::brute;
  if (name == "davidson") return ScalingMode::davidson;
  if (name == "davidson+brg" || name == "davidson_brg") return ScalingMode::davidson_brg;
  throw std::invalid_argument("unknown scaling mode '" + name + "'");
}

std::string to_string(ScalingMode m) {
  switch (m) {
    case ScalingMode::brute: return "brute";
    case ScalingMode::davidson: return "davidson";
    case ScalingMode::davidson_brg: return "davidson+brg";
  }
  return "brute";
}

CostLedger element_cost(std::uint64_t n_diagonal, std::uint64_t n_off_diagonal, std::uint64_t groups_per_state,
                        std::uint64_t shots_per_setting) {
  CostLedger l;
  l.elements_evaluated = n_diagonal + n_off_diagonal;
  l.circuits_executed = groups_per_state * (n_diagonal + 2 * n_off_diagonal);
  l.shots_consumed = l.circuits_executed * shots_per_setting;
  return l;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs matching samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("slope needs distinct x values");
  return sxy / sxx;
}

ScalingReport scaling_report(ScalingMode mode, std::vector<ScalingRow> rows) {
  if (rows.size() < 3) throw std::invalid_argument("scaling report needs at least three system sizes");
  ScalingReport rep;
  rep.mode = mode;
  std::sort(rows.begin(), rows.end(), [](const ScalingRow& a, const ScalingRow& b) { return a.n_orbitals < b.n_orbitals; });
  std::vector<double> x, e, c, s;
  for (const auto& r : rows) {
    x.push_back(r.n_orbitals);
    e.push_back(static_cast<double>(std::max<std::uint64_t>(1, r.ledger.elements_evaluated)));
    c.push_back(static_cast<double>(std::max<std::uint64_t>(1, r.ledger.circuits_executed)));
    s.push_back(static_cast<double>(std::max<std::uint64_t>(1, r.ledger.shots_consumed)));
  }
  rep.slope_elements = loglog_slope(x, e);
  rep.slope_circuits = loglog_slope(x, c);
  rep.slope_shots = loglog_slope(x, s);
  rep.rows = std::move(rows);
  return rep;
}

void write_scaling_csv(std::ostream& out, const ScalingReport& rep) {
  out << "mode,system,n_orbitals,n_basis,elements_evaluated,circuits_executed,shots_consumed\n";
  for (const auto& r : rep.rows)
    out << to_string(rep.mode) << "," << r.system << "," << r.n_orbitals << "," << r.n_basis << ","
        << r.ledger.elements_evaluated << "," << r.ledger.circuits_executed << "," << r.ledger.shots_consumed << "\n";
  out << std::setprecision(6) << "# slope_elements=" << rep.slope_elements << " slope_circuits=" << rep.slope_circuits
      << " slope_shots=" << rep.slope_shots << "\n";
}

}  // namespace qsceom
