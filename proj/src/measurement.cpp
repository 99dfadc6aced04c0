#include "qsceom/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace qsceom {

namespace {

double parity_sign(std::uint64_t bits, std::uint64_t mask) {
  return (std::popcount(bits & mask) & 1) ? -1.0 : 1.0;
}

}  // namespace

double MeasurementGroup::outcome_value(std::uint64_t bits) const {
  double v = 0.0;
  for (std::size_t l = 0; l < members.size(); ++l) v += coefficients[l] * parity_sign(bits, members[l].support());
  return v;
}

double MeasurementGroup::estimate(const CountsHistogram& counts) const {
  const double total = counts.total();
  if (total == 0.0) throw std::invalid_argument("empty histogram");
  double s = 0.0;
  for (const auto& [bits, w] : counts.values) s += w * outcome_value(bits);
  return s / total;
}

std::vector<double> MeasurementGroup::member_expectations(const CountsHistogram& counts) const {
  const double total = counts.total();
  if (total == 0.0) throw std::invalid_argument("empty histogram");
  std::vector<double> out(members.size(), 0.0);
  for (const auto& [bits, w] : counts.values)
    for (std::size_t l = 0; l < members.size(); ++l) out[l] += w * parity_sign(bits, members[l].support());
  for (double& v : out) v /= total;
  return out;
}

double MeasurementGroup::outcome_variance(const CountsHistogram& counts) const {
  const double total = counts.total();
  if (total == 0.0) return 0.0;
  double m1 = 0.0, m2 = 0.0;
  for (const auto& [bits, w] : counts.values) {
    const double v = outcome_value(bits);
    m1 += w * v;
    m2 += w * v * v;
  }
  m1 /= total;
  m2 /= total;
  return std::max(0.0, m2 - m1 * m1);
}

bool MeasurementGroup::z_diagonal() const {
  return std::all_of(basis.begin(), basis.end(), [](char c) { return c == 'I' || c == 'Z'; });
}

GroupedObservable group_pauli_terms(const PauliSum& observable) {
  if (!observable.is_hermitian()) throw std::invalid_argument("grouping needs a Hermitian observable");
  GroupedObservable out;
  out.n_qubits = observable.n_qubits();
  for (const auto& [p, c] : observable.terms()) {
    if (p.is_identity()) {
      out.offset += c.real();
      continue;
    }
    bool placed = false;
    for (auto& g : out.groups) {
      bool ok = true;
      for (int q = 0; q < out.n_qubits && ok; ++q) {
        const char a = p.axis(q);
        ok = a == 'I' || g.basis[static_cast<std::size_t>(q)] == 'I' || g.basis[static_cast<std::size_t>(q)] == a;
      }
      if (!ok) continue;
      for (int q = 0; q < out.n_qubits; ++q)
        if (p.axis(q) != 'I') g.basis[static_cast<std::size_t>(q)] = p.axis(q);
      g.members.push_back(p);
      g.coefficients.push_back(c.real());
      placed = true;
      break;
    }
    if (!placed) {
      MeasurementGroup g;
      g.basis.assign(static_cast<std::size_t>(out.n_qubits), 'I');
      for (int q = 0; q < out.n_qubits; ++q) g.basis[static_cast<std::size_t>(q)] = p.axis(q);
      g.members.push_back(p);
      g.coefficients.push_back(c.real());
      out.groups.push_back(std::move(g));
    }
  }
  return out;
}

void write_group_report(std::ostream& out, const GroupedObservable& grouped) {
  out << "group_id,basis_pattern,member_count\n";
  for (std::size_t i = 0; i < grouped.groups.size(); ++i) {
    const auto& g = grouped.groups[i];
    out << i << "," << std::string(g.basis.rbegin(), g.basis.rend()) << "," << g.members.size() << "\n";
  }
}

std::vector<double> BrgFactorization::reconstruct_eri() const {
  const int n = n_spatial;
  std::vector<double> g(static_cast<std::size_t>(n) * n * n * n, 0.0);
  for (const auto& r : ranks)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            g[((static_cast<std::size_t>(i) * n + j) * n + k) * n + l] += r.weight * r.l(i, j) * r.l(k, l);
  return g;
}

BrgCutoff parse_brg_cutoff(const std::string& name) {
  if (name == "factor_norm") return BrgCutoff::factor_norm;
  if (name == "weight") return BrgCutoff::weight;
  throw std::invalid_argument("unknown BRG cutoff '" + name + "' (factor_norm | weight)");
}

std::string to_string(BrgCutoff c) { return c == BrgCutoff::factor_norm ? "factor_norm" : "weight"; }

BrgFactorization brg_factorize(const MolecularIntegrals& ints, double tolerance, BrgCutoff cutoff_kind) {
  if (tolerance < 0.0) throw std::invalid_argument("BRG tolerance must be >= 0");
  const int n = ints.n_spatial;
  const int np = n * (n + 1) / 2;
  // composite matrix restricted to symmetric pairs; off-diagonal pairs carry sqrt(2)
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
  Eigen::MatrixXd g(np, np);
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b) {
      const auto [i, j] = pairs[static_cast<std::size_t>(a)];
      const auto [k, l] = pairs[static_cast<std::size_t>(b)];
      const double ca = i == j ? 1.0 : std::sqrt(2.0), cb = k == l ? 1.0 : std::sqrt(2.0);
      g(a, b) = ca * cb * ints.eri(i, j, k, l);
    }
  double asym = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          asym = std::max(asym, std::abs(ints.eri(i, j, k, l) - ints.eri(k, l, i, j)));
          asym = std::max(asym, std::abs(ints.eri(i, j, k, l) - ints.eri(j, i, k, l)));
        }
  if (asym > 1e-10) throw std::invalid_argument("two-electron tensor has a non-symmetric composite matrix");

  BrgFactorization f;
  f.n_spatial = n;
  f.core_energy = ints.core_energy;
  f.tolerance = tolerance;
  f.cutoff = cutoff_kind;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::VectorXd& w = es.eigenvalues();
  const double wmax = w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
  const double weight_cut = cutoff_kind == BrgCutoff::factor_norm ? tolerance * tolerance : tolerance;
  const double cutoff = std::max(weight_cut, np * np * std::numeric_limits<double>::epsilon() * wmax);
  // largest |w| first
  std::vector<int> order(static_cast<std::size_t>(np));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(w[a]) > std::abs(w[b]); });
  for (int idx : order) {
    if (!(std::abs(w[idx]) > cutoff)) continue;
    BrgRank r;
    r.weight = w[idx];
    r.l = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < np; ++a) {
      const auto [i, j] = pairs[static_cast<std::size_t>(a)];
      const double v = es.eigenvectors()(a, idx) / (i == j ? 1.0 : std::sqrt(2.0));
      r.l(i, j) = v;
      r.l(j, i) = v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ls(r.l);
    r.rotation = ls.eigenvectors();
    r.lambda = ls.eigenvalues();
    f.ranks.push_back(std::move(r));
  }

  f.one_body = ints.h;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += ints.eri(i, k, k, j);
      f.one_body(i, j) -= 0.5 * s;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hs(f.one_body);
  f.one_body_rotation = hs.eigenvectors();
  f.one_body_eigenvalues = hs.eigenvalues();
  return f;
}

int brg_group_count(const BrgFactorization& f) { return 1 + static_cast<int>(f.ranks.size()); }

std::vector<std::vector<double>> brg_group_diagonals(const BrgFactorization& f) {
  const int n = f.n_spatial;
  const std::size_t dim = std::size_t{1} << (2 * n);
  std::vector<std::vector<double>> out(f.ranks.size() + 1, std::vector<double>(dim, 0.0));
  std::vector<double> occ(static_cast<std::size_t>(n));
  for (std::size_t b = 0; b < dim; ++b) {
    for (int p = 0; p < n; ++p)
      occ[static_cast<std::size_t>(p)] = static_cast<double>(((b >> (2 * p)) & 1) + ((b >> (2 * p + 1)) & 1));
    double one = 0.0;
    for (int p = 0; p < n; ++p) one += f.one_body_eigenvalues[p] * occ[static_cast<std::size_t>(p)];
    out[0][b] = one;
    for (std::size_t r = 0; r < f.ranks.size(); ++r) {
      double s = 0.0;
      for (int p = 0; p < n; ++p) s += f.ranks[r].lambda[p] * occ[static_cast<std::size_t>(p)];
      out[r + 1][b] = 0.5 * f.ranks[r].weight * s * s;
    }
  }
  return out;
}

Eigen::MatrixXd brg_group_frame(const BrgFactorization& f, int group) {
  if (group < 0 || group > static_cast<int>(f.ranks.size())) throw std::out_of_range("BRG group index");
  if (group == 0) return f.one_body_rotation.transpose();
  return f.ranks[static_cast<std::size_t>(group - 1)].rotation.transpose();
}

BrgEstimate brg_estimate_energy(const Statevector& state, const BrgFactorization& f, std::uint64_t shots_per_group,
                                const NoiseModel& noise, std::uint64_t seed) {
  if (state.n_qubits() != 2 * f.n_spatial) throw std::invalid_argument("state width does not match factorization");
  const auto diag = brg_group_diagonals(f);
  const std::vector<char> axes(static_cast<std::size_t>(state.n_qubits()), 'Z');
  BrgEstimate est;
  est.energy = f.core_energy;
  for (int g = 0; g < brg_group_count(f); ++g) {
    Statevector rotated = state;
    apply_orbital_rotation(rotated, brg_group_frame(f, g));
    const CountsHistogram counts =
        shots_per_group == 0
            ? exact_distribution(rotated, axes, noise)
            : sample_counts(rotated, axes, shots_per_group, noise, derive_seed(seed, {static_cast<std::uint64_t>(g)}));
    double v = 0.0;
    for (const auto& [bits, w] : counts.values) v += w * diag[static_cast<std::size_t>(g)][bits];
    v /= counts.total();
    est.group_values.push_back(v);
    est.energy += v;
  }
  return est;
}

void write_brg_sweep(std::ostream& out, const std::vector<BrgSweepRow>& rows) {
  out << "system,tolerance,group_count\n";
  for (const auto& r : rows) out << r.system << "," << std::setprecision(6) << r.tolerance << "," << r.group_count << "\n";
}

std::uint64_t ShotPlan::total() const { return std::accumulate(shots.begin(), shots.end(), std::uint64_t{0}); }

void ShotPlan::validate() const {
  if (shots.size() != settings.size()) throw std::invalid_argument("shot plan size mismatch");
  if (total() != budget) throw std::invalid_argument("shot plan does not sum to its budget");
  for (auto s : shots)
    if (s < floor) throw std::invalid_argument("shot plan entry below floor");
}

ShotPlan allocate_shots_uniform(const std::vector<MeasurementSetting>& settings, std::uint64_t budget,
                                std::uint64_t floor) {
  if (settings.empty()) throw std::invalid_argument("no settings to allocate");
  const std::uint64_t n = settings.size();
  if (budget < floor * n) throw std::invalid_argument("budget cannot honour the per-setting floor");
  ShotPlan plan;
  plan.settings = settings;
  plan.budget = budget;
  plan.floor = floor;
  plan.shots.assign(settings.size(), budget / n);
  for (std::uint64_t i = 0; i < budget % n; ++i) ++plan.shots[i];
  return plan;
}

double variance_proxy(std::span<const double> coefficients, std::span<const double> expectations) {
  if (coefficients.size() != expectations.size()) throw std::invalid_argument("coefficient/expectation mismatch");
  double v = 0.0;
  for (std::size_t l = 0; l < coefficients.size(); ++l) {
    const double e = std::clamp(expectations[l], -1.0, 1.0);
    v += coefficients[l] * coefficients[l] * (1.0 - e * e);
  }
  return v;
}

ShotPlan allocate_shots_from_variances(const std::vector<MeasurementSetting>& settings,
                                       std::span<const double> variances, std::uint64_t shots,
                                       std::uint64_t floor) {
  if (variances.size() != settings.size()) throw std::invalid_argument("variance count mismatch");
  if (settings.empty()) throw std::invalid_argument("no settings to allocate");
  const std::uint64_t n = settings.size();
  if (shots < floor * n) throw std::invalid_argument("budget cannot honour the per-setting floor");
  std::vector<double> weight(settings.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    if (variances[s] < 0.0 || !std::isfinite(variances[s])) throw std::invalid_argument("invalid variance proxy");
    weight[s] = std::sqrt(variances[s]);
    sum += weight[s];
  }
  if (sum == 0.0) return allocate_shots_uniform(settings, shots, floor);
  ShotPlan plan;
  plan.settings = settings;
  plan.budget = shots;
  plan.floor = floor;
  plan.shots.assign(settings.size(), floor);
  const std::uint64_t free = shots - floor * n;
  std::vector<double> frac(settings.size());
  std::uint64_t assigned = 0;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const double ideal = static_cast<double>(free) * weight[s] / sum;
    const auto base = static_cast<std::uint64_t>(std::floor(ideal));
    plan.shots[s] += base;
    assigned += base;
    frac[s] = ideal - static_cast<double>(base);
  }
  // floating-point slack can leave assigned a hair above free
  while (assigned > free) {
    auto it = std::max_element(plan.shots.begin(), plan.shots.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(settings.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::uint64_t k = 0; k < free - assigned; ++k) ++plan.shots[order[k % order.size()]];
  return plan;
}

ShotPlan allocate_shots_adaptive(const std::vector<MeasurementSetting>& settings,
                                 const std::vector<std::vector<double>>& pilot_expectations,
                                 const std::vector<std::vector<double>>& coefficients, std::uint64_t budget,
                                 std::uint64_t pilot_cost, std::uint64_t floor) {
  if (pilot_cost > budget) throw std::invalid_argument("pilot cost exceeds budget");
  if (pilot_expectations.size() != settings.size() || coefficients.size() != settings.size())
    throw std::invalid_argument("pilot data does not match settings");
  std::vector<double> v(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) v[s] = variance_proxy(coefficients[s], pilot_expectations[s]);
  return allocate_shots_from_variances(settings, v, budget - pilot_cost, floor);
}

std::uint64_t budget_accounting(std::uint64_t groups_per_element, std::uint64_t shots_per_unit,
                                std::uint64_t n_elements) {
  return groups_per_element * shots_per_unit * n_elements;
}

void write_shot_plan(std::ostream& out, const ShotPlan& plan) {
  out << "setting_id,i,j,phase,group,shots\n";
  for (std::size_t s = 0; s < plan.settings.size(); ++s) {
    const auto& st = plan.settings[s];
    out << s << "," << st.i << "," << st.j << "," << st.phase << "," << st.group << "," << plan.shots[s] << "\n";
  }
}

}  // namespace qsceom
