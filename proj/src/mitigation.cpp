#include "qsceom/mitigation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include <Eigen/Dense>

namespace qsceom {

AssignmentModel AssignmentModel::from_noise(const NoiseModel& noise, int n_qubits) {
  AssignmentModel m;
  for (int q = 0; q < n_qubits; ++q) m.eps.push_back(noise.readout(q));
  return m;
}

bool AssignmentModel::is_identity() const {
  return std::all_of(eps.begin(), eps.end(), [](double e) { return e == 0.0; });
}

namespace {

// y = (tensor_q A_q) x on the full 2^n space.
void apply_assignment(std::vector<double>& v, const std::vector<double>& eps, bool inverse) {
  for (std::size_t q = 0; q < eps.size(); ++q) {
    const double e = eps[q];
    if (e == 0.0) continue;
    double a = 1.0 - e, b = e;
    if (inverse) {
      const double det = 1.0 - 2.0 * e;
      a = (1.0 - e) / det;
      b = -e / det;
    }
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i & bit) continue;
      const double x0 = v[i], x1 = v[i | bit];
      v[i] = a * x0 + b * x1;
      v[i | bit] = b * x0 + a * x1;
    }
  }
}

double assignment_element(std::uint64_t to, std::uint64_t from, const std::vector<double>& eps) {
  double v = 1.0;
  for (std::size_t q = 0; q < eps.size(); ++q) v *= ((to ^ from) >> q) & 1U ? eps[q] : 1.0 - eps[q];
  return v;
}

// Matrix-free BiCGSTAB for A_S x = b using full-space tensor products.
Eigen::VectorXd solve_iterative(const std::vector<std::uint64_t>& subset, const Eigen::VectorXd& rhs,
                                const std::vector<double>& eps) {
  const std::size_t dim = std::size_t{1} << eps.size();
  auto matvec = [&](const Eigen::VectorXd& x) {
    std::vector<double> full(dim, 0.0);
    for (std::size_t k = 0; k < subset.size(); ++k) full[subset[k]] = x[static_cast<Eigen::Index>(k)];
    apply_assignment(full, eps, false);
    Eigen::VectorXd y(x.size());
    for (std::size_t k = 0; k < subset.size(); ++k) y[static_cast<Eigen::Index>(k)] = full[subset[k]];
    return y;
  };
  double diag = 1.0;
  for (double e : eps) diag *= 1.0 - e;
  Eigen::VectorXd x = rhs / diag;
  Eigen::VectorXd r = rhs - matvec(x);
  const Eigen::VectorXd r0 = r;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(x.size()), v = p;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const double bnorm = std::max(rhs.norm(), 1e-300);
  for (int it = 0; it < 500 && r.norm() > 1e-14 * bnorm; ++it) {
    const double rho_new = r0.dot(r);
    const double beta = (rho_new / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    const Eigen::VectorXd ph = p / diag;
    v = matvec(ph);
    alpha = rho_new / r0.dot(v);
    const Eigen::VectorXd s = r - alpha * v;
    const Eigen::VectorXd sh = s / diag;
    const Eigen::VectorXd t = matvec(sh);
    omega = t.dot(s) / t.dot(t);
    x += alpha * ph + omega * sh;
    r = s - omega * t;
    rho = rho_new;
  }
  return x;
}

}  // namespace

CountsHistogram m3_correct(const CountsHistogram& counts, const AssignmentModel& model) {
  const int n = counts.n_qubits;
  if (static_cast<int>(model.eps.size()) != n) throw std::invalid_argument("assignment model size mismatch");
  for (double e : model.eps) {
    if (e >= 0.5) throw SingularModelError("assignment matrix is singular for flip probability 0.5");
    if (e < 0.0) throw std::invalid_argument("negative flip probability");
  }
  const double total = counts.total();
  if (total == 0.0) throw std::invalid_argument("empty histogram");
  CountsHistogram out;
  out.n_qubits = n;
  out.quasi = true;
  out.shots = counts.shots;
  if (model.is_identity()) {
    for (const auto& [b, v] : counts.values) out.values.emplace(b, v / total);
    return out;
  }

  std::set<std::uint64_t> span_set;
  for (const auto& [b, v] : counts.values) {
    span_set.insert(b);
    for (int q = 0; q < n; ++q) span_set.insert(b ^ (std::uint64_t{1} << q));
  }
  const std::vector<std::uint64_t> subset(span_set.begin(), span_set.end());
  const std::size_t full_dim = std::size_t{1} << n;

  std::vector<double> solution;
  if (subset.size() == full_dim) {
    std::vector<double> full(full_dim, 0.0);
    for (const auto& [b, v] : counts.values) full[b] = v / total;
    apply_assignment(full, model.eps, true);
    solution = std::move(full);
  } else {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(subset.size()));
    for (std::size_t k = 0; k < subset.size(); ++k) {
      auto it = counts.values.find(subset[k]);
      if (it != counts.values.end()) rhs[static_cast<Eigen::Index>(k)] = it->second / total;
    }
    Eigen::VectorXd x;
    if (subset.size() <= 2048) {
      const Eigen::Index m = static_cast<Eigen::Index>(subset.size());
      Eigen::MatrixXd a(m, m);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
          a(i, j) = assignment_element(subset[static_cast<std::size_t>(i)], subset[static_cast<std::size_t>(j)],
                                       model.eps);
      x = a.partialPivLu().solve(rhs);
    } else {
      x = solve_iterative(subset, rhs, model.eps);
    }
    solution.assign(full_dim, 0.0);
    for (std::size_t k = 0; k < subset.size(); ++k) solution[subset[k]] = x[static_cast<Eigen::Index>(k)];
  }
  double sum = 0.0;
  for (double v : solution) sum += v;
  for (std::size_t b = 0; b < solution.size(); ++b)
    if (solution[b] != 0.0) out.values.emplace(b, solution[b] / sum);
  return out;
}

PostselectResult symmetry_postselect(const CountsHistogram& counts, const SymmetrySector& sector) {
  std::uint64_t alpha_mask = 0;
  for (int q = 0; q < counts.n_qubits; q += 2) alpha_mask |= std::uint64_t{1} << q;
  const std::uint64_t beta_mask = alpha_mask << 1;
  PostselectResult res;
  res.counts.n_qubits = counts.n_qubits;
  res.counts.quasi = counts.quasi;
  double kept = 0.0;
  for (const auto& [b, v] : counts.values) {
    if (std::popcount(b & alpha_mask) == sector.n_alpha && std::popcount(b & beta_mask) == sector.n_beta) {
      res.counts.values.emplace(b, v);
      kept += v;
    }
  }
  const double total = counts.total();
  if (std::abs(kept) < 1e-12 || total == 0.0) throw EmptySectorError("postselection retained no weight");
  res.retained_fraction = kept / total;
  if (counts.quasi) {
    for (auto& [b, v] : res.counts.values) v /= kept;
  } else {
    res.counts.shots = static_cast<std::uint64_t>(std::llround(kept));
  }
  return res;
}

CountsHistogram mitigation_stack(const CountsHistogram& counts, const MitigationConfig& config,
                                 bool z_diagonal_setting, double* retained_fraction) {
  CountsHistogram cur = counts;
  if (retained_fraction) *retained_fraction = 1.0;
  if (config.m3) cur = m3_correct(cur, config.model);
  if (config.postselect && z_diagonal_setting) {
    PostselectResult r = symmetry_postselect(cur, config.sector);
    if (retained_fraction) *retained_fraction = r.retained_fraction;
    cur = std::move(r.counts);
  }
  return cur;
}

}  // namespace qsceom
