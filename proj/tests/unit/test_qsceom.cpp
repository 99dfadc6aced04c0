#include <cmath>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "qsceom/ansatz.hpp"
#include "qsceom/eom.hpp"
#include "qsceom/fci.hpp"
#include "qsceom/measurement.hpp"
#include "test_support.hpp"

namespace qsceom {
namespace {

struct H2Setup {
  MolecularIntegrals ints;
  PauliSum h;
  EomBasis basis;
  AnsatzCircuit ground;
  std::vector<double> fci;
};

const H2Setup& h2() {
  static const H2Setup s = [] {
    H2Setup out;
    out.ints = testing::fixture("h2_0.74_sto3g");
    out.h = build_hamiltonian(out.ints);
    out.basis = EomBasis::singles_doubles(4, 1, 1);
    AdaptConfig cfg;
    cfg.gradient_norm_threshold = 1e-8;
    out.ground = adapt_vqe(out.h, build_excitation_pool(2, 2), cfg, hartree_fock_state(4, 1, 1)).circuit;
    out.fci = testing::reference_energies().at("h2_0.74_sto3g");
    return out;
  }();
  return s;
}

TEST(EomBasis, SinglesDoublesLayout) {
  const auto b = EomBasis::singles_doubles(4, 1, 1);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_FALSE(b.entries[0].has_value());
  EXPECT_EQ(b.reference_bits, 0b0011u);
  EXPECT_EQ(b.determinant(1).bits, 0b0110u);
  EXPECT_EQ(EomBasis::singles_doubles(12, 3, 3).size(), 118u);
  EXPECT_THROW(EomBasis::singles_doubles(4, 2, 0), std::invalid_argument);
}

TEST(EomBasis, StatesAreOrthonormal) {
  const auto& s = h2();
  const auto states = prepare_basis_states(s.ground, s.basis);
  for (std::size_t i = 0; i < states.size(); ++i)
    for (std::size_t j = 0; j < states.size(); ++j)
      EXPECT_NEAR(std::abs(states[i].inner(states[j])), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(EomBasis, IdentityAnsatzGivesDeterminants) {
  const AnsatzCircuit id(AnsatzKind::adapt, 4);
  const auto s = build_basis_state(id, FermionGenerator::make_single(0, 2), hartree_fock_state(4, 1, 1));
  EXPECT_NEAR(std::abs(s[0b0110]), 1.0, 1e-15);
}

TEST(ExactBuild, H2RootsMatchFci) {
  const auto& s = h2();
  const auto m = build_m_exact(s.ground, s.h, s.basis);
  EXPECT_TRUE(m.finalized);
  const auto sol = diagonalize(m);
  ASSERT_EQ(sol.total_energies.size(), 4u);
  ASSERT_GE(s.fci.size(), 4u);
  for (int r = 0; r < 4; ++r) EXPECT_NEAR(sol.total_energies[r], s.fci[r], 1e-10) << r;
  EXPECT_EQ(sol.excitation_energies[0], 0.0);
}

TEST(ExactBuild, IdentityAnsatzGivesDeterminantHamiltonian) {
  const auto& s = h2();
  const AnsatzCircuit id(AnsatzKind::adapt, 4);
  const auto m = build_m_exact(id, s.h, s.basis);
  const Eigen::MatrixXd dense = testing::dense_hamiltonian(s.ints);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const auto a = s.basis.determinant(i), b = s.basis.determinant(j);
      const double want = a.sign * b.sign * dense(static_cast<Eigen::Index>(a.bits), static_cast<Eigen::Index>(b.bits));
      EXPECT_NEAR(m.values(i, j), want, 1e-12) << i << "," << j;
    }
}

TEST(ExactBuild, ShiftMovesValuesNotEnergies) {
  const auto& s = h2();
  const auto a = build_m_exact(s.ground, s.h, s.basis);
  const auto b = build_m_exact(s.ground, s.h, s.basis, -1.0);
  EXPECT_LT((b.values - a.values - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  const auto ea = diagonalize(a).total_energies, eb = diagonalize(b).total_energies;
  for (int r = 0; r < 4; ++r) EXPECT_NEAR(ea[r], eb[r], 1e-12);
}

TEST(EomMatrix, FinalizeIsIdempotentAndRequired) {
  auto m = EomMatrix::zeros(3);
  m.values << 1, 2, 3, 0, 1, 4, 1, 2, 1;
  EXPECT_THROW(diagonalize(m), std::invalid_argument);
  m.finalize();
  const Eigen::MatrixXd once = m.values;
  EXPECT_EQ(once, once.transpose());
  m.finalize();
  EXPECT_EQ(m.values, once);
}

TEST(SampledBuild, AnalyticMatchesExact) {
  const auto& s = h2();
  const auto obs = group_pauli_terms(s.h);
  const auto settings = enumerate_settings(s.basis.size(), obs.groups.size());
  const auto plan = allocate_shots_uniform(settings, settings.size(), 1);
  SampledBuildOptions opt;
  opt.analytic = true;
  const auto b = build_m_sampled(s.ground, obs, s.basis, plan, opt, 1);
  const auto exact = build_m_exact(s.ground, s.h, s.basis);
  EXPECT_LT((b.matrix.values - exact.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SampledBuild, LedgerIdentity) {
  const auto& s = h2();
  const auto obs = group_pauli_terms(s.h);
  const std::uint64_t n = s.basis.size(), g = obs.groups.size(), u = 50;
  const auto settings = enumerate_settings(n, g);
  EXPECT_EQ(settings.size(), g * n * n);
  const auto plan = allocate_shots_uniform(settings, u * settings.size(), 1);
  const auto b = build_m_sampled(s.ground, obs, s.basis, plan, SampledBuildOptions{}, 3);
  EXPECT_EQ(b.ledger.elements_evaluated, n * (n + 1) / 2);
  EXPECT_EQ(b.ledger.circuits_executed, g * n * n);
  EXPECT_EQ(b.ledger.shots_consumed, u * g * n * n);
  const auto c = element_cost(n, n * (n - 1) / 2, g, u);
  EXPECT_EQ(c.circuits_executed, b.ledger.circuits_executed);
  EXPECT_EQ(c.shots_consumed, b.ledger.shots_consumed);
  std::ostringstream out;
  write_ledger_csv(out, b.ledger);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "elements_evaluated,circuits_executed,shots_consumed");
}

TEST(SampledBuild, UnbiasedOverSeeds) {
  const auto& s = h2();
  const auto obs = group_pauli_terms(s.h);
  const auto settings = enumerate_settings(s.basis.size(), obs.groups.size());
  const auto plan = allocate_shots_uniform(settings, 2000 * settings.size(), 1);
  const auto exact = build_m_exact(s.ground, s.h, s.basis);
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(4, 4), se = Eigen::MatrixXd::Zero(4, 4);
  const int seeds = 40;
  for (int k = 0; k < seeds; ++k) {
    const auto b = build_m_sampled(s.ground, obs, s.basis, plan, SampledBuildOptions{}, 100 + k);
    mean += b.matrix.values / seeds;
    se += b.matrix.standard_error / seeds;
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      EXPECT_LT(std::abs(mean(i, j) - exact.values(i, j)), 5.0 * se(i, j) / std::sqrt(double(seeds)) + 1e-12)
          << i << "," << j;
}

TEST(SampledBuild, RejectsMismatchedPlan) {
  const auto& s = h2();
  const auto obs = group_pauli_terms(s.h);
  auto settings = enumerate_settings(s.basis.size(), obs.groups.size());
  settings.pop_back();
  const auto plan = allocate_shots_uniform(settings, 10 * settings.size(), 1);
  EXPECT_THROW(build_m_sampled(s.ground, obs, s.basis, plan, SampledBuildOptions{}, 1), std::invalid_argument);
  auto wide = enumerate_settings(s.basis.size() + 1, obs.groups.size());
  const auto plan2 = allocate_shots_uniform(wide, 10 * wide.size(), 1);
  EXPECT_THROW(build_m_sampled(s.ground, obs, s.basis, plan2, SampledBuildOptions{}, 1), std::invalid_argument);
}

TEST(Variational, LowestRootBoundsFciFromAbove) {
  const auto ints = testing::fixture("h4_linear_3.0_sto6g");
  const auto h = build_hamiltonian(ints);
  AdaptConfig cfg;
  cfg.gradient_norm_threshold = 1e-2;
  const auto ground = adapt_vqe(h, build_excitation_pool(4, 4), cfg, hartree_fock_state(8, 2, 2)).circuit;
  const auto sol = diagonalize(build_m_exact(ground, h, EomBasis::singles_doubles(8, 2, 2)));
  const auto fci = testing::reference_energies().at("h4_linear_3.0_sto6g");
  for (std::size_t r = 0; r < std::min<std::size_t>(fci.size(), 3); ++r) EXPECT_GE(sol.total_energies[r], fci[r] - 1e-10);
}

Eigen::MatrixXd decaying_matrix(int n) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = i == j ? 1.0 + i : 0.1 * std::pow(0.05, std::abs(i - j)) * std::cos(i + j);
  return (a + a.transpose()) / 2;
}

TEST(Davidson, DiagonalMatrix) {
  Eigen::VectorXd d(20);
  for (int i = 0; i < 20; ++i) d[i] = 20.0 - i;
  const auto r = davidson_solve([&](int i, int j) { return i == j ? d[i] : 0.0; }, d, DavidsonOptions{});
  ASSERT_EQ(r.solution.total_energies.size(), 3u);
  EXPECT_NEAR(r.solution.total_energies[0], 1.0, 1e-12);
  EXPECT_NEAR(r.solution.total_energies[2], 3.0, 1e-12);
  // the guess columns are read once to learn they vanish
  EXPECT_LE(r.ledger.elements_evaluated, 20u + 3u * 19u);
  EXPECT_LE(r.iterations, 2);
}

TEST(Davidson, MatchesDenseWithFewElements) {
  const int n = 50;
  const auto a = decaying_matrix(n);
  std::set<std::pair<int, int>> touched;
  DavidsonOptions o;
  o.k = 3;
  o.tol = 1e-8;
  const auto r = davidson_solve([&](int i, int j) {
    touched.insert({std::min(i, j), std::max(i, j)});
    return a(i, j);
  }, a.diagonal(), o, 0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.solution.total_energies[k], es.eigenvalues()[k] + 0.5, 1e-8);
  EXPECT_TRUE(r.solution.converged);
  EXPECT_LT(r.ledger.elements_evaluated, static_cast<std::uint64_t>(n * n / 2));
  EXPECT_GE(r.ledger.elements_evaluated, touched.size());
  EXPECT_LE(r.ledger.elements_evaluated, touched.size() + n);
  for (double res : r.residual_norms) EXPECT_LE(res, 1e-8);
}

TEST(Davidson, RandomDenseAgreement) {
  const int n = 40;
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
  a = (a + a.transpose()).eval();
  a.diagonal() += Eigen::VectorXd::LinSpaced(n, 0, 10);
  DavidsonOptions o;
  o.k = 4;
  o.tol = 1e-9;
  const auto r = davidson_solve([&](int i, int j) { return a(i, j); }, a.diagonal(), o);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.solution.total_energies[k], es.eigenvalues()[k], 1e-8);
}

TEST(Davidson, BlockedSolveAvoidsCrossBlockElements) {
  const int n = 30;
  Eigen::MatrixXd a = decaying_matrix(n);
  std::vector<std::uint32_t> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = (i * 7) % 3 == 0 ? 1u : 0u;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (labels[i] != labels[j]) a(i, j) = 0.0;
  bool crossed = false;
  DavidsonOptions o;
  o.k = 4;
  o.tol = 1e-9;
  const auto r = davidson_solve_blocked([&](int i, int j) {
    crossed |= labels[i] != labels[j];
    return a(i, j);
  }, a.diagonal(), labels, o);
  EXPECT_FALSE(crossed);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  ASSERT_EQ(r.solution.total_energies.size(), 4u);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.solution.total_energies[k], es.eigenvalues()[k], 1e-8);
  for (int k = 0; k < 4; ++k)
    EXPECT_NEAR(std::abs(r.solution.eigenvectors.col(k).dot(es.eigenvectors().col(k))), 1.0, 1e-6);
}

TEST(Symmetry, H2LabelsAndPreservation) {
  const auto& s = h2();
  const auto gradings = orbital_z2_symmetries(s.ints);
  ASSERT_EQ(gradings.size(), 1u);
  const auto labels = basis_symmetry_labels(s.basis, gradings);
  // singles change the spatial parity, the reference and the double do not
  EXPECT_EQ(labels, (std::vector<std::uint32_t>{0, 1, 1, 0}));
  EXPECT_TRUE(preserves_symmetries(s.ground, gradings));
  AnsatzCircuit broken(AnsatzKind::adapt, 4);
  broken.add_excitation(FermionGenerator::make_single(0, 2), 0.1);
  EXPECT_FALSE(preserves_symmetries(broken, gradings));
  EXPECT_FALSE(preserves_symmetries(hea_ansatz(4, 1), gradings));
}

TEST(Scaling, ReportAndSlopes) {
  std::vector<ScalingRow> rows;
  for (int n : {2, 4, 8}) rows.push_back({"h" + std::to_string(n), n, 0, element_cost(n, n * n, 1, 10)});
  const auto rep = scaling_report(ScalingMode::brute, rows);
  EXPECT_EQ(rep.rows.front().n_orbitals, 2);
  EXPECT_NEAR(rep.slope_elements, loglog_slope({2, 4, 8}, {6, 20, 72}), 1e-12);
  EXPECT_NEAR(loglog_slope({1, 10, 100}, {2, 20, 200}), 1.0, 1e-12);
  rows.pop_back();
  EXPECT_THROW(scaling_report(ScalingMode::brute, rows), std::invalid_argument);
  std::ostringstream out;
  write_scaling_csv(out, rep);
  EXPECT_NE(out.str().find("h4"), std::string::npos);
  EXPECT_EQ(parse_scaling_mode(to_string(ScalingMode::davidson_brg)), ScalingMode::davidson_brg);
}

TEST(Export, MatrixAndSpectrumCsv) {
  const auto& s = h2();
  const auto m = build_m_exact(s.ground, s.h, s.basis);
  std::ostringstream mo, so;
  m.write_csv(mo);
  diagonalize(m).write_csv(so);
  const std::string text = mo.str();
  EXPECT_EQ(text.rfind("I,J,value,shots,stderr\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 17);
  EXPECT_EQ(so.str().rfind("root,total_energy,excitation_energy\n", 0), 0u);
}

}  // namespace
}  // namespace qsceom
