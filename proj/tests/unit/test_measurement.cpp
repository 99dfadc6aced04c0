#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "qsceom/fci.hpp"
#include "qsceom/measurement.hpp"
#include "test_support.hpp"

namespace qsceom {
namespace {

PauliSum sum_of(int n, std::initializer_list<const char*> terms) {
  PauliSum s(n);
  double c = 1.0;
  for (const char* t : terms) s.add(PauliString::parse(t), c += 0.5);
  return s;
}

TEST(Grouping, Examples) {
  EXPECT_EQ(group_pauli_terms(sum_of(2, {"Z0", "Z1", "Z0Z1"})).groups.size(), 1u);
  EXPECT_EQ(group_pauli_terms(sum_of(1, {"X0", "Z0"})).groups.size(), 2u);
  const auto h2 = group_pauli_terms(build_hamiltonian(testing::fixture("h2_0.74_sto3g")));
  EXPECT_EQ(h2.groups.size(), 5u);
  EXPECT_NE(h2.offset, 0.0);
}

TEST(Grouping, MembersQubitwiseCommuteAndCoverEveryTerm) {
  const auto h = build_hamiltonian(testing::fixture("h4_linear_3.0_sto6g"));
  const auto g = group_pauli_terms(h);
  std::size_t members = 0;
  for (const auto& grp : g.groups) {
    members += grp.members.size();
    for (std::size_t a = 0; a < grp.members.size(); ++a) {
      for (std::size_t b = a + 1; b < grp.members.size(); ++b)
        EXPECT_TRUE(grp.members[a].qubitwise_commutes_with(grp.members[b]));
      for (int q = 0; q < 8; ++q) {
        const char ax = grp.members[a].axis(q);
        if (ax != 'I') {
          EXPECT_EQ(ax, grp.basis[static_cast<std::size_t>(q)]);
        }
      }
    }
  }
  EXPECT_EQ(members + 1, h.size());
  std::ostringstream out;
  write_group_report(out, g);
  EXPECT_EQ(out.str().rfind("group_id,basis_pattern,member_count\n", 0), 0u);
}

TEST(Grouping, GroupedEstimateIsExactOnDistributions) {
  const auto h = build_hamiltonian(testing::fixture("h2_0.74_sto3g"));
  const auto g = group_pauli_terms(h);
  Statevector psi(4);
  for (std::size_t i = 0; i < 16; ++i) psi[i] = cplx(std::cos(0.3 * i), std::sin(0.7 * i));
  psi.normalize();
  double e = g.offset;
  for (const auto& grp : g.groups)
    e += grp.estimate(exact_distribution(psi, std::vector<char>(grp.basis.begin(), grp.basis.end()), NoiseModel::noiseless()));
  EXPECT_NEAR(e, expectation(psi, h), 1e-12);
}

double max_eri_error(const MolecularIntegrals& ints, const BrgFactorization& f) {
  const auto g = f.reconstruct_eri();
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(g[i] - ints.g[i]));
  return err;
}

TEST(Brg, ZeroToleranceIsExact) {
  for (const char* name : {"h2_0.74_sto3g", "hchain4_1.5_sto3g", "h2o_0.94_sto3g"}) {
    const auto ints = testing::fixture(name);
    const auto f = brg_factorize(ints, 0.0);
    EXPECT_LT(max_eri_error(ints, f), 1e-12) << name;
  }
}

TEST(Brg, H2RankAndReconstruction) {
  const auto ints = testing::fixture("h2_0.74_sto3g");
  const auto f = brg_factorize(ints, 1e-6);
  EXPECT_EQ(f.ranks.size(), 3u);
  EXPECT_EQ(brg_group_count(f), 4);
  for (const auto& r : f.ranks) {
    EXPECT_NEAR(r.l.norm(), 1.0, 1e-12);
    EXPECT_LT((r.l - r.l.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::MatrixXd back = r.rotation * r.lambda.asDiagonal() * r.rotation.transpose();
    EXPECT_LT((back - r.l).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Brg, ReconstructionErrorBoundedByTolerance) {
  const auto ints = testing::fixture("hchain6_1.5_sto3g");
  for (double tol : {1e-2, 1e-3, 1e-4, 1e-6})
    for (auto cut : {BrgCutoff::factor_norm, BrgCutoff::weight})
      EXPECT_LE(max_eri_error(ints, brg_factorize(ints, tol, cut)), tol) << tol << " " << to_string(cut);
}

TEST(Brg, RankIsMonotoneInTolerance) {
  const auto ints = testing::fixture("hchain8_1.5_sto3g");
  std::size_t prev = 0;
  for (double tol : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 0.0}) {
    const auto r = brg_factorize(ints, tol).ranks.size();
    EXPECT_GE(r, prev) << tol;
    prev = r;
  }
  EXPECT_EQ(brg_group_count(brg_factorize(ints, 1e6)), 1);
}

TEST(Brg, CompositeDiagonalGivesSingleEntryFactors) {
  auto ints = MolecularIntegrals::zeros(3, 2);
  const double d[3] = {0.9, 0.5, 0.2};
  for (int p = 0; p < 3; ++p) ints.set_eri(p, p, p, p, d[p]);
  const auto f = brg_factorize(ints, 1e-10);
  ASSERT_EQ(f.ranks.size(), 3u);
  for (const auto& r : f.ranks) {
    int nonzero = 0;
    for (Eigen::Index i = 0; i < r.l.size(); ++i) nonzero += std::abs(r.l.data()[i]) > 1e-12;
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(Brg, OneBodyCorrection) {
  const auto ints = testing::fixture("hchain4_1.5_sto3g");
  const auto f = brg_factorize(ints, 0.0);
  const int n = ints.n_spatial;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double c = ints.h(i, j);
      for (int k = 0; k < n; ++k) c -= 0.5 * ints.eri(i, k, k, j);
      EXPECT_NEAR(f.one_body(i, j), c, 1e-12);
    }
}

TEST(Brg, AnalyticGroupsReproduceEnergy) {
  for (const char* name : {"h2_0.74_sto3g", "hchain4_1.5_sto3g"}) {
    const auto ints = testing::fixture(name);
    const auto f = brg_factorize(ints, 0.0);
    const auto spec = fci_solve(ints, 1);
    Statevector psi(spec.n_qubits, spec.vectors.col(0));
    const auto diags = brg_group_diagonals(f);
    double e = f.core_energy;
    for (std::size_t g = 0; g < diags.size(); ++g) {
      Statevector r = psi;
      apply_orbital_rotation(r, brg_group_frame(f, static_cast<int>(g)));
      for (std::size_t b = 0; b < r.dim(); ++b) e += std::norm(r[b]) * diags[g][b];
    }
    EXPECT_NEAR(e, spec.energies[0], 1e-10) << name;
    EXPECT_NEAR(brg_estimate_energy(psi, f, 0, NoiseModel::noiseless(), 5).energy, spec.energies[0], 1e-10);
    const auto est = brg_estimate_energy(psi, f, 200000, NoiseModel::noiseless(), 5);
    EXPECT_NEAR(est.energy, spec.energies[0], 0.02) << name;
    EXPECT_EQ(est.group_values.size(), diags.size());
  }
}

TEST(Brg, SweepCsvAndCutoffNames) {
  std::ostringstream out;
  write_brg_sweep(out, {{"h2", 1e-4, 4}});
  EXPECT_EQ(out.str(), "system,tolerance,group_count\nh2,0.0001,4\n");
  EXPECT_EQ(parse_brg_cutoff("weight"), BrgCutoff::weight);
  EXPECT_THROW(parse_brg_cutoff("none"), std::invalid_argument);
}

std::vector<MeasurementSetting> settings(int n) {
  std::vector<MeasurementSetting> s;
  for (int k = 0; k < n; ++k) s.push_back({0, 0, 0, k});
  return s;
}

TEST(Allocation, UniformExamples) {
  const auto a = allocate_shots_uniform(settings(4), 100, 1);
  EXPECT_EQ(a.shots, (std::vector<std::uint64_t>{25, 25, 25, 25}));
  const auto b = allocate_shots_uniform(settings(3), 100, 1);
  EXPECT_EQ(b.shots, (std::vector<std::uint64_t>{34, 33, 33}));
  b.validate();
  EXPECT_THROW(allocate_shots_uniform(settings(3), 2, 1), std::invalid_argument);
  EXPECT_THROW(allocate_shots_uniform({}, 2, 1), std::invalid_argument);
}

TEST(Allocation, AdaptiveFollowsSquareRootVariance) {
  const std::vector<double> v{4.0, 1.0};
  const auto p = allocate_shots_from_variances(settings(2), v, 3000, 1);
  EXPECT_EQ(p.total(), 3000u);
  EXPECT_NEAR(static_cast<double>(p.shots[0]) / static_cast<double>(p.shots[1]), 2.0, 0.01);
  const std::vector<double> zero{0.0, 0.0, 0.0};
  EXPECT_EQ(allocate_shots_from_variances(settings(3), zero, 99, 1).shots, (std::vector<std::uint64_t>{33, 33, 33}));
  const std::vector<double> bad{-1.0, 1.0};
  EXPECT_THROW(allocate_shots_from_variances(settings(2), bad, 100, 1), std::invalid_argument);
}

TEST(Allocation, AdaptiveSumsToBudgetAfterPilot) {
  for (std::uint64_t budget : {97ull, 1000ull, 123457ull}) {
    const auto s = settings(7);
    std::vector<std::vector<double>> e(7), c(7);
    for (int k = 0; k < 7; ++k) {
      e[k] = {0.1 * k, -0.3};
      c[k] = {1.0 + k, 0.5};
    }
    const std::uint64_t pilot = budget / 10;
    const auto p = allocate_shots_adaptive(s, e, c, budget, pilot, 1);
    EXPECT_EQ(p.total() + pilot, budget);
    for (auto x : p.shots) EXPECT_GE(x, 1u);
  }
  EXPECT_THROW(allocate_shots_adaptive(settings(1), {{0.0}}, {{1.0}}, 10, 11, 1), std::invalid_argument);
}

TEST(Allocation, VarianceProxy) {
  const std::vector<double> c{2.0, 1.0}, e{1.0, 0.0};
  EXPECT_DOUBLE_EQ(variance_proxy(c, e), 1.0);
  EXPECT_THROW(variance_proxy(c, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Allocation, BudgetAccounting) { EXPECT_EQ(budget_accounting(5, 100, 16), 8000u); }

TEST(Allocation, PlanCsv) {
  const auto p = allocate_shots_uniform({{0, 1, 2, 3}}, 10, 1);
  std::ostringstream out;
  write_shot_plan(out, p);
  EXPECT_EQ(out.str(), "setting_id,i,j,phase,group,shots\n0,0,1,2,3,10\n");
}

}  // namespace
}  // namespace qsceom
