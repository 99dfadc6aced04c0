#include <cmath>

#include <gtest/gtest.h>

#include "qsceom/mitigation.hpp"
#include "qsceom/random.hpp"
#include "qsceom/sampling.hpp"

namespace qsceom {
namespace {

TEST(M3, IdentityModelNormalizes) {
  CountsHistogram c{2, {{0b01, 30}, {0b10, 70}}, 100, false};
  const auto r = m3_correct(c, AssignmentModel{{0.0, 0.0}});
  EXPECT_TRUE(r.quasi);
  EXPECT_DOUBLE_EQ(r.values.at(0b01), 0.3);
  EXPECT_DOUBLE_EQ(r.values.at(0b10), 0.7);
}

TEST(M3, SingleQubitExample) {
  // a perfect |0> seen through a 10% flip channel
  CountsHistogram c{1, {{0, 0.9}, {1, 0.1}}, 1000, false};
  const auto r = m3_correct(c, AssignmentModel{{0.1}});
  EXPECT_NEAR(r.probability(0), 1.0, 1e-12);
  EXPECT_NEAR(r.probability(1), 0.0, 1e-12);
}

// The corrected vector is the exact inverse of the simulated channel.
TEST(M3, InvertsTheReadoutChannel) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n <= 6; ++n)
    for (double eps : {0.01, 0.1, 0.3}) {
      std::vector<double> p(std::size_t{1} << n);
      double s = 0.0;
      for (auto& x : p) s += (x = u(rng) < 0.5 ? 0.0 : u(rng));
      for (auto& x : p) x /= s;
      const std::vector<double> truth = p;
      NoiseModel noise = NoiseModel::uniform_readout(n, eps);
      apply_readout_channel(p, n, noise);
      CountsHistogram c{n, {}, 0, true};
      for (std::size_t b = 0; b < p.size(); ++b)
        if (p[b] != 0.0) c.values[b] = p[b];
      const auto r = m3_correct(c, AssignmentModel::from_noise(noise, n));
      double err = 0.0, sum = 0.0;
      for (std::size_t b = 0; b < truth.size(); ++b) {
        err = std::max(err, std::abs(r.probability(b) - truth[b]));
        sum += r.probability(b);
      }
      EXPECT_LT(err, 1e-10) << n << " " << eps;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(M3, SparseSubspaceMatchesFullInverseWhenClosed) {
  // a single observed outcome: its one-flip neighbourhood is solved exactly
  CountsHistogram c{8, {{0b00001111, 1.0}}, 1, false};
  const auto r = m3_correct(c, AssignmentModel{std::vector<double>(8, 0.02)});
  double sum = 0.0;
  for (const auto& [b, v] : r.values) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_GT(r.probability(0b00001111), 1.0);
}

TEST(M3, SingularAndInvalidModels) {
  CountsHistogram c{1, {{0, 1}}, 1, false};
  EXPECT_THROW(m3_correct(c, AssignmentModel{{0.5}}), SingularModelError);
  EXPECT_THROW(m3_correct(c, AssignmentModel{{0.1, 0.1}}), std::invalid_argument);
  EXPECT_THROW(m3_correct(CountsHistogram{1, {}, 0, false}, AssignmentModel{{0.1}}), std::invalid_argument);
}

TEST(Postselect, InSectorKeepsEverything) {
  CountsHistogram c{4, {{0b0011, 60}, {0b1100, 40}}, 100, false};
  const auto r = symmetry_postselect(c, {1, 1});
  EXPECT_DOUBLE_EQ(r.retained_fraction, 1.0);
  EXPECT_EQ(r.counts.values, c.values);
}

TEST(Postselect, RemovesWrongParticleNumber) {
  CountsHistogram c{4, {{0b0011, 60}, {0b0111, 30}, {0b0001, 10}}, 100, false};
  const auto r = symmetry_postselect(c, {1, 1});
  EXPECT_DOUBLE_EQ(r.retained_fraction, 0.6);
  EXPECT_EQ(r.counts.values.size(), 1u);
  EXPECT_EQ(r.counts.shots, 60u);
}

TEST(Postselect, SpinSectorMatters) {
  CountsHistogram c{4, {{0b0101, 10}}, 10, false};  // two alpha electrons
  EXPECT_THROW(symmetry_postselect(c, {1, 1}), EmptySectorError);
  EXPECT_DOUBLE_EQ(symmetry_postselect(c, {2, 0}).retained_fraction, 1.0);
}

TEST(Postselect, QuasiInputIsRenormalized) {
  CountsHistogram c{2, {{0b01, 0.8}, {0b11, 0.2}}, 0, true};
  const auto r = symmetry_postselect(c, {1, 0});
  EXPECT_DOUBLE_EQ(r.counts.values.at(0b01), 1.0);
}

TEST(Stack, AppliesM3BeforePostselection) {
  MitigationConfig cfg;
  cfg.m3 = true;
  cfg.postselect = true;
  cfg.sector = {1, 1};
  cfg.model = AssignmentModel{std::vector<double>(4, 0.05)};
  CountsHistogram c{4, {{0b0011, 80}, {0b0111, 10}, {0b0010, 10}}, 100, false};
  double kept = 0.0;
  const auto a = mitigation_stack(c, cfg, true, &kept);
  const auto manual = symmetry_postselect(m3_correct(c, cfg.model), cfg.sector);
  EXPECT_EQ(a.values, manual.counts.values);
  EXPECT_DOUBLE_EQ(kept, manual.retained_fraction);
  EXPECT_EQ(mitigation_stack(c, cfg, true).values, a.values);  // deterministic
  // non-diagonal settings skip postselection
  EXPECT_EQ(mitigation_stack(c, cfg, false).values, m3_correct(c, cfg.model).values);
}

TEST(Stack, DisabledIsIdentity) {
  CountsHistogram c{2, {{0b01, 3}}, 3, false};
  double kept = 0.0;
  EXPECT_EQ(mitigation_stack(c, MitigationConfig{}, true, &kept).values, c.values);
  EXPECT_EQ(kept, 1.0);
}

}  // namespace
}  // namespace qsceom
