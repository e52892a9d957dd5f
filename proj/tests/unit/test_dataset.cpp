#include "mprim/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace mprim;

namespace {

const DemoDataset& rtp() {
  static const DemoDataset ds = generate_rtp(42);
  return ds;
}

const DemoDataset& wpp() {
  static const DemoDataset ds = generate_wpp(42);
  return ds;
}

std::set<int> patterns_of(const DemoDataset& ds, const std::vector<std::size_t>& idx) {
  std::set<int> out;
  for (auto i : idx) out.insert(ds.samples[i].tags.pattern);
  return out;
}

}  // namespace

TEST(MinJerk, EndpointsAndMidpoint) {
  const Eigen::VectorXd q0 = Eigen::VectorXd::Constant(2, -1.0);
  const Eigen::VectorXd q1 = Eigen::VectorXd::Constant(2, 3.0);
  const Trajectory t = min_jerk(q0, q1, 101);
  EXPECT_EQ(t.values.row(0).transpose(), q0);
  EXPECT_EQ(t.values.row(100).transpose(), q1);
  EXPECT_NEAR(t.values(50, 0), 1.0, 1e-12);
}

TEST(MinJerk, FlatEndpointDerivatives) {
  const Trajectory t = min_jerk(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 1001);
  // Velocity at s=0 is zero, so the first step is third order in 1/(T-1).
  EXPECT_LT(t.values(1, 0), 1e-7);
  EXPECT_LT(1.0 - t.values(999, 0), 1e-7);
  for (int k = 1; k < 1001; ++k) EXPECT_GE(t.values(k, 0), t.values(k - 1, 0));
}

TEST(MinJerk, RejectsBadInput) {
  EXPECT_THROW(min_jerk(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 1),
               std::invalid_argument);
  EXPECT_THROW(min_jerk(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(2), 10),
               std::invalid_argument);
}

TEST(Rtp, SampleCountsPerRegion) {
  const DemoDataset& ds = rtp();
  EXPECT_EQ(ds.size(), 545U);
  EXPECT_EQ(ds.kind, DatasetKind::Rtp);
  std::map<std::string, int> counts;
  for (const auto& s : ds.samples) ++counts[s.tags.region];
  EXPECT_EQ(counts, (std::map<std::string, int>{{"A", 292}, {"B", 128}, {"C", 73}, {"D", 52}}));
}

TEST(Rtp, ShapesStartAndRegions) {
  const RtpConfig cfg;
  for (const auto& s : rtp().samples) {
    ASSERT_EQ(s.context.size(), 3);
    ASSERT_EQ(s.trajectory.samples(), 150);
    ASSERT_EQ(s.trajectory.joints(), 7);
    EXPECT_EQ(s.trajectory.values.row(0).transpose(), workspace::home());
    const std::size_t r = static_cast<std::size_t>(s.tags.region[0] - 'A');
    const double cheb = std::max(std::abs(s.context.x() - cfg.center.x()),
                                 std::abs(s.context.y() - cfg.center.y()));
    EXPECT_LE(cheb, cfg.half_widths[r]);
    if (r > 0) {
      EXPECT_GE(cheb, cfg.half_widths[r - 1]);
    }
  }
}

TEST(Rtp, DeterministicPerSeed) {
  EXPECT_EQ(generate_rtp(42), rtp());
  EXPECT_FALSE(generate_rtp(43) == rtp());
}

TEST(Rtp, NoiseKeepsEndpoints) {
  RtpConfig cfg;
  cfg.counts = {3, 2, 0, 0};
  cfg.noise = 0.01;
  for (const auto& s : generate_rtp(5, cfg).samples) {
    const auto& v = s.trajectory.values;
    const Eigen::Vector3d nipple = s.context + Eigen::Vector3d(0.0, 0.0, cfg.nipple_height);
    const Eigen::VectorXd goal = workspace::reach(nipple);
    const Trajectory clean = min_jerk(workspace::home(), goal, 150);
    EXPECT_LT((v.row(0).transpose() - workspace::home()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((v.row(149).transpose() - goal).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT((v - clean.values).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Wpp, CellCounts) {
  const DemoDataset& ds = wpp();
  EXPECT_EQ(ds.size(), 868U);
  std::map<std::pair<int, int>, int> cells;
  for (const auto& s : ds.samples) ++cells[{s.tags.pattern, s.tags.configuration}];
  EXPECT_EQ(cells.size(), 28U);
  for (const auto& [key, n] : cells) EXPECT_EQ(n, 31);
}

TEST(Wpp, ContextEncodesPhantomAndPattern) {
  const WppConfig cfg;
  for (const auto& s : wpp().samples) {
    ASSERT_EQ(s.context.size(), 10);
    EXPECT_EQ(Eigen::Vector3d(s.context.head<3>()),
              cfg.positions[static_cast<std::size_t>(s.tags.configuration - 1)]);
    EXPECT_EQ(s.context.tail<7>().sum(), 1.0);
    EXPECT_EQ(s.context[2 + s.tags.pattern], 1.0);
  }
}

TEST(Wpp, ShortPatterns) {
  EXPECT_TRUE(is_short_pattern(6));
  EXPECT_TRUE(is_short_pattern(7));
  for (int p = 1; p <= 5; ++p) EXPECT_FALSE(is_short_pattern(p));
  for (const auto& s : wpp().samples) {
    EXPECT_EQ(s.tags.path_scale, is_short_pattern(s.tags.pattern) ? 0.6 : 1.0);
  }
}

TEST(Wpp, Deterministic) { EXPECT_EQ(generate_wpp(42), wpp()); }

TEST(WppSplit, TableDispositions) {
  using enum Disposition;
  const std::map<int, std::array<Disposition, 7>> expected{
      {1, {Train, Train, Train, Test, Test, Train, Train}},
      {2, {Train, Train, Test, Test, Train, Train, Train}},
      {3, {Train, Train, Test, Test, Train, NotUsed, NotUsed}},
      {4, {Train, Test, Test, Train, Train, NotUsed, NotUsed}},
      {5, {Train, Train, Train, Half, Half, Train, Train}},
      {6, {Train, Train, Half, Half, Train, Train, Train}},
      {7, {Train, Train, Half, Half, Train, NotUsed, NotUsed}},
      {8, {Train, Half, Half, Train, Train, NotUsed, NotUsed}},
      {9, {Half, Half, Half, Half, Half, Half, Half}},
      {10, {Half, Half, Half, Half, Half, NotUsed, NotUsed}},
  };
  for (const auto& [k, row] : expected) {
    EXPECT_EQ(wpp_split(k).patterns, row) << "WPP" << k;
    EXPECT_EQ(wpp_split("WPP" + std::to_string(k)).patterns, row);
  }
  EXPECT_THROW(wpp_split(0), std::out_of_range);
  EXPECT_THROW(wpp_split(11), std::out_of_range);
  EXPECT_THROW(wpp_split("WPP"), std::invalid_argument);
  EXPECT_THROW(wpp_split("WPP3x"), std::invalid_argument);
}

TEST(WppSplit, Wpp4Membership) {
  const SplitIndices s = apply_split(wpp(), wpp_split(4), 1);
  EXPECT_EQ(patterns_of(wpp(), s.train), (std::set<int>{1, 4, 5}));
  EXPECT_EQ(patterns_of(wpp(), s.test), (std::set<int>{2, 3}));
  EXPECT_EQ(s.train.size(), 3U * 4U * 31U);
  EXPECT_EQ(s.test.size(), 2U * 4U * 31U);
}

TEST(WppSplit, AllExperimentsDisjointWithExactCounts) {
  for (int k = 1; k <= 10; ++k) {
    const SplitSpec spec = wpp_split(k);
    const SplitIndices s = apply_split(wpp(), spec, 7);
    std::set<std::size_t> train(s.train.begin(), s.train.end());
    for (auto i : s.test) EXPECT_FALSE(train.count(i)) << "WPP" << k;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    for (auto d : spec.patterns) {
      if (d == Disposition::Train) n_train += 124;
      if (d == Disposition::Test) n_test += 124;
      if (d == Disposition::Half) {
        n_train += 4 * 16;
        n_test += 4 * 15;
      }
    }
    EXPECT_EQ(s.train.size(), n_train) << "WPP" << k;
    EXPECT_EQ(s.test.size(), n_test) << "WPP" << k;
    for (auto i : s.train) {
      EXPECT_NE(spec.patterns[static_cast<std::size_t>(wpp().samples[i].tags.pattern - 1)],
                Disposition::NotUsed);
    }
  }
}

TEST(WppSplit, HalfCellsSplitPerConfiguration) {
  const SplitIndices s = apply_split(wpp(), wpp_split(9), 3);
  std::map<std::pair<int, int>, int> train_cells, test_cells;
  for (auto i : s.train) ++train_cells[{wpp().samples[i].tags.pattern, wpp().samples[i].tags.configuration}];
  for (auto i : s.test) ++test_cells[{wpp().samples[i].tags.pattern, wpp().samples[i].tags.configuration}];
  for (const auto& [cell, n] : train_cells) EXPECT_EQ(n, 16);
  for (const auto& [cell, n] : test_cells) EXPECT_EQ(n, 15);
  EXPECT_EQ(train_cells.size(), 28U);
}

TEST(WppSplit, SeededHalfSplits) {
  const SplitIndices a = apply_split(wpp(), wpp_split(9), 3);
  EXPECT_EQ(a.train, apply_split(wpp(), wpp_split(9), 3).train);
  EXPECT_NE(a.train, apply_split(wpp(), wpp_split(9), 4).train);
}

TEST(WppSplit, RejectsRtpAndMissingPatterns) {
  EXPECT_THROW(apply_split(rtp(), wpp_split(1), 0), std::invalid_argument);
  WppConfig cfg;
  cfg.trials_per_cell = 1;
  DemoDataset ds = generate_wpp(1, cfg);
  std::erase_if(ds.samples, [](const DemoSample& s) { return s.tags.pattern == 6; });
  EXPECT_THROW(apply_split(ds, wpp_split(1), 0), std::invalid_argument);
  EXPECT_NO_THROW(apply_split(ds, wpp_split(3), 0));
}

TEST(RandomSplit, SizesAndCoverage) {
  SplitIndices s = random_split(100, 0.85, 3);
  EXPECT_EQ(s.train.size(), 85U);
  EXPECT_EQ(s.test.size(), 15U);
  carve_validation(s, 0.25, 3);
  EXPECT_EQ(s.validation.size(), 21U);
  EXPECT_EQ(s.train.size(), 64U);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100U);
  EXPECT_THROW(random_split(10, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(carve_validation(s, 1.0, 1), std::invalid_argument);
}
