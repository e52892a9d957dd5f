#include "mprim/metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <vector>

using namespace mprim;

namespace {

struct Fixture {
  PhaseConfig phase{20.0, 150};
  Eigen::MatrixXd phi = build_phi(phase, BasisConfig::evenly_spaced(8, phase));
};

PrompWeights random_weights(std::mt19937_64& rng, int joints = 7) {
  std::normal_distribution<double> normal(0.0, 1.0);
  PrompWeights w{Eigen::MatrixXd(8, joints)};
  for (auto& v : w.theta.reshaped()) v = normal(rng);
  return w;
}

// Direct double loop over samples, joints and time steps.
double brute_force_ave_mse(const std::vector<PrompWeights>& pred,
                           const std::vector<PrompWeights>& gt, const Eigen::MatrixXd& phi) {
  long double total = 0.0L;
  for (std::size_t n = 0; n < pred.size(); ++n) {
    for (Eigen::Index j = 0; j < pred[n].theta.cols(); ++j) {
      long double sq = 0.0L;
      for (Eigen::Index t = 0; t < phi.rows(); ++t) {
        long double a = 0.0L, b = 0.0L;
        for (Eigen::Index k = 0; k < phi.cols(); ++k) {
          a += static_cast<long double>(phi(t, k)) * pred[n].theta(k, j);
          b += static_cast<long double>(phi(t, k)) * gt[n].theta(k, j);
        }
        sq += (a - b) * (a - b);
      }
      total += sq / static_cast<long double>(phi.rows());
    }
  }
  return static_cast<double>(total / static_cast<long double>(pred.size()));
}

}  // namespace

TEST(PairwiseSum, SmallAndLarge) {
  const std::vector<double> empty;
  EXPECT_EQ(pairwise_sum(empty), 0.0);
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  EXPECT_EQ(pairwise_mean(v), 500.5);
  EXPECT_THROW(pairwise_mean(empty), std::invalid_argument);
}

TEST(PairwiseSum, MoreAccurateThanNaiveOnManySmallTerms) {
  const std::vector<double> v(1 << 20, 0.1);
  double naive = 0.0;
  for (double x : v) naive += x;
  const double exact = 0.1 * static_cast<double>(v.size());
  EXPECT_LE(std::abs(pairwise_sum(v) - exact), std::abs(naive - exact));
}

TEST(AveMse, IdenticalListsGiveZero) {
  Fixture f;
  std::mt19937_64 rng(1);
  std::vector<PrompWeights> w;
  for (int n = 0; n < 5; ++n) w.push_back(random_weights(rng));
  EXPECT_EQ(ave_mse(w, w, f.phi), 0.0);
}

TEST(AveMse, SingleJointSingleSampleIsSquaredLoss) {
  Fixture f;
  std::mt19937_64 rng(2);
  const PrompWeights a = random_weights(rng, 1);
  const PrompWeights b = random_weights(rng, 1);
  const double l = loss_trajectory(a.theta.col(0), b.theta.col(0), f.phi);
  EXPECT_NEAR(ave_mse(std::vector{a}, std::vector{b}, f.phi), l * l, 1e-15 * l * l);
}

TEST(AveMse, MatchesBruteForceOracle) {
  Fixture f;
  std::mt19937_64 rng(3);
  std::vector<PrompWeights> pred, gt;
  for (int n = 0; n < 25; ++n) {
    pred.push_back(random_weights(rng));
    gt.push_back(random_weights(rng));
  }
  const double expected = brute_force_ave_mse(pred, gt, f.phi);
  EXPECT_NEAR(ave_mse(pred, gt, f.phi), expected, 1e-12 * expected);
}

TEST(AveMse, ScalesQuadratically) {
  Fixture f;
  std::mt19937_64 rng(4);
  std::vector<PrompWeights> pred, gt, pred2, gt2;
  for (int n = 0; n < 6; ++n) {
    pred.push_back(random_weights(rng));
    gt.push_back(random_weights(rng));
    pred2.push_back(PrompWeights{3.0 * pred.back().theta});
    gt2.push_back(PrompWeights{3.0 * gt.back().theta});
  }
  const double base = ave_mse(pred, gt, f.phi);
  EXPECT_NEAR(ave_mse(pred2, gt2, f.phi), 9.0 * base, 1e-12 * base);
}

TEST(AveMse, TrajectoryFormAgreesWithWeightForm) {
  Fixture f;
  std::mt19937_64 rng(5);
  const PrompWeights a = random_weights(rng);
  const PrompWeights b = random_weights(rng);
  const double weights = squared_trajectory_error(a, b, f.phi);
  const double traj = squared_trajectory_error(reconstruct(a, f.phi, f.phase),
                                               reconstruct(b, f.phi, f.phase));
  EXPECT_NEAR(traj, weights, 1e-12 * weights);
}

TEST(AveMse, InvalidInputThrows) {
  Fixture f;
  std::mt19937_64 rng(6);
  const std::vector<PrompWeights> one{random_weights(rng)};
  const std::vector<PrompWeights> two{random_weights(rng), random_weights(rng)};
  EXPECT_THROW(ave_mse(one, two, f.phi), std::invalid_argument);
  EXPECT_THROW(ave_mse(std::vector<PrompWeights>{}, std::vector<PrompWeights>{}, f.phi),
               std::invalid_argument);
  const std::vector<PrompWeights> narrow{random_weights(rng, 2)};
  EXPECT_THROW(ave_mse(one, narrow, f.phi), std::invalid_argument);
}

TEST(EvalCsv, HeaderAndRows) {
  std::ostringstream out;
  const std::vector<EvalRecord> rows{{"A", 0.25, 12.5, 3}, {"B", 0.0, 0.0, 1}};
  write_eval_csv(out, rows);
  EXPECT_EQ(out.str(), "group,ave_mse_rad2,ave_ed_mm,count\nA,0.25,12.5,3\nB,0,0,1\n");
}
