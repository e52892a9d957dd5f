// Acceptance runner: one PASS/FAIL line per criterion, tolerances fixed below.
//
//   acceptance                            run criteria 1-10
//   acceptance --start-suite-clock FILE   record the suite start time
//   acceptance --check-suite-clock FILE   report criterion 11 (whole suite < 10 min)

#include "mprim/training.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mprim;

namespace {

constexpr double kPartitionTol = 1e-12;
constexpr double kFitRmseTol = 1e-9;
constexpr double kMarginalRelTol = 0.05;
constexpr double kGradRelTol = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr double kResidualMeanTol = 1e-10;
constexpr double kDmpRmseTol = 1e-2;
constexpr double kDmpTerminalTol = 1e-3;
constexpr double kE2eRatio = 2.0;
constexpr double kSuiteSeconds = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // runtime limit; <= 0 means none
  std::function<Outcome()> check;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Outcome partition_of_unity() {
  const PhaseConfig phase{20.0, 150};
  double worst = 0.0;
  for (int n : {1, 8, 10, 25}) {
    const Eigen::MatrixXd phi = build_phi(phase, BasisConfig::evenly_spaced(n, phase));
    worst = std::max(worst, (phi.rowwise().sum().array() - 1.0).abs().maxCoeff());
  }
  return {worst < kPartitionTol, "max |row sum - 1| = " + fmt(worst)};
}

Outcome fit_reconstruct() {
  const PhaseConfig phase{20.0, 150};
  const Eigen::MatrixXd phi = build_phi(phase, BasisConfig::evenly_spaced(8, phase));
  const WeightFitter fitter(phi, 0.0);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    Eigen::VectorXd theta(8);
    for (auto& v : theta) v = normal(rng);
    const Eigen::VectorXd recovered = fitter.fit(phi * theta);
    worst = std::max(worst, std::sqrt((recovered - theta).squaredNorm() / 8.0));
  }
  return {worst < kFitRmseTol, "worst weight RMSE = " + fmt(worst)};
}

Outcome marginal_variance() {
  const PhaseConfig phase{20.0, 150};
  const Eigen::MatrixXd phi = build_phi(phase, BasisConfig::evenly_spaced(8, phase));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd L(8, 8);
  for (auto& v : L.reshaped()) v = 0.3 * normal(rng);
  PrompDistribution dist;
  dist.mean = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
  dist.covariance = L * L.transpose();
  const TrajectorySampler sampler(dist, phi);

  const std::vector<int> steps{0, 37, 74, 111, 149};
  const int n = 100000;
  std::vector<double> sum(steps.size(), 0.0), sum_sq(steps.size(), 0.0);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd q = sampler.sample(rng);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      sum[i] += q[steps[i]];
      sum_sq[i] += q[steps[i]] * q[steps[i]];
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double mean = sum[i] / n;
    const double var = (sum_sq[i] - n * mean * mean) / (n - 1);
    const Eigen::VectorXd psi = phi.row(steps[i]).transpose();
    const double expected = dist.obs_noise_var + psi.dot(dist.covariance * psi);
    worst = std::max(worst, std::abs(var - expected) / expected);
  }
  return {worst < kMarginalRelTol, "worst relative variance error = " + fmt(worst)};
}

double fd_relative_error(const Loss& loss, const Eigen::VectorXd& pred, const Eigen::VectorXd& gt) {
  Eigen::VectorXd analytic;
  loss.value_and_gradient(pred, gt, analytic);
  Eigen::VectorXd numeric(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    Eigen::VectorXd up = pred, down = pred;
    up[i] += kFdStep;
    down[i] -= kFdStep;
    numeric[i] = (loss.value(up, gt) - loss.value(down, gt)) / (2.0 * kFdStep);
  }
  return (analytic - numeric).norm() / std::max(1e-12, numeric.norm());
}

Outcome gradients() {
  const PhaseConfig phase{20.0, 150};
  const Eigen::MatrixXd phi = build_phi(phase, BasisConfig::evenly_spaced(8, phase));
  const std::vector<std::pair<std::string, Loss>> losses{
      {"trajectory", Loss::trajectory(phi, 7)},
      {"ddmp_rtp", Loss::ddmp_rtp(7, 25, 100.0)},
      {"ddmp_wpp", Loss::ddmp_wpp(7, 25)}};
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool pass = true;
  std::string detail;
  for (const auto& [name, loss] : losses) {
    double worst = 0.0;
    for (int c = 0; c < 100; ++c) {
      Eigen::VectorXd pred(loss.output_size()), gt(loss.output_size());
      for (auto& v : pred) v = normal(rng);
      for (auto& v : gt) v = normal(rng);
      worst = std::max(worst, fd_relative_error(loss, pred, gt));
    }
    pass = pass && worst < kGradRelTol;
    detail += (detail.empty() ? "" : ", ") + name + " " + fmt(worst);
  }
  return {pass, "worst relative error: " + detail};
}

Outcome residual_identity() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> exponent(-30, 30);
  int mismatches = 0;
  for (int n = 0; n < 1000; ++n) {
    Eigen::VectorXd theta(56), mean(56);
    for (Eigen::Index i = 0; i < 56; ++i) {
      theta[i] = std::ldexp(normal(rng), exponent(rng));
      mean[i] = std::ldexp(normal(rng), exponent(rng));
    }
    if (residual_combine(residual_split(theta, mean)) != theta) ++mismatches;
  }

  const DemoDataset ds = generate_rtp(3);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 3;
  const SplitIndices split = default_split(ds.size(), cfg);
  const TrainResult r = train_residual_deep_mp(ds, split, {}, {}, cfg);
  const WeightFitter fitter(build_phi(r.model.phase, r.model.basis), r.model.lambda);
  std::map<std::string, Eigen::VectorXd> sums;
  std::map<std::string, int> counts;
  for (auto i : detail::training_pool(split)) {
    const std::string g = group_key(ds.samples[i], ds.kind);
    const Eigen::VectorXd target = fitter.fit(ds.samples[i].trajectory).flat() - r.model.mean_for(g);
    auto [it, fresh] = sums.try_emplace(g, Eigen::VectorXd::Zero(target.size()));
    it->second += target;
    ++counts[g];
  }
  double worst = 0.0;
  for (const auto& [g, s] : sums) worst = std::max(worst, (s / counts[g]).cwiseAbs().maxCoeff());
  return {mismatches == 0 && worst < kResidualMeanTol,
          std::to_string(mismatches) + "/1000 round-trip mismatches, max |mean residual target| = " +
              fmt(worst)};
}

Outcome dmp_fit() {
  Eigen::VectorXd q0(7), q1(7);
  q0 << 0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785;
  q1 << 0.4, 0.2, -0.3, -1.9, 0.25, 1.9, 1.1;
  const Trajectory demo = min_jerk(q0, q1, 150);
  const DmpModel m = fit_dmp(demo, 25, 7.6);
  const Trajectory out = reproduce(m, 150, demo.phase);
  const double rmse =
      std::sqrt((out.values - demo.values).squaredNorm() / static_cast<double>(demo.values.size()));
  const double terminal = (out.values.row(149).transpose() - m.goal).cwiseAbs().maxCoeff();
  return {rmse < kDmpRmseTol && terminal < kDmpTerminalTol,
          "rollout RMSE = " + fmt(rmse) + " rad, terminal error = " + fmt(terminal) + " rad"};
}

Outcome end_to_end() {
  const DemoDataset ds = generate_rtp(7);
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.seed = 7;
  const SplitIndices split = default_split(ds.size(), cfg);
  PrompSetup setup;
  setup.n_basis = 8;
  NetConfig net;
  net.hidden = {64, 64};
  const KinematicChain chain = KinematicChain::default_seven_dof();

  const TrainResult r = train_deep_mp(ds, split, setup, net, cfg);
  const Evaluation deep = evaluate(r.model, ds, split.test, chain);
  const RidgeBaseline ridge = train_ridge_baseline(ds, detail::training_pool(split), setup, 1e-6);
  const Evaluation base = evaluate(
      ds, split.test, [&](const DemoSample& s) { return ridge.predict(s); }, ridge.basis,
      setup.lambda, chain);
  const double ratio = deep.overall.ave_mse / base.overall.ave_mse;
  return {ratio <= kE2eRatio && r.report.epochs_run <= 150,
          "deep-MP AveMSE = " + fmt(deep.overall.ave_mse) + ", ridge AveMSE = " +
              fmt(base.overall.ave_mse) + ", ratio = " + fmt(ratio) + ", epochs = " +
              std::to_string(r.report.epochs_run)};
}

Outcome ddmp_heads() {
  TrainConfig cfg;
  cfg.epochs = 0;
  RtpConfig rc;
  rc.counts = {8, 4, 4, 4};
  const DemoDataset rtp = generate_rtp(1, rc);
  WppConfig wc;
  wc.trials_per_cell = 2;
  const DemoDataset wpp = generate_wpp(1, wc);
  const int rtp_head = train_ddmp(rtp, default_split(rtp.size(), cfg), {}, {8}, {}, cfg).model.net.output_size();
  const int wpp_head = train_ddmp(wpp, default_split(wpp.size(), cfg), {}, {10}, {}, cfg).model.net.output_size();
  return {rtp_head == 7 * 26 && wpp_head == 7 * 27,
          "RTP head " + std::to_string(rtp_head) + ", WPP head " + std::to_string(wpp_head)};
}

Outcome split_protocol() {
  // Pattern -> (train, test) membership per experiment; 'N' patterns must be absent.
  const std::vector<std::string> table{"RRREERR", "RREERRR", "RREERNN", "REERRNN", "RRRHHRR",
                                       "RRHHRRR", "RRHHRNN", "RHHRRNN", "HHHHHHH", "HHHHHNN"};
  const DemoDataset ds = generate_wpp(42);
  int wrong = 0;
  for (int k = 1; k <= 10; ++k) {
    const SplitIndices s = apply_split(ds, wpp_split(k), 1);
    std::set<int> train, test, expect_train, expect_test;
    for (auto i : s.train) train.insert(ds.samples[i].tags.pattern);
    for (auto i : s.test) test.insert(ds.samples[i].tags.pattern);
    for (int p = 1; p <= 7; ++p) {
      const char c = table[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(p - 1)];
      if (c == 'R' || c == 'H') expect_train.insert(p);
      if (c == 'E' || c == 'H') expect_test.insert(p);
    }
    if (train != expect_train || test != expect_test) ++wrong;
  }
  const SplitIndices s4 = apply_split(ds, wpp_split(4), 1);
  std::set<int> train4, test4;
  for (auto i : s4.train) train4.insert(ds.samples[i].tags.pattern);
  for (auto i : s4.test) test4.insert(ds.samples[i].tags.pattern);
  const bool wpp4 = train4 == std::set<int>{1, 4, 5} && test4 == std::set<int>{2, 3};
  return {wrong == 0 && wpp4, std::to_string(10 - wrong) + "/10 experiments match; WPP4 " +
                                  (wpp4 ? "train {1,4,5} test {2,3}" : "mismatch")};
}

Outcome dataset_structure() {
  const std::size_t wpp = generate_wpp(0).size();
  const std::size_t rtp = generate_rtp(0).size();
  return {wpp == 868 && rtp == 545,
          "WPP " + std::to_string(wpp) + " samples, RTP " + std::to_string(rtp) + " samples"};
}

int run_all() {
  const std::vector<Criterion> criteria{
      {1, "basis partition of unity", 1.0, partition_of_unity},
      {2, "fit/reconstruct oracle", 5.0, fit_reconstruct},
      {3, "marginal variance", 30.0, marginal_variance},
      {4, "gradient correctness", 60.0, gradients},
      {5, "residual identity", 0.0, residual_identity},
      {6, "DMP fit and rollout", 5.0, dmp_fit},
      {7, "end-to-end deep-MP vs ridge", 300.0, end_to_end},
      {8, "d-DMP head shapes", 0.0, ddmp_heads},
      {9, "split protocol", 0.0, split_protocol},
      {10, "dataset structure", 0.0, dataset_structure},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s <= 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << " (" << fmt(secs) << " s";
    if (c.budget_s > 0.0) std::cout << ", limit " << c.budget_s << " s";
    std::cout << ")\n";
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << '\n';
  return failures == 0 ? 0 : 1;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

int start_clock(const std::string& path) {
  std::ofstream out(path);
  out.precision(17);
  out << now_seconds() << '\n';
  return out ? 0 : 1;
}

int check_clock(const std::string& path) {
  std::ifstream in(path);
  double start = 0.0;
  if (!(in >> start)) {
    std::cout << "FAIL [11] full suite under 10 minutes: no start stamp at " << path << '\n';
    return 1;
  }
  const double elapsed = now_seconds() - start;
  const bool pass = elapsed < kSuiteSeconds;
  std::cout << (pass ? "PASS" : "FAIL") << " [11] full suite under 10 minutes: " << fmt(elapsed)
            << " s (limit " << kSuiteSeconds << " s)\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  if (args.size() == 2 && args[0] == "--start-suite-clock") return start_clock(args[1]);
  if (args.size() == 2 && args[0] == "--check-suite-clock") return check_clock(args[1]);
  if (!args.empty()) {
    std::cerr << "usage: acceptance [--start-suite-clock FILE | --check-suite-clock FILE]\n";
    return 2;
  }
  return run_all();
}
