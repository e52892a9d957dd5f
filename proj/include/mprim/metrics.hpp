#pragma once

// Joint-space and task-space evaluation metrics.
//
// AveMSE: mean over test samples of the squared trajectory loss. With several
// joints, the squared per-joint losses of a sample are summed before averaging
// over samples.

#include "mprim/promp.hpp"
#include "mprim/regressor/loss.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprim {

/// Pairwise (cascade) summation; the reduction order depends only on the length.
inline double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

inline double pairwise_mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("pairwise_mean: empty input");
  return pairwise_sum(values) / static_cast<double>(values.size());
}

/// Sum over joints of the squared trajectory RMSE between two weight sets.
inline double squared_trajectory_error(const PrompWeights& pred, const PrompWeights& gt,
                                       const Eigen::MatrixXd& phi) {
  if (pred.theta.rows() != gt.theta.rows() || pred.theta.cols() != gt.theta.cols()) {
    throw std::invalid_argument("squared_trajectory_error: weight shapes differ");
  }
  double total = 0.0;
  for (int j = 0; j < pred.n_joint(); ++j) {
    const double l = loss_trajectory(pred.theta.col(j), gt.theta.col(j), phi);
    total += l * l;
  }
  return total;
}

/// Mean squared joint-trajectory error (rad^2) over equally long lists of weights.
inline double ave_mse(std::span<const PrompWeights> pred, std::span<const PrompWeights> gt,
                      const Eigen::MatrixXd& phi) {
  if (pred.empty()) throw std::invalid_argument("ave_mse: empty input");
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("ave_mse: prediction and ground-truth lists differ in length");
  }
  std::vector<double> per_sample(pred.size());
  for (std::size_t n = 0; n < pred.size(); ++n) {
    per_sample[n] = squared_trajectory_error(pred[n], gt[n], phi);
  }
  return pairwise_mean(per_sample);
}

/// Trajectory-level variant: sum over joints of the per-joint mean squared error.
inline double squared_trajectory_error(const Trajectory& pred, const Trajectory& gt) {
  if (pred.values.rows() != gt.values.rows() || pred.values.cols() != gt.values.cols()) {
    throw std::invalid_argument("squared_trajectory_error: trajectory shapes differ");
  }
  return (pred.values - gt.values).array().square().colwise().mean().sum();
}

struct EvalRecord {
  std::string group;
  double ave_mse = 0.0;  // rad^2
  double ave_ed = 0.0;   // mm
  int count = 0;
};

inline void write_eval_csv(std::ostream& out, std::span<const EvalRecord> rows) {
  out << "group,ave_mse_rad2,ave_ed_mm,count\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.group << ',' << r.ave_mse << ',' << r.ave_ed << ',' << r.count << '\n';
  }
}

}  // namespace mprim
