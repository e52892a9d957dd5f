#pragma once

#include "mprim/promp.hpp"

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>

namespace mprim {

/// y = A x + b.
struct LinearMap {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::VectorXd& x) const {
    if (x.size() != A.cols()) {
      throw std::invalid_argument("LinearMap::predict: expected " + std::to_string(A.cols()) +
                                  " features, got " + std::to_string(x.size()));
    }
    return A * x + b;
  }
};

/// Closed-form minimizer of sum ||A x + b - y||^2 + lambda ||A||_F^2 (bias unpenalized),
/// solved on mean-centered data.
inline LinearMap ridge_fit(std::span<const Eigen::VectorXd> contexts,
                           std::span<const Eigen::VectorXd> targets, double lambda) {
  if (contexts.empty()) throw std::invalid_argument("ridge_fit: no samples");
  if (contexts.size() != targets.size()) {
    throw std::invalid_argument("ridge_fit: contexts and targets differ in count");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_fit: lambda must be >= 0");

  const auto n = static_cast<Eigen::Index>(contexts.size());
  const Eigen::Index d = contexts.front().size();
  const Eigen::Index m = targets.front().size();
  Eigen::MatrixXd X(n, d);
  Eigen::MatrixXd Y(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (contexts[i].size() != d || targets[i].size() != m) {
      throw std::invalid_argument("ridge_fit: inconsistent dimensions at sample " +
                                  std::to_string(i));
    }
    X.row(i) = contexts[i].transpose();
    Y.row(i) = targets[i].transpose();
  }
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  X.rowwise() -= x_mean;
  Y.rowwise() -= y_mean;

  Eigen::MatrixXd normal = X.transpose() * X;
  normal.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const double rcond = detail::ldlt_rcond(ldlt);
  if (!(rcond > 1e-15 * static_cast<double>(d))) {
    throw LinearSolveError("ridge_fit: normal matrix is singular (rcond estimate " +
                           std::to_string(rcond) + ", lambda " + std::to_string(lambda) + ")");
  }
  LinearMap map;
  map.A = ldlt.solve(X.transpose() * Y).transpose();
  map.b = (y_mean - x_mean * map.A.transpose()).transpose();
  return map;
}

}  // namespace mprim
