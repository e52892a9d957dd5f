#pragma once

// Probabilistic movement primitives: ridge weight fitting, reconstruction,
// weight distributions with their per-sample marginals, sampling, and the
// mean/residual decomposition of weights.

#include "mprim/basis.hpp"
#include "mprim/trajectory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprim {

/// Default ridge term for weight fitting.
inline constexpr double kDefaultFitLambda = 1e-6;
/// Default observation-noise variance (rad^2) used when sampling.
inline constexpr double kDefaultObsNoiseVar = 1e-4;

class LinearSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Conditioning estimate for a factored symmetric matrix: the smaller of Eigen's
/// rcond and the pivot ratio (rcond alone misses exactly zero pivots). Zero when
/// the factorization failed or the matrix is not positive semi-definite.
inline double ldlt_rcond(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return 0.0;
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double max_pivot = d.maxCoeff();
  if (!(max_pivot > 0.0)) return 0.0;
  return std::min(ldlt.rcond(), d.minCoeff() / max_pivot);
}

}  // namespace detail

/// Per-joint basis weights, one column per joint (stacked column-wise this is Omega).
struct PrompWeights {
  Eigen::MatrixXd theta;  // N_bas x N_joint

  [[nodiscard]] int n_basis() const { return static_cast<int>(theta.rows()); }
  [[nodiscard]] int n_joint() const { return static_cast<int>(theta.cols()); }

  /// Joint-major flattening (Theta_1, ..., Theta_Njoint).
  [[nodiscard]] Eigen::VectorXd flat() const {
    return Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
  }
  static PrompWeights from_flat(const Eigen::VectorXd& omega, int n_basis) {
    if (n_basis < 1 || omega.size() % n_basis != 0) {
      throw std::invalid_argument("PrompWeights::from_flat: length " +
                                  std::to_string(omega.size()) + " is not a multiple of " +
                                  std::to_string(n_basis));
    }
    return {Eigen::Map<const Eigen::MatrixXd>(omega.data(), n_basis, omega.size() / n_basis)};
  }
};

/// Solves (lambda I + Phi^T Phi) theta = Phi^T q for many q with one factorization.
class WeightFitter {
 public:
  WeightFitter(const Eigen::MatrixXd& phi, double lambda) : phi_(phi), lambda_(lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("WeightFitter: lambda must be finite and >= 0");
    }
    const Eigen::Index n = phi.cols();
    Eigen::MatrixXd normal = phi.transpose() * phi;
    normal.diagonal().array() += lambda;
    ldlt_.compute(normal);
    const double rcond = detail::ldlt_rcond(ldlt_);
    if (!(rcond > 1e-15 * static_cast<double>(n))) {
      throw LinearSolveError("fit_weights: normal matrix (lambda I + Phi^T Phi) is singular or "
                             "ill-conditioned (rcond estimate " + std::to_string(rcond) +
                             ", lambda " + std::to_string(lambda) +
                             "); increase lambda or reduce n_basis");
    }
  }

  [[nodiscard]] Eigen::VectorXd fit(const Eigen::Ref<const Eigen::VectorXd>& q) const {
    if (q.size() != phi_.rows()) {
      throw std::invalid_argument("fit_weights: trajectory has " + std::to_string(q.size()) +
                                  " samples but Phi has " + std::to_string(phi_.rows()) + " rows");
    }
    return ldlt_.solve(phi_.transpose() * q);
  }

  [[nodiscard]] PrompWeights fit(const Trajectory& traj) const {
    PrompWeights w{Eigen::MatrixXd(phi_.cols(), traj.joints())};
    for (int j = 0; j < traj.joints(); ++j) w.theta.col(j) = fit(traj.values.col(j));
    return w;
  }

  [[nodiscard]] const Eigen::MatrixXd& phi() const { return phi_; }
  [[nodiscard]] double lambda() const { return lambda_; }

 private:
  Eigen::MatrixXd phi_;
  double lambda_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

inline Eigen::VectorXd fit_weights(const Eigen::Ref<const Eigen::VectorXd>& q,
                                   const Eigen::MatrixXd& phi, double lambda = kDefaultFitLambda) {
  return WeightFitter(phi, lambda).fit(q);
}

inline PrompWeights fit_weights(const Trajectory& traj, const Eigen::MatrixXd& phi,
                                double lambda = kDefaultFitLambda) {
  return WeightFitter(phi, lambda).fit(traj);
}

/// Psi_t^T theta. Shared by reconstruction and marginals so both agree bit for bit.
inline double evaluate_at(const Eigen::MatrixXd& phi, int t,
                          const Eigen::Ref<const Eigen::VectorXd>& theta) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) acc += phi(t, i) * theta[i];
  return acc;
}

inline Eigen::VectorXd reconstruct_joint(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                         const Eigen::MatrixXd& phi) {
  if (theta.size() != phi.cols()) {
    throw std::invalid_argument("reconstruct: " + std::to_string(theta.size()) +
                                " weights for " + std::to_string(phi.cols()) + " basis functions");
  }
  Eigen::VectorXd q(phi.rows());
  for (int t = 0; t < phi.rows(); ++t) q[t] = evaluate_at(phi, t, theta);
  return q;
}

/// Noise-free trajectory Phi * theta_j for every joint j.
inline Trajectory reconstruct(const PrompWeights& weights, const Eigen::MatrixXd& phi,
                              const PhaseConfig& phase_cfg) {
  if (phi.rows() != phase_cfg.duration_samples) {
    throw std::invalid_argument("reconstruct: Phi rows do not match the phase configuration");
  }
  Eigen::MatrixXd values(phi.rows(), weights.n_joint());
  for (int j = 0; j < weights.n_joint(); ++j) {
    values.col(j) = reconstruct_joint(weights.theta.col(j), phi);
  }
  return {std::move(values), phase_cfg};
}

/// Element-wise mean of equally sized weight vectors.
inline Eigen::VectorXd mean_weights(std::span<const Eigen::VectorXd> all) {
  if (all.empty()) throw std::invalid_argument("mean_weights: empty list");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(all.front().size());
  for (const auto& w : all) {
    if (w.size() != acc.size()) {
      throw std::invalid_argument("mean_weights: weight vectors differ in length");
    }
    acc += w;
  }
  return acc / static_cast<double>(all.size());
}

/// Gaussian over one joint's weights plus i.i.d. observation noise.
struct PrompDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double obs_noise_var = kDefaultObsNoiseVar;

  void validate() const {
    const Eigen::Index n = mean.size();
    if (covariance.rows() != n || covariance.cols() != n) {
      throw std::invalid_argument("PrompDistribution: covariance shape does not match mean");
    }
    if (!(obs_noise_var >= 0.0)) {
      throw std::invalid_argument("PrompDistribution: obs_noise_var must be >= 0");
    }
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw std::invalid_argument("PrompDistribution: covariance is not symmetric");
    }
  }
};

/// Sample mean and unbiased (N-1) covariance of the weight vectors.
inline PrompDistribution fit_distribution(std::span<const Eigen::VectorXd> all,
                                          double obs_noise_var = kDefaultObsNoiseVar) {
  if (all.size() < 2) {
    throw std::invalid_argument("fit_distribution: at least two weight vectors are required");
  }
  PrompDistribution dist;
  dist.mean = mean_weights(all);
  const Eigen::Index n = dist.mean.size();
  dist.covariance = Eigen::MatrixXd::Zero(n, n);
  for (const auto& w : all) {
    const Eigen::VectorXd d = w - dist.mean;
    dist.covariance.noalias() += d * d.transpose();
  }
  dist.covariance /= static_cast<double>(all.size() - 1);
  dist.covariance = 0.5 * (dist.covariance + dist.covariance.transpose()).eval();
  dist.obs_noise_var = obs_noise_var;
  return dist;
}

struct Marginal {
  double mean = 0.0;
  double variance = 0.0;
};

/// p(q_t | rho) = N(Psi_t^T mu, Sigma_q + Psi_t^T Sigma Psi_t).
inline Marginal marginal_at(int t, const PrompDistribution& dist, const Eigen::MatrixXd& phi) {
  if (t < 0 || t >= phi.rows()) {
    throw std::out_of_range("marginal_at: sample index " + std::to_string(t) + " out of range");
  }
  if (dist.mean.size() != phi.cols()) {
    throw std::invalid_argument("marginal_at: distribution and Phi disagree on n_basis");
  }
  const Eigen::VectorXd psi = phi.row(t).transpose();
  const double spread = psi.dot(dist.covariance * psi);
  return {evaluate_at(phi, t, dist.mean), dist.obs_noise_var + std::max(0.0, spread)};
}

/// Draws trajectories q_t = Psi_t^T Theta + eps_t with Theta ~ N(mu, Sigma).
/// The covariance is factored once via a symmetric eigendecomposition; negative
/// eigenvalues within tolerance are clamped to zero.
class TrajectorySampler {
 public:
  TrajectorySampler(PrompDistribution dist, Eigen::MatrixXd phi)
      : dist_(std::move(dist)), phi_(std::move(phi)) {
    dist_.validate();
    if (dist_.mean.size() != phi_.cols()) {
      throw std::invalid_argument("sample_trajectory: distribution and Phi disagree on n_basis");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dist_.covariance);
    if (eig.info() != Eigen::Success) {
      throw std::invalid_argument("sample_trajectory: covariance eigendecomposition failed");
    }
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (values.minCoeff() < -1e-10 * scale) {
      throw std::invalid_argument("sample_trajectory: covariance is not positive semi-definite "
                                  "(min eigenvalue " + std::to_string(values.minCoeff()) + ")");
    }
    factor_ = eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  [[nodiscard]] Eigen::VectorXd sample(std::mt19937_64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(dist_.mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    const Eigen::VectorXd theta = dist_.mean + factor_ * z;
    const double noise_sd = std::sqrt(dist_.obs_noise_var);
    Eigen::VectorXd q(phi_.rows());
    for (int t = 0; t < phi_.rows(); ++t) {
      const double eps = normal(rng);
      q[t] = evaluate_at(phi_, t, theta) + noise_sd * eps;
    }
    return q;
  }

 private:
  PrompDistribution dist_;
  Eigen::MatrixXd phi_;
  Eigen::MatrixXd factor_;
};

inline Eigen::VectorXd sample_trajectory(const PrompDistribution& dist, const Eigen::MatrixXd& phi,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return TrajectorySampler(dist, phi).sample(rng);
}

/// theta = mean_weights + residual, held exactly: `rounding` stores the rounding
/// error of the subtraction so that combining reproduces the original bits.
struct ResidualWeights {
  Eigen::VectorXd mean_weights;
  Eigen::VectorXd residual;
  Eigen::VectorXd rounding;
};

namespace detail {
// Knuth's error-free transformation: a + b == sum + err exactly.
struct TwoSum {
  double sum;
  double err;
};
inline TwoSum two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}
}  // namespace detail

inline ResidualWeights residual_split(const Eigen::VectorXd& theta, const Eigen::VectorXd& mean) {
  if (theta.size() != mean.size()) {
    throw std::invalid_argument("residual_split: theta has " + std::to_string(theta.size()) +
                                " entries, mean has " + std::to_string(mean.size()));
  }
  ResidualWeights r{mean, Eigen::VectorXd(theta.size()), Eigen::VectorXd(theta.size())};
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const auto [diff, err] = detail::two_sum(theta[i], -mean[i]);
    r.residual[i] = diff;
    r.rounding[i] = err;
  }
  return r;
}

inline Eigen::VectorXd residual_combine(const ResidualWeights& r) {
  if (r.residual.size() != r.mean_weights.size()) {
    throw std::invalid_argument("residual_combine: residual and mean differ in length");
  }
  const bool has_rounding = r.rounding.size() == r.residual.size();
  if (!has_rounding && r.rounding.size() != 0) {
    throw std::invalid_argument("residual_combine: rounding term has the wrong length");
  }
  Eigen::VectorXd theta(r.residual.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const auto [sum, err] = detail::two_sum(r.mean_weights[i], r.residual[i]);
    theta[i] = has_rounding ? sum + (err + r.rounding[i]) : sum;
  }
  return theta;
}

/// Predicted residual plus stored mean (no rounding term).
inline Eigen::VectorXd residual_combine(const Eigen::VectorXd& residual,
                                        const Eigen::VectorXd& mean) {
  return residual_combine(ResidualWeights{mean, residual, {}});
}

}  // namespace mprim
