#pragma once

// Discrete dynamic movement primitives (transformation system + exponential
// canonical system) with locally weighted regression of the forcing term.
//
//   tau * dq/dt = v
//   tau * dv/dt = alpha_z (beta_z (g - q) - v) + f(x)
//   tau * dx/dt = -alpha_x x
//   f(x) = x (g - q0) sum_i psi_i(x) w_i / sum_i psi_i(x)
//
// A demonstration with T samples is taken to span tau seconds, sample k sitting
// at time k * tau / T. Integration uses explicit Euler at dt = tau / (10 T), so
// each demonstration interval is covered by exactly ten steps.

#include "mprim/trajectory.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprim {

inline constexpr double kDmpAlphaZ = 25.0;
inline constexpr double kDmpTau = 7.6;
inline constexpr int kDmpBasis = 25;
inline constexpr int kDmpStepsPerSample = 10;

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forcing kernels: exponentially spaced in x so they are evenly spaced in time.
/// Width h_i = 4 / (c_i - c_{i+1})^2, i.e. a standard deviation of about a third of
/// the local center gap.
struct DmpKernels {
  Eigen::VectorXd centers;
  Eigen::VectorXd widths;

  static DmpKernels make(int n_basis, double alpha_x) {
    if (n_basis < 1) throw std::invalid_argument("DmpKernels: n_basis must be >= 1");
    DmpKernels k;
    k.centers.resize(n_basis);
    k.widths.resize(n_basis);
    for (int i = 0; i < n_basis; ++i) {
      const double s = n_basis == 1 ? 0.0 : static_cast<double>(i) / (n_basis - 1);
      k.centers[i] = std::exp(-alpha_x * s);
    }
    for (int i = 0; i < n_basis; ++i) {
      if (n_basis == 1) {
        k.widths[i] = 1.0;
      } else {
        const int j = i + 1 < n_basis ? i : i - 1;
        const double gap = k.centers[j] - k.centers[j + 1];
        k.widths[i] = 4.0 / (gap * gap);
      }
    }
    return k;
  }

  [[nodiscard]] Eigen::VectorXd activations(double x) const {
    return (-widths.array() * (x - centers.array()).square()).exp().matrix();
  }
};

struct DmpModel {
  Eigen::MatrixXd forcing_weights;  // N_bas_dmp x N_joint
  Eigen::VectorXd goal;
  Eigen::VectorXd start;
  double tau = kDmpTau;
  double alpha_z = kDmpAlphaZ;
  double beta_z = kDmpAlphaZ / 4.0;
  double alpha_x = kDmpAlphaZ / 3.0;
  /// Joints whose demo had g == q0; their forcing weights were set to zero.
  std::vector<int> degenerate_joints;

  [[nodiscard]] int n_basis() const { return static_cast<int>(forcing_weights.rows()); }
  [[nodiscard]] int n_joint() const { return static_cast<int>(goal.size()); }

  void validate() const {
    if (!(tau > 0.0) || !(alpha_z > 0.0) || !(beta_z > 0.0) || !(alpha_x > 0.0)) {
      throw std::invalid_argument("DmpModel: tau, alpha_z, beta_z and alpha_x must be positive");
    }
    if (start.size() != goal.size() || forcing_weights.cols() != goal.size()) {
      throw std::invalid_argument("DmpModel: goal, start and forcing weights disagree on joints");
    }
    if (forcing_weights.rows() < 1) {
      throw std::invalid_argument("DmpModel: at least one forcing kernel is required");
    }
  }

  [[nodiscard]] DmpKernels kernels() const { return DmpKernels::make(n_basis(), alpha_x); }
};

/// x(t) = exp(-alpha_x t / tau).
inline double canonical(double t, const DmpModel& model) {
  if (t < 0.0) throw std::invalid_argument("canonical: t must be >= 0");
  return std::exp(-model.alpha_x * t / model.tau);
}

namespace detail {

// Central differences inside, one-sided at the ends.
inline Eigen::MatrixXd differentiate(const Eigen::MatrixXd& y, double dt) {
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd d(n, y.cols());
  d.row(0) = (y.row(1) - y.row(0)) / dt;
  d.row(n - 1) = (y.row(n - 1) - y.row(n - 2)) / dt;
  for (Eigen::Index k = 1; k + 1 < n; ++k) d.row(k) = (y.row(k + 1) - y.row(k - 1)) / (2.0 * dt);
  return d;
}

}  // namespace detail

/// Fits a DMP to a demonstration, goal = last sample, start = first sample.
inline DmpModel fit_dmp(const Trajectory& traj, int n_basis = kDmpBasis, double tau = kDmpTau,
                        double alpha_z = kDmpAlphaZ) {
  traj.validate();
  const int T = traj.samples();
  if (T < 3) {
    throw std::invalid_argument("fit_dmp: at least 3 samples are required, got " +
                                std::to_string(T));
  }
  if (!(tau > 0.0)) throw std::invalid_argument("fit_dmp: tau must be positive");

  DmpModel model;
  model.tau = tau;
  model.alpha_z = alpha_z;
  model.beta_z = alpha_z / 4.0;
  model.alpha_x = alpha_z / 3.0;
  model.start = traj.values.row(0).transpose();
  model.goal = traj.values.row(T - 1).transpose();
  model.forcing_weights = Eigen::MatrixXd::Zero(n_basis, traj.joints());
  model.validate();

  const double dt = tau / T;
  const Eigen::MatrixXd& q = traj.values;
  const Eigen::MatrixXd qd = detail::differentiate(q, dt);
  const Eigen::MatrixXd qdd = detail::differentiate(qd, dt);
  const DmpKernels kernels = model.kernels();

  Eigen::VectorXd x(T);
  Eigen::MatrixXd psi(T, n_basis);
  for (int k = 0; k < T; ++k) {
    x[k] = canonical(k * dt, model);
    psi.row(k) = kernels.activations(x[k]).transpose();
  }

  for (int j = 0; j < traj.joints(); ++j) {
    const double amplitude = model.goal[j] - model.start[j];
    if (std::abs(amplitude) < 1e-12) {
      model.degenerate_joints.push_back(j);
      continue;
    }
    const Eigen::ArrayXd f_target =
        tau * tau * qdd.col(j).array() -
        alpha_z * (model.beta_z * (model.goal[j] - q.col(j).array()) - tau * qd.col(j).array());
    const Eigen::ArrayXd s = x.array() * amplitude;
    for (int i = 0; i < n_basis; ++i) {
      const Eigen::ArrayXd w = psi.col(i).array();
      const double den = (w * s * s).sum();
      model.forcing_weights(i, j) = den > 0.0 ? (w * s * f_target).sum() / den : 0.0;
    }
  }
  return model;
}

/// Euler integration of (q, v) from the model's start at rest, with the phase taken
/// from its closed form. Row k is the position at time k * dt.
inline Trajectory rollout(const DmpModel& model, double dt, int steps) {
  model.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("rollout: dt must be positive");
  if (steps < 2) throw std::invalid_argument("rollout: at least 2 steps are required");

  const DmpKernels kernels = model.kernels();
  const Eigen::VectorXd amplitude = model.goal - model.start;
  Eigen::VectorXd q = model.start;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(q.size());
  Eigen::MatrixXd out(steps, q.size());
  out.row(0) = q.transpose();
  for (int k = 1; k < steps; ++k) {
    const double x = canonical((k - 1) * dt, model);
    const Eigen::VectorXd psi = kernels.activations(x);
    const double psi_sum = psi.sum();
    Eigen::VectorXd forcing = Eigen::VectorXd::Zero(q.size());
    if (psi_sum > 1e-300) {
      forcing = (model.forcing_weights.transpose() * psi / psi_sum).cwiseProduct(amplitude) * x;
    }
    const Eigen::VectorXd accel =
        (model.alpha_z * (model.beta_z * (model.goal - q) - v) + forcing) / model.tau;
    const Eigen::VectorXd vel = v / model.tau;
    q += dt * vel;
    v += dt * accel;
    if (!q.allFinite() || !v.allFinite()) {
      throw IntegrationError("rollout: state became non-finite at step " + std::to_string(k));
    }
    out.row(k) = q.transpose();
  }
  return {std::move(out), PhaseConfig{1.0 / dt, steps}};
}

/// Rollout resampled onto a T-sample demonstration grid (dt = tau / (10 T)).
inline Trajectory reproduce(const DmpModel& model, int samples,
                            const PhaseConfig& phase_cfg) {
  if (samples < 2) throw std::invalid_argument("reproduce: at least 2 samples are required");
  const double dt = model.tau / (kDmpStepsPerSample * samples);
  const Trajectory fine = rollout(model, dt, kDmpStepsPerSample * (samples - 1) + 1);
  Eigen::MatrixXd values(samples, model.n_joint());
  for (int k = 0; k < samples; ++k) values.row(k) = fine.values.row(k * kDmpStepsPerSample);
  return {std::move(values), phase_cfg};
}

}  // namespace mprim
