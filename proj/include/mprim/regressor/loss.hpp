#pragma once

// Training losses on predicted parameter vectors.
//
// Trajectory loss (deep MP): per joint, the RMSE between the trajectories that the
// predicted and ground-truth ProMP weights generate, summed over joints. With
// d = theta_gt - theta_ps and G = Phi^T Phi it is sqrt(d^T G d / T).
//
// d-DMP losses act in parameter space on [Omega_dmp, g] (reach task) or
// [Omega_dmp, g, q0] (palpation task).
//
// RMSE-type terms are not differentiable at zero; their gradient is taken as 0 there.

#include "mprim/regressor/mlp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mprim {

inline constexpr double kDdmpGoalWeight = 100.0;

enum class LossKind { Trajectory, DdmpRtp, DdmpWpp };

inline std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Trajectory: return "trajectory";
    case LossKind::DdmpRtp: return "ddmp-rtp";
    case LossKind::DdmpWpp: return "ddmp-wpp";
  }
  return "unknown";
}

namespace detail {

inline double rms(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.size() == 0 ? 0.0 : std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

// d RMS(gt - ps) / d ps
inline Eigen::VectorXd rms_gradient(const Eigen::Ref<const Eigen::VectorXd>& diff, double value) {
  if (value == 0.0) return Eigen::VectorXd::Zero(diff.size());
  return -diff / (static_cast<double>(diff.size()) * value);
}

inline void require_same_size(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              Eigen::Index expected, std::string_view what) {
  if (a.size() != expected || b.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected parameter vectors of length " +
                                std::to_string(expected) + ", got " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()));
  }
}

}  // namespace detail

/// RMSE between Phi theta_gt and Phi theta_ps for one joint.
inline double loss_trajectory(const Eigen::VectorXd& theta_ps, const Eigen::VectorXd& theta_gt,
                              const Eigen::MatrixXd& phi) {
  detail::require_same_size(theta_ps, theta_gt, phi.cols(), "loss_trajectory");
  return detail::rms(phi * (theta_gt - theta_ps));
}

inline double loss_ddmp_rtp(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt, int n_joint,
                            double alpha = kDdmpGoalWeight) {
  if (!(alpha > 0.0)) throw std::invalid_argument("loss_ddmp_rtp: alpha must be positive");
  if (n_joint < 1 || pred.size() <= n_joint) {
    throw std::invalid_argument("loss_ddmp_rtp: parameter vector too short for the joint count");
  }
  detail::require_same_size(pred, gt, pred.size(), "loss_ddmp_rtp");
  const Eigen::Index n_forcing = pred.size() - n_joint;
  const Eigen::VectorXd diff = gt - pred;
  return detail::rms(diff.head(n_forcing)) + alpha * detail::rms(diff.tail(n_joint));
}

inline double loss_ddmp_wpp(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt) {
  detail::require_same_size(pred, gt, pred.size(), "loss_ddmp_wpp");
  return 0.5 * detail::rms(gt - pred);
}

/// Loss over a full network output vector, with its gradient w.r.t. that vector.
class Loss {
 public:
  /// Sum over joints of the trajectory RMSE; outputs are joint-major ProMP weights.
  static Loss trajectory(const Eigen::MatrixXd& phi, int n_joint) {
    Loss loss(LossKind::Trajectory);
    loss.gram_ = phi.transpose() * phi;
    loss.samples_ = static_cast<double>(phi.rows());
    loss.n_basis_ = static_cast<int>(phi.cols());
    loss.n_joint_ = n_joint;
    return loss;
  }

  static Loss ddmp_rtp(int n_joint, int n_basis_dmp, double alpha = kDdmpGoalWeight) {
    if (!(alpha > 0.0)) throw std::invalid_argument("Loss: alpha must be positive");
    Loss loss(LossKind::DdmpRtp);
    loss.n_joint_ = n_joint;
    loss.n_basis_ = n_basis_dmp;
    loss.alpha_ = alpha;
    return loss;
  }

  static Loss ddmp_wpp(int n_joint, int n_basis_dmp) {
    Loss loss(LossKind::DdmpWpp);
    loss.n_joint_ = n_joint;
    loss.n_basis_ = n_basis_dmp;
    return loss;
  }

  [[nodiscard]] LossKind kind() const { return kind_; }
  [[nodiscard]] double alpha() const { return alpha_; }

  [[nodiscard]] Eigen::Index output_size() const {
    switch (kind_) {
      case LossKind::Trajectory: return Eigen::Index{n_basis_} * n_joint_;
      case LossKind::DdmpRtp: return Eigen::Index{n_joint_} * (n_basis_ + 1);
      case LossKind::DdmpWpp: return Eigen::Index{n_joint_} * (n_basis_ + 2);
    }
    throw std::invalid_argument("Loss: unknown loss kind");
  }

  [[nodiscard]] double value(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt) const {
    return evaluate(pred, gt, nullptr);
  }

  double value_and_gradient(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt,
                            Eigen::VectorXd& grad) const {
    return evaluate(pred, gt, &grad);
  }

 private:
  explicit Loss(LossKind kind) : kind_(kind) {}

  double evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& gt,
                  Eigen::VectorXd* grad) const {
    detail::require_same_size(pred, gt, output_size(), to_string(kind_));
    const Eigen::VectorXd diff = gt - pred;
    if (grad) grad->setZero(pred.size());

    switch (kind_) {
      case LossKind::Trajectory: {
        double total = 0.0;
        for (int j = 0; j < n_joint_; ++j) {
          const auto d = diff.segment(Eigen::Index{j} * n_basis_, n_basis_);
          const Eigen::VectorXd gd = gram_ * d;
          const double value = std::sqrt(std::max(0.0, d.dot(gd)) / samples_);
          total += value;
          if (grad && value > 0.0) {
            grad->segment(Eigen::Index{j} * n_basis_, n_basis_) = -gd / (samples_ * value);
          }
        }
        return total;
      }
      case LossKind::DdmpRtp: {
        const Eigen::Index n_forcing = Eigen::Index{n_basis_} * n_joint_;
        const double forcing = detail::rms(diff.head(n_forcing));
        const double goal = detail::rms(diff.tail(n_joint_));
        if (grad) {
          grad->head(n_forcing) = detail::rms_gradient(diff.head(n_forcing), forcing);
          grad->tail(n_joint_) = alpha_ * detail::rms_gradient(diff.tail(n_joint_), goal);
        }
        return forcing + alpha_ * goal;
      }
      case LossKind::DdmpWpp: {
        const double value = detail::rms(diff);
        if (grad) *grad = 0.5 * detail::rms_gradient(diff, value);
        return 0.5 * value;
      }
    }
    throw std::invalid_argument("Loss: unknown loss kind");
  }

  LossKind kind_;
  Eigen::MatrixXd gram_;
  double samples_ = 1.0;
  int n_basis_ = 0;
  int n_joint_ = 0;
  double alpha_ = kDdmpGoalWeight;
};

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // w.r.t. flattened network parameters
};

/// Loss of net(ctx) + offset against `target`, with the gradient w.r.t. every
/// network parameter. `offset` shifts the output before the loss (the stored mean
/// weights of the residual variant); pass an empty vector for none.
inline LossGradient mlp_backward(const Mlp& net, const Eigen::VectorXd& ctx, const Loss& loss,
                                 const Eigen::VectorXd& target,
                                 const Eigen::VectorXd& offset = {}) {
  const ForwardCache cache = net.forward_cached(ctx);
  Eigen::VectorXd pred = cache.output();
  if (offset.size() != 0) {
    if (offset.size() != pred.size()) {
      throw std::invalid_argument("mlp_backward: offset length does not match network output");
    }
    pred += offset;
  }
  Eigen::VectorXd d_output;
  const double value = loss.value_and_gradient(pred, target, d_output);
  return {value, net.backward(cache, d_output)};
}

}  // namespace mprim
