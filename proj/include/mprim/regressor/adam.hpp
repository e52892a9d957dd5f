#pragma once

#include "mprim/regressor/mlp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace mprim {

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(Eigen::Index n_params, double lr = 1e-3)
      : first_moment(Eigen::VectorXd::Zero(n_params)),
        second_moment(Eigen::VectorXd::Zero(n_params)),
        learning_rate(lr) {}
};

/// One bias-corrected Adam update of `params` in place.
inline void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
                      const Eigen::VectorXd& grads) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter, gradient and moment shapes disagree");
  }
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= state.learning_rate * (state.first_moment.array() / correction1) /
                    ((state.second_moment.array() / correction2).sqrt() + state.epsilon);
}

inline void adam_step(AdamState& state, Mlp& net, const Eigen::VectorXd& grads) {
  Eigen::VectorXd flat = net.flatten();
  adam_step(state, flat, grads);
  net.assign(flat);
}

}  // namespace mprim
