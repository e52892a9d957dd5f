#pragma once

#include "mprim/basis.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mprim {

/// Joint-space time series: row t holds the joint positions (rad) of sample t.
struct Trajectory {
  Eigen::MatrixXd values;
  PhaseConfig phase;

  Trajectory() = default;
  Trajectory(Eigen::MatrixXd v, PhaseConfig p) : values(std::move(v)), phase(p) { validate(); }

  [[nodiscard]] int samples() const { return static_cast<int>(values.rows()); }
  [[nodiscard]] int joints() const { return static_cast<int>(values.cols()); }

  void validate() const {
    phase.validate();
    if (values.rows() != phase.duration_samples) {
      throw std::invalid_argument("Trajectory: " + std::to_string(values.rows()) +
                                  " rows but phase expects " +
                                  std::to_string(phase.duration_samples));
    }
    if (values.cols() < 1) {
      throw std::invalid_argument("Trajectory: at least one joint is required");
    }
    if (!values.allFinite()) {
      throw std::invalid_argument("Trajectory: non-finite joint value");
    }
  }

  friend bool operator==(const Trajectory& a, const Trajectory& b) {
    return a.phase == b.phase && a.values.rows() == b.values.rows() &&
           a.values.cols() == b.values.cols() && a.values == b.values;
  }
};

}  // namespace mprim
