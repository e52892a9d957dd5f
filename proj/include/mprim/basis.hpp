#pragma once

// Phase function and normalized Gaussian basis used by every trajectory model.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace mprim {

/// Sampling of a demonstration: T samples taken at `sampling_frequency` Hz.
struct PhaseConfig {
  double sampling_frequency = 20.0;
  int duration_samples = 150;

  void validate() const {
    if (!(sampling_frequency > 0.0) || !std::isfinite(sampling_frequency)) {
      throw std::invalid_argument("PhaseConfig: sampling_frequency must be positive and finite");
    }
    if (duration_samples < 2) {
      throw std::invalid_argument("PhaseConfig: duration_samples must be >= 2, got " +
                                  std::to_string(duration_samples));
    }
  }

  /// Phase of the last sample, z(T-1).
  [[nodiscard]] double span() const { return (duration_samples - 1) / sampling_frequency; }

  friend bool operator==(const PhaseConfig&, const PhaseConfig&) = default;
};

/// Unmodulated phase z(t) = t / f.
inline double phase(int t, const PhaseConfig& cfg) {
  if (t < 0 || t >= cfg.duration_samples) {
    throw std::out_of_range("phase: sample index " + std::to_string(t) + " outside [0, " +
                            std::to_string(cfg.duration_samples) + ")");
  }
  return static_cast<double>(t) / cfg.sampling_frequency;
}

/// Gaussian centers and shared width h (phase units squared).
struct BasisConfig {
  Eigen::VectorXd centers;
  double width = 1.0;

  [[nodiscard]] int n_basis() const { return static_cast<int>(centers.size()); }

  void validate() const {
    if (centers.size() < 1) {
      throw std::invalid_argument("BasisConfig: at least one center is required");
    }
    if (!(width > 0.0) || !std::isfinite(width)) {
      throw std::invalid_argument("BasisConfig: width must be positive and finite");
    }
    for (Eigen::Index i = 0; i < centers.size(); ++i) {
      if (!std::isfinite(centers[i])) {
        throw std::invalid_argument("BasisConfig: non-finite center");
      }
      if (i > 0 && !(centers[i] > centers[i - 1])) {
        throw std::invalid_argument("BasisConfig: centers must be strictly increasing");
      }
    }
  }

  /// Default placement: centers evenly spaced over [0, z(T-1)], h = (spacing)^2.
  /// A single basis sits at 0 with h = z(T-1)^2 (or 1 when the span is zero).
  static BasisConfig evenly_spaced(int n_basis, const PhaseConfig& phase_cfg) {
    if (n_basis < 1) {
      throw std::invalid_argument("BasisConfig: n_basis must be >= 1");
    }
    phase_cfg.validate();
    const double span = phase_cfg.span();
    BasisConfig cfg;
    if (n_basis == 1) {
      cfg.centers = Eigen::VectorXd::Zero(1);
      cfg.width = span > 0.0 ? span * span : 1.0;
      return cfg;
    }
    cfg.centers = Eigen::VectorXd::LinSpaced(n_basis, 0.0, span);
    const double spacing = span / (n_basis - 1);
    cfg.width = spacing * spacing;
    return cfg;
  }
};

/// psi_i(z) = b_i(z) / sum_j b_j(z), b_i(z) = exp(-(z - c_i)^2 / (2h)).
inline Eigen::VectorXd basis_row(double z, const BasisConfig& cfg) {
  if (!(cfg.width > 0.0)) {
    throw std::invalid_argument("basis_row: width must be positive");
  }
  if (!std::isfinite(z)) throw std::domain_error("basis_row: phase must be finite");
  // Shift by the nearest center's exponent so the largest term is exp(0) = 1;
  // normalization cancels the shift and nothing underflows far from the centers.
  const Eigen::ArrayXd sq = (z - cfg.centers.array()).square();
  const Eigen::VectorXd b = (-(sq - sq.minCoeff()) / (2.0 * cfg.width)).exp().matrix();
  return b / b.sum();
}

/// T x N_bas matrix whose row t is basis_row(phase(t)).
inline Eigen::MatrixXd build_phi(const PhaseConfig& phase_cfg, const BasisConfig& basis_cfg) {
  phase_cfg.validate();
  basis_cfg.validate();
  Eigen::MatrixXd phi(phase_cfg.duration_samples, basis_cfg.n_basis());
  for (int t = 0; t < phase_cfg.duration_samples; ++t) {
    phi.row(t) = basis_row(phase(t, phase_cfg), basis_cfg).transpose();
  }
  return phi;
}

}  // namespace mprim
