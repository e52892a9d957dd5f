#pragma once

// Serial-chain forward kinematics from Denavit-Hartenberg parameters.
//
//   standard: T_i = Rz(theta_i) Tz(d_i) Tx(a_i) Rx(alpha_i)
//   modified: T_i = Rx(alpha_i) Tx(a_i) Rz(theta_i) Tz(d_i)   (Craig)
//
// with theta_i = q_i + theta_offset_i. An optional fixed flange transform (same
// convention, zero joint angle) is appended after the last joint.

#include "mprim/trajectory.hpp"

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprim {

enum class DhConvention { Standard, Modified };

struct DhLink {
  double a = 0.0;      // m
  double d = 0.0;      // m
  double alpha = 0.0;  // rad
  double theta_offset = 0.0;  // rad
};

struct KinematicChain {
  DhConvention convention = DhConvention::Standard;
  std::vector<DhLink> links;
  std::optional<DhLink> flange;

  [[nodiscard]] int n_joint() const { return static_cast<int>(links.size()); }

  void validate() const {
    if (links.empty()) throw std::invalid_argument("KinematicChain: at least one joint required");
    auto finite = [](const DhLink& l) {
      return std::isfinite(l.a) && std::isfinite(l.d) && std::isfinite(l.alpha) &&
             std::isfinite(l.theta_offset);
    };
    for (const auto& l : links) {
      if (!finite(l)) throw std::invalid_argument("KinematicChain: non-finite DH parameter");
    }
    if (flange && !finite(*flange)) {
      throw std::invalid_argument("KinematicChain: non-finite flange parameter");
    }
  }

  /// Seven-joint stand-in shaped like a Franka-style arm (modified DH with a
  /// 0.107 m flange). Any fixed chain gives internally consistent end-effector
  /// errors; replace it via a chain file for a specific robot.
  static KinematicChain default_seven_dof() {
    constexpr double half_pi = std::numbers::pi / 2.0;
    KinematicChain chain;
    chain.convention = DhConvention::Modified;
    chain.links = {
        {0.0, 0.333, 0.0, 0.0},       {0.0, 0.0, -half_pi, 0.0},
        {0.0, 0.316, half_pi, 0.0},   {0.0825, 0.0, half_pi, 0.0},
        {-0.0825, 0.384, -half_pi, 0.0}, {0.0, 0.0, half_pi, 0.0},
        {0.088, 0.0, half_pi, 0.0},
    };
    chain.flange = DhLink{0.0, 0.107, 0.0, 0.0};
    return chain;
  }
};

inline Eigen::Isometry3d dh_transform(const DhLink& link, double q, DhConvention convention) {
  const double theta = q + link.theta_offset;
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (convention == DhConvention::Standard) {
    t.rotate(Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()));
    t.translate(Eigen::Vector3d(0.0, 0.0, link.d));
    t.translate(Eigen::Vector3d(link.a, 0.0, 0.0));
    t.rotate(Eigen::AngleAxisd(link.alpha, Eigen::Vector3d::UnitX()));
  } else {
    t.rotate(Eigen::AngleAxisd(link.alpha, Eigen::Vector3d::UnitX()));
    t.translate(Eigen::Vector3d(link.a, 0.0, 0.0));
    t.rotate(Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()));
    t.translate(Eigen::Vector3d(0.0, 0.0, link.d));
  }
  return t;
}

/// Position (m) of the final chain frame for joint vector q.
inline Eigen::Vector3d fk_position(const KinematicChain& chain,
                                   const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (q.size() != chain.n_joint()) {
    throw std::invalid_argument("fk_position: chain has " + std::to_string(chain.n_joint()) +
                                " joints, got " + std::to_string(q.size()) + " angles");
  }
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  for (int i = 0; i < chain.n_joint(); ++i) {
    pose = pose * dh_transform(chain.links[static_cast<std::size_t>(i)], q[i], chain.convention);
  }
  if (chain.flange) pose = pose * dh_transform(*chain.flange, 0.0, chain.convention);
  return pose.translation();
}

/// End-effector distance (mm) between the final samples of two trajectories.
inline double final_distance_mm(const Trajectory& pred, const Trajectory& gt,
                                const KinematicChain& chain) {
  const Eigen::VectorXd q_pred = pred.values.row(pred.samples() - 1).transpose();
  const Eigen::VectorXd q_gt = gt.values.row(gt.samples() - 1).transpose();
  return 1000.0 * (fk_position(chain, q_pred) - fk_position(chain, q_gt)).norm();
}

/// Mean final end-effector distance in millimeters.
inline double ave_ed(std::span<const Trajectory> pred, std::span<const Trajectory> gt,
                     const KinematicChain& chain) {
  if (pred.empty()) throw std::invalid_argument("ave_ed: empty input");
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("ave_ed: prediction and ground-truth lists differ in length");
  }
  double total = 0.0;
  for (std::size_t n = 0; n < pred.size(); ++n) total += final_distance_mm(pred[n], gt[n], chain);
  return total / static_cast<double>(pred.size());
}

// Chain file schema:
// {
//   "convention": "standard" | "modified",
//   "links": [ {"a": m, "d": m, "alpha": rad, "theta_offset": rad}, ... ],
//   "flange": {"a": m, "d": m, "alpha": rad, "theta_offset": rad}   (optional)
// }
inline void to_json(nlohmann::json& j, const DhLink& l) {
  j = {{"a", l.a}, {"d", l.d}, {"alpha", l.alpha}, {"theta_offset", l.theta_offset}};
}
inline void from_json(const nlohmann::json& j, DhLink& l) {
  l.a = j.value("a", 0.0);
  l.d = j.value("d", 0.0);
  l.alpha = j.value("alpha", 0.0);
  l.theta_offset = j.value("theta_offset", 0.0);
}

inline nlohmann::json chain_to_json(const KinematicChain& chain) {
  nlohmann::json j;
  j["convention"] = chain.convention == DhConvention::Standard ? "standard" : "modified";
  j["links"] = chain.links;
  if (chain.flange) j["flange"] = *chain.flange;
  return j;
}

inline KinematicChain chain_from_json(const nlohmann::json& j) {
  KinematicChain chain;
  const std::string convention = j.value("convention", "standard");
  if (convention == "standard") {
    chain.convention = DhConvention::Standard;
  } else if (convention == "modified") {
    chain.convention = DhConvention::Modified;
  } else {
    throw std::invalid_argument("chain file: unknown convention '" + convention + "'");
  }
  chain.links = j.at("links").get<std::vector<DhLink>>();
  if (j.contains("flange")) chain.flange = j.at("flange").get<DhLink>();
  chain.validate();
  return chain;
}

inline KinematicChain load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chain file " + path);
  return chain_from_json(nlohmann::json::parse(in));
}

}  // namespace mprim
