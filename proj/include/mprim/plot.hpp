#pragma once

// Plot-ready CSV and a minimal SVG overlay of predicted vs ground-truth joint
// trajectories (one panel per joint, prediction dashed red).

#include "mprim/kinematics.hpp"
#include "mprim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mprim {

namespace detail {

inline void require_same_shape(const Trajectory& pred, const Trajectory& gt) {
  if (pred.values.rows() != gt.values.rows() || pred.values.cols() != gt.values.cols()) {
    throw std::invalid_argument("plot: predicted and ground-truth trajectories differ in shape");
  }
}

}  // namespace detail

/// Long format: one row per (joint, t), so each joint contributes T rows.
inline void write_joint_csv(std::ostream& out, const Trajectory& pred, const Trajectory& gt) {
  detail::require_same_shape(pred, gt);
  out << "joint,t,time_s,predicted,ground_truth\n";
  out.precision(17);
  for (int j = 0; j < pred.joints(); ++j) {
    for (int t = 0; t < pred.samples(); ++t) {
      out << j + 1 << ',' << t << ',' << t / pred.phase.sampling_frequency << ','
          << pred.values(t, j) << ',' << gt.values(t, j) << '\n';
    }
  }
}

/// End-effector positions (m) along both trajectories.
inline void write_ee_path_csv(std::ostream& out, const Trajectory& pred, const Trajectory& gt,
                              const KinematicChain& chain) {
  detail::require_same_shape(pred, gt);
  out << "t,pred_x,pred_y,pred_z,gt_x,gt_y,gt_z\n";
  out.precision(17);
  for (int t = 0; t < pred.samples(); ++t) {
    const Eigen::Vector3d p = fk_position(chain, pred.values.row(t).transpose());
    const Eigen::Vector3d g = fk_position(chain, gt.values.row(t).transpose());
    out << t << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << g.x() << ',' << g.y() << ','
        << g.z() << '\n';
  }
}

inline void write_svg_overlay(std::ostream& out, const Trajectory& pred, const Trajectory& gt,
                              const std::string& title) {
  detail::require_same_shape(pred, gt);
  constexpr double panel_w = 360.0;
  constexpr double panel_h = 110.0;
  constexpr double margin = 30.0;
  const int n = pred.joints();
  const int T = pred.samples();
  const double height = margin + n * (panel_h + margin);
  const double width = panel_w + 2.0 * margin;

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << margin << "\" y=\"18\" font-size=\"13\">" << title << "</text>\n";

  for (int j = 0; j < n; ++j) {
    const double top = margin + j * (panel_h + margin);
    double lo = std::min(pred.values.col(j).minCoeff(), gt.values.col(j).minCoeff());
    double hi = std::max(pred.values.col(j).maxCoeff(), gt.values.col(j).maxCoeff());
    if (!(hi - lo > 1e-9)) {
      lo -= 0.5;
      hi += 0.5;
    }
    auto x_of = [&](int t) { return margin + panel_w * t / std::max(1, T - 1); };
    auto y_of = [&](double v) { return top + panel_h * (hi - v) / (hi - lo); };
    auto polyline = [&](const Trajectory& traj, const char* style) {
      svg << "<polyline fill=\"none\" " << style << " points=\"";
      for (int t = 0; t < T; ++t) svg << x_of(t) << ',' << y_of(traj.values(t, j)) << ' ';
      svg << "\"/>\n";
    };
    svg << "<rect x=\"" << margin << "\" y=\"" << top << "\" width=\"" << panel_w << "\" height=\""
        << panel_h << "\" fill=\"none\" stroke=\"#bbb\"/>\n";
    svg << "<text x=\"" << margin + 4 << "\" y=\"" << top + 12 << "\" font-size=\"10\">q"
        << j + 1 << " [" << lo << ", " << hi << "] rad</text>\n";
    polyline(gt, "stroke=\"black\" stroke-width=\"1.5\"");
    polyline(pred, "stroke=\"red\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"");
  }
  svg << "</svg>\n";
  out << svg.str();
}

}  // namespace mprim
