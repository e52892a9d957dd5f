#pragma once

// Synthetic demonstration corpora with the structure of the reach-to-palpate
// (RTP) and wedge palpation path (WPP) experiments.
//
// Geometry is synthetic: a smooth nonlinear "reach" map turns a task-space point
// into a seven-joint configuration. RTP demos are minimum-jerk motions from a
// fixed home configuration to reach(phantom nipple); WPP demos follow reach()
// along a radial stroke from the nipple, one stroke direction per pattern.

#include "mprim/trajectory.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprim {

inline constexpr int kDemoJoints = 7;
inline constexpr int kWppPatterns = 7;
inline constexpr int kWppConfigurations = 4;

enum class DatasetKind { Rtp, Wpp };
enum class SplitTag { Unassigned, Train, Validation, Test };

struct SampleTags {
  std::string region;        // "A".."D" for RTP
  int pattern = 0;           // 1..7 for WPP
  int configuration = 0;     // 1..4 for WPP (I..IV)
  double path_scale = 1.0;   // relative stroke length (WPP)

  friend bool operator==(const SampleTags&, const SampleTags&) = default;
};

struct DemoSample {
  Eigen::VectorXd context;
  Trajectory trajectory;
  SampleTags tags;
  SplitTag split = SplitTag::Unassigned;

  friend bool operator==(const DemoSample& a, const DemoSample& b) {
    return a.context.size() == b.context.size() && a.context == b.context &&
           a.trajectory == b.trajectory && a.tags == b.tags && a.split == b.split;
  }
};

struct DemoDataset {
  DatasetKind kind = DatasetKind::Rtp;
  std::uint64_t seed = 0;
  std::vector<DemoSample> samples;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] bool empty() const { return samples.empty(); }

  friend bool operator==(const DemoDataset&, const DemoDataset&) = default;
};

inline std::string roman(int configuration) {
  static const std::array<const char*, 4> names{"I", "II", "III", "IV"};
  if (configuration < 1 || configuration > 4) {
    throw std::out_of_range("configuration index must be 1..4");
  }
  return names[static_cast<std::size_t>(configuration - 1)];
}

/// Evaluation grouping key: region for RTP, configuration for WPP.
inline std::string group_key(const DemoSample& s, DatasetKind kind) {
  return kind == DatasetKind::Rtp ? s.tags.region : roman(s.tags.configuration);
}

/// Quintic minimum-jerk profile q0 -> q1 over T samples at the given rate.
inline Trajectory min_jerk(const Eigen::VectorXd& q0, const Eigen::VectorXd& q1, int samples,
                           double sampling_frequency = 20.0) {
  if (samples < 2) throw std::invalid_argument("min_jerk: at least 2 samples are required");
  if (q0.size() != q1.size()) throw std::invalid_argument("min_jerk: endpoint sizes differ");
  Eigen::MatrixXd values(samples, q0.size());
  for (int t = 0; t < samples; ++t) {
    const double s = static_cast<double>(t) / (samples - 1);
    const double p = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    values.row(t) = (q0 + (q1 - q0) * p).transpose();
  }
  return {std::move(values), PhaseConfig{sampling_frequency, samples}};
}

namespace workspace {

inline Eigen::VectorXd home() {
  Eigen::VectorXd q(kDemoJoints);
  q << 0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785;
  return q;
}

/// Smooth nonlinear stand-in for inverse kinematics over the table workspace.
inline Eigen::VectorXd reach(const Eigen::Vector3d& p) {
  const double radius = std::hypot(p.x(), p.y());
  const double heading = std::atan2(p.y(), p.x());
  const double rho = radius - 0.55;
  const double h = p.z() - 0.13;
  Eigen::VectorXd q(kDemoJoints);
  q[0] = heading;
  q[1] = 0.10 + 1.30 * rho + 1.6 * rho * rho - 0.9 * h;
  q[2] = 0.25 * std::sin(3.0 * heading);
  q[3] = -2.05 + 1.9 * rho - 1.2 * rho * rho + 0.6 * h;
  q[4] = 0.3 * std::sin(2.0 * heading + 4.0 * rho);
  q[5] = 1.9 + 0.6 * rho + 0.3 * rho * rho - 1.4 * h;
  q[6] = 0.785 + heading + 0.2 * std::cos(5.0 * rho);
  return q;
}

}  // namespace workspace

struct RtpConfig {
  std::array<int, 4> counts{292, 128, 73, 52};
  /// Nested square half-widths (m) of regions A..D around the workspace center.
  /// Region k is the square k minus square k-1, so A is the densest.
  std::array<double, 4> half_widths{0.06, 0.12, 0.18, 0.24};
  Eigen::Vector2d center{0.55, 0.0};
  double table_height = 0.09;
  double table_height_jitter = 0.005;
  double nipple_height = 0.04;
  int samples = 150;
  double sampling_frequency = 20.0;
  /// Std-dev (rad) of a smooth per-joint path bump; zero gives noiseless demos.
  double noise = 0.0;
};

struct WppConfig {
  int trials_per_cell = 31;
  /// Phantom positions for configurations I..IV (m, robot base frame).
  std::array<Eigen::Vector3d, 4> positions{Eigen::Vector3d{0.608, 0.063, 0.086},
                                           Eigen::Vector3d{0.516, 0.120, 0.096},
                                           Eigen::Vector3d{0.575, 0.015, 0.093},
                                           Eigen::Vector3d{0.488, 0.014, 0.092}};
  std::array<double, 4> length_scales{1.0, 0.9, 1.1, 0.95};
  double stroke_length = 0.07;
  double short_pattern_scale = 0.6;
  double nipple_height = 0.04;
  double dome_drop = 0.03;
  double angle_jitter = 0.03;
  double length_jitter = 0.03;
  double nipple_jitter = 0.002;
  int samples = 150;
  double sampling_frequency = 20.0;
  double noise = 0.0;
};

/// Patterns 6 and 7 are the shorter strokes.
inline bool is_short_pattern(int pattern) { return pattern == 6 || pattern == 7; }

namespace detail {

inline void add_path_noise(Trajectory& traj, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> normal(0.0, sigma);
  const int T = traj.samples();
  for (int j = 0; j < traj.joints(); ++j) {
    const double bump = normal(rng);
    for (int t = 0; t < T; ++t) {
      traj.values(t, j) += bump * std::sin(std::numbers::pi * t / (T - 1));
    }
  }
}

}  // namespace detail

inline DemoDataset generate_rtp(std::uint64_t seed, const RtpConfig& cfg = {}) {
  for (int c : cfg.counts) {
    if (c < 0) throw std::invalid_argument("generate_rtp: region counts must be >= 0");
  }
  DemoDataset ds;
  ds.kind = DatasetKind::Rtp;
  ds.seed = seed;
  std::mt19937_64 rng(seed);
  const Eigen::VectorXd home = workspace::home();
  static const std::array<const char*, 4> names{"A", "B", "C", "D"};

  for (std::size_t region = 0; region < 4; ++region) {
    const double outer = cfg.half_widths[region];
    const double inner = region == 0 ? 0.0 : cfg.half_widths[region - 1];
    std::uniform_real_distribution<double> coord(-outer, outer);
    std::uniform_real_distribution<double> height(-cfg.table_height_jitter,
                                                  cfg.table_height_jitter);
    for (int n = 0; n < cfg.counts[region]; ++n) {
      double dx = 0.0;
      double dy = 0.0;
      do {
        dx = coord(rng);
        dy = coord(rng);
      } while (std::max(std::abs(dx), std::abs(dy)) < inner);
      const Eigen::Vector3d phantom(cfg.center.x() + dx, cfg.center.y() + dy,
                                    cfg.table_height + height(rng));
      const Eigen::Vector3d nipple = phantom + Eigen::Vector3d(0.0, 0.0, cfg.nipple_height);

      DemoSample s;
      s.context = phantom;
      s.trajectory = min_jerk(home, workspace::reach(nipple), cfg.samples, cfg.sampling_frequency);
      detail::add_path_noise(s.trajectory, cfg.noise, rng);
      s.tags.region = names[region];
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

inline DemoDataset generate_wpp(std::uint64_t seed, const WppConfig& cfg = {}) {
  if (cfg.trials_per_cell < 1) {
    throw std::invalid_argument("generate_wpp: trials_per_cell must be >= 1");
  }
  DemoDataset ds;
  ds.kind = DatasetKind::Wpp;
  ds.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  const int T = cfg.samples;

  for (int pattern = 1; pattern <= kWppPatterns; ++pattern) {
    const double direction = 2.0 * std::numbers::pi * (pattern - 1) / kWppPatterns;
    const double pattern_scale = is_short_pattern(pattern) ? cfg.short_pattern_scale : 1.0;
    for (int config = 1; config <= kWppConfigurations; ++config) {
      const Eigen::Vector3d& phantom = cfg.positions[static_cast<std::size_t>(config - 1)];
      const double nominal_length =
          cfg.stroke_length * cfg.length_scales[static_cast<std::size_t>(config - 1)] *
          pattern_scale;
      for (int trial = 0; trial < cfg.trials_per_cell; ++trial) {
        const double angle = direction + cfg.angle_jitter * unit(rng);
        const double length = nominal_length * (1.0 + cfg.length_jitter * unit(rng));
        Eigen::Vector3d nipple = phantom + Eigen::Vector3d(0.0, 0.0, cfg.nipple_height);
        nipple += cfg.nipple_jitter * Eigen::Vector3d(unit(rng), unit(rng), unit(rng));

        Eigen::MatrixXd values(T, kDemoJoints);
        for (int t = 0; t < T; ++t) {
          const double u = static_cast<double>(t) / (T - 1);
          const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
          const double travel = length * s;
          const double drop = cfg.dome_drop * (travel / cfg.stroke_length) *
                              (travel / cfg.stroke_length);
          const Eigen::Vector3d point = nipple + Eigen::Vector3d(travel * std::cos(angle),
                                                                 travel * std::sin(angle), -drop);
          values.row(t) = workspace::reach(point).transpose();
        }

        DemoSample s;
        s.context = Eigen::VectorXd::Zero(3 + kWppPatterns);
        s.context.head<3>() = phantom;
        s.context[2 + pattern] = 1.0;
        s.trajectory = Trajectory(std::move(values), PhaseConfig{cfg.sampling_frequency, T});
        detail::add_path_noise(s.trajectory, cfg.noise, rng);
        s.tags.pattern = pattern;
        s.tags.configuration = config;
        s.tags.path_scale = pattern_scale;
        ds.samples.push_back(std::move(s));
      }
    }
  }
  return ds;
}

// ---- splits ---------------------------------------------------------------

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

enum class Disposition { Train, Test, Half, NotUsed };

/// Per-pattern disposition of one WPP experiment.
struct SplitSpec {
  std::string id;
  std::array<Disposition, kWppPatterns> patterns{};

  void validate() const {
    const auto has = [&](Disposition d) {
      return std::find(patterns.begin(), patterns.end(), d) != patterns.end();
    };
    const bool trains = has(Disposition::Train) || has(Disposition::Half);
    const bool tests = has(Disposition::Test) || has(Disposition::Half);
    if (!trains || !tests) {
      throw std::invalid_argument("SplitSpec " + id + ": needs at least one train and one test "
                                  "pattern");
    }
  }
};

/// The ten palpation experiments, patterns 1..7.
inline SplitSpec wpp_split(int experiment) {
  using enum Disposition;
  constexpr Disposition R = Train, E = Test, H = Half, N = NotUsed;
  static const std::array<std::array<Disposition, kWppPatterns>, 10> table{{
      {R, R, R, E, E, R, R},  // WPP1
      {R, R, E, E, R, R, R},  // WPP2
      {R, R, E, E, R, N, N},  // WPP3
      {R, E, E, R, R, N, N},  // WPP4
      {R, R, R, H, H, R, R},  // WPP5
      {R, R, H, H, R, R, R},  // WPP6
      {R, R, H, H, R, N, N},  // WPP7
      {R, H, H, R, R, N, N},  // WPP8
      {H, H, H, H, H, H, H},  // WPP9
      {H, H, H, H, H, N, N},  // WPP10
  }};
  if (experiment < 1 || experiment > 10) {
    throw std::out_of_range("wpp_split: experiment must be 1..10, got " +
                            std::to_string(experiment));
  }
  return {"WPP" + std::to_string(experiment), table[static_cast<std::size_t>(experiment - 1)]};
}

inline SplitSpec wpp_split(const std::string& id) {
  if (id.size() > 3 && (id.rfind("WPP", 0) == 0 || id.rfind("wpp", 0) == 0)) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(id.substr(3), &used);
      if (used == id.size() - 3) return wpp_split(k);
    } catch (const std::logic_error&) {
    }
  }
  throw std::invalid_argument("unknown split '" + id + "' (expected WPP1..WPP10)");
}

/// Train/test membership for a palpation experiment. Half patterns are split per
/// configuration after a seeded shuffle; the train side takes the extra sample
/// of an odd cell.
inline SplitIndices apply_split(const DemoDataset& ds, const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (ds.kind != DatasetKind::Wpp) {
    throw std::invalid_argument("apply_split: dataset has no pattern tags");
  }
  std::array<std::array<std::vector<std::size_t>, kWppConfigurations>, kWppPatterns> cells;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& tags = ds.samples[i].tags;
    if (tags.pattern < 1 || tags.pattern > kWppPatterns || tags.configuration < 1 ||
        tags.configuration > kWppConfigurations) {
      throw std::invalid_argument("apply_split: sample " + std::to_string(i) +
                                  " has invalid pattern/configuration tags");
    }
    cells[static_cast<std::size_t>(tags.pattern - 1)]
         [static_cast<std::size_t>(tags.configuration - 1)]
             .push_back(i);
  }

  SplitIndices out;
  std::mt19937_64 rng(seed);
  for (std::size_t p = 0; p < kWppPatterns; ++p) {
    const Disposition d = spec.patterns[p];
    if (d == Disposition::NotUsed) continue;
    std::size_t pattern_total = 0;
    for (const auto& cell : cells[p]) pattern_total += cell.size();
    if (pattern_total == 0) {
      throw std::invalid_argument("apply_split: " + spec.id + " uses pattern " +
                                  std::to_string(p + 1) + " but the dataset has none");
    }
    for (auto cell : cells[p]) {
      if (d == Disposition::Train) {
        out.train.insert(out.train.end(), cell.begin(), cell.end());
      } else if (d == Disposition::Test) {
        out.test.insert(out.test.end(), cell.begin(), cell.end());
      } else {
        std::shuffle(cell.begin(), cell.end(), rng);
        const std::size_t n_train = (cell.size() + 1) / 2;
        out.train.insert(out.train.end(), cell.begin(), cell.begin() + static_cast<long>(n_train));
        out.test.insert(out.test.end(), cell.begin() + static_cast<long>(n_train), cell.end());
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Seeded shuffle into train/test with `train_fraction` of samples for training.
inline SplitIndices random_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("random_split: train_fraction must be in (0, 1]");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  out.test.assign(order.begin() + static_cast<long>(n_train), order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

/// Moves a seeded `fraction` of the training indices into the validation set.
inline void carve_validation(SplitIndices& split, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("carve_validation: fraction must be in [0, 1)");
  }
  std::vector<std::size_t> pool = split.train;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(pool.begin(), pool.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
  split.validation.assign(pool.begin(), pool.begin() + static_cast<long>(n_val));
  split.train.assign(pool.begin() + static_cast<long>(n_val), pool.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
}

inline void tag_splits(DemoDataset& ds, const SplitIndices& split) {
  for (auto& s : ds.samples) s.split = SplitTag::Unassigned;
  for (auto i : split.train) ds.samples.at(i).split = SplitTag::Train;
  for (auto i : split.validation) ds.samples.at(i).split = SplitTag::Validation;
  for (auto i : split.test) ds.samples.at(i).split = SplitTag::Test;
}

}  // namespace mprim
