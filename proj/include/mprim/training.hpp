#pragma once

// Context -> movement-primitive regression.
//
// deep MP:           network predicts the full ProMP weights of every joint and is
//                    trained on the trajectory-space loss.
// residual deep MP:  network predicts the deviation from the mean training weights;
//                    the mean is added back before the same trajectory-space loss.
// d-DMP:             network predicts DMP parameters ([Omega, g] for reaching,
//                    [Omega, g, q0] for palpation) under the weight-space losses.
//
// Training is single-threaded and deterministic for a given seed: minibatch
// gradients are averaged in a fixed order and Adam updates the flattened
// parameters. The returned network is the one with the lowest validation loss.

#include "mprim/basis.hpp"
#include "mprim/dataset.hpp"
#include "mprim/dmp.hpp"
#include "mprim/kinematics.hpp"
#include "mprim/metrics.hpp"
#include "mprim/promp.hpp"
#include "mprim/regressor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprim {

enum class Method { DeepMp, ResidualDeepMp, Ddmp };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::DeepMp: return "deep-mp";
    case Method::ResidualDeepMp: return "residual";
    case Method::Ddmp: return "ddmp";
  }
  return "unknown";
}

inline Method method_from_string(const std::string& s) {
  if (s == "deep-mp") return Method::DeepMp;
  if (s == "residual") return Method::ResidualDeepMp;
  if (s == "ddmp") return Method::Ddmp;
  throw std::invalid_argument("unknown method '" + s + "' (expected deep-mp, residual or ddmp)");
}

struct TrainConfig {
  int epochs = 150;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double train_fraction = 0.85;
  double val_fraction_of_train = 0.25;
  std::uint64_t seed = 0;
  /// Epochs without a validation improvement before stopping.
  int early_stop_patience = 20;

  void validate() const {
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw std::invalid_argument("TrainConfig: train_fraction must be in (0, 1)");
    }
    if (!(val_fraction_of_train > 0.0 && val_fraction_of_train < 1.0)) {
      throw std::invalid_argument("TrainConfig: val_fraction_of_train must be in (0, 1)");
    }
    if (early_stop_patience < 1) {
      throw std::invalid_argument("TrainConfig: early_stop_patience must be >= 1");
    }
  }
};

struct NetConfig {
  std::vector<int> hidden{64, 64};
};

struct PrompSetup {
  int n_basis = 8;
  double lambda = kDefaultFitLambda;
};

struct DmpSetup {
  int n_basis = kDmpBasis;
  double tau = kDmpTau;
  double alpha = kDdmpGoalWeight;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int epochs_run = 0;
  int best_epoch = -1;  // 0-based; -1 when no epoch ran
  std::string stop_reason;
};

inline void write_report_csv(std::ostream& out, const TrainReport& r) {
  out << "epoch,train_loss,val_loss\n";
  out.precision(17);
  for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
    out << e + 1 << ',' << r.train_loss[e] << ',' << r.val_loss[e] << '\n';
  }
}

/// Per-feature standardization fitted on the training split.
struct ContextScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static ContextScaler fit(const DemoDataset& ds, std::span<const std::size_t> indices) {
    if (indices.empty()) throw std::invalid_argument("ContextScaler: no training samples");
    const Eigen::Index d = ds.samples.at(indices.front()).context.size();
    ContextScaler s{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
    for (auto i : indices) s.mean += ds.samples.at(i).context;
    s.mean /= static_cast<double>(indices.size());
    for (auto i : indices) s.scale += (ds.samples[i].context - s.mean).cwiseAbs2();
    s.scale = (s.scale / static_cast<double>(indices.size())).cwiseSqrt();
    for (Eigen::Index k = 0; k < d; ++k) {
      if (!(s.scale[k] > 1e-12)) s.scale[k] = 1.0;
    }
    return s;
  }

  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size()) {
      throw std::invalid_argument("ContextScaler: expected " + std::to_string(mean.size()) +
                                  " features, got " + std::to_string(x.size()));
    }
    return (x - mean).cwiseQuotient(scale);
  }
};

/// Everything needed to turn a context into a trajectory.
struct TrainedModel {
  Method method = Method::DeepMp;
  DatasetKind task = DatasetKind::Rtp;
  int n_joint = kDemoJoints;
  Mlp net;
  ContextScaler scaler;
  PhaseConfig phase;
  BasisConfig basis;  // ProMP basis; for d-DMP models it defines the evaluation ground truth
  double lambda = kDefaultFitLambda;
  // residual variant: flattened mean weights, globally and per group (RTP regions)
  Eigen::VectorXd global_mean;
  std::map<std::string, Eigen::VectorXd> group_means;
  // d-DMP
  DmpSetup dmp;
  Eigen::VectorXd known_start;  // reaching task: q0 is not predicted
  std::uint64_t seed = 0;
  SplitIndices split;

  [[nodiscard]] Eigen::VectorXd network_output(const Eigen::VectorXd& context) const {
    return net.forward(scaler.apply(context));
  }

  [[nodiscard]] const Eigen::VectorXd& mean_for(const std::string& group) const {
    const auto it = group_means.find(group);
    return it != group_means.end() ? it->second : global_mean;
  }

  /// Predicted ProMP weights (deep MP and residual variants only).
  [[nodiscard]] PrompWeights predict_weights(const DemoSample& s) const {
    if (method == Method::Ddmp) {
      throw std::logic_error("predict_weights: d-DMP models do not produce ProMP weights");
    }
    Eigen::VectorXd omega = network_output(s.context);
    if (method == Method::ResidualDeepMp) {
      omega = residual_combine(omega, mean_for(group_key(s, task)));
    }
    return PrompWeights::from_flat(omega, basis.n_basis());
  }

  [[nodiscard]] DmpModel predict_dmp(const DemoSample& s) const {
    if (method != Method::Ddmp) throw std::logic_error("predict_dmp: not a d-DMP model");
    const Eigen::VectorXd out = network_output(s.context);
    const Eigen::Index n_forcing = Eigen::Index{dmp.n_basis} * n_joint;
    DmpModel m;
    m.tau = dmp.tau;
    m.forcing_weights = Eigen::Map<const Eigen::MatrixXd>(out.data(), dmp.n_basis, n_joint);
    m.goal = out.segment(n_forcing, n_joint);
    m.start = task == DatasetKind::Rtp ? known_start : Eigen::VectorXd(out.tail(n_joint));
    return m;
  }

  [[nodiscard]] Trajectory predict(const DemoSample& s) const {
    if (method == Method::Ddmp) return reproduce(predict_dmp(s), phase.duration_samples, phase);
    return reconstruct(predict_weights(s), build_phi(phase, basis), phase);
  }
};

/// Flattened d-DMP target: [Omega (joint-major), g] or [Omega, g, q0].
inline Eigen::VectorXd ddmp_parameters(const DmpModel& m, DatasetKind task) {
  const Eigen::Index n_forcing = m.forcing_weights.size();
  const Eigen::Index n = m.n_joint();
  Eigen::VectorXd v(n_forcing + n * (task == DatasetKind::Rtp ? 1 : 2));
  v.head(n_forcing) = Eigen::Map<const Eigen::VectorXd>(m.forcing_weights.data(), n_forcing);
  v.segment(n_forcing, n) = m.goal;
  if (task == DatasetKind::Wpp) v.tail(n) = m.start;
  return v;
}

/// Output length of the d-DMP head: N_joint (N_bas_dmp + 1) or N_joint (N_bas_dmp + 2).
inline int ddmp_head_size(int n_joint, int n_basis_dmp, DatasetKind task) {
  return n_joint * (n_basis_dmp + (task == DatasetKind::Rtp ? 1 : 2));
}

/// Supervised problem over dataset indices: per-sample input, target and offset.
struct RegressionProblem {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> targets;
  std::vector<Eigen::VectorXd> offsets;  // empty vector entries mean no offset
  Loss loss;
};

namespace detail {

inline double mean_loss(const Mlp& net, const RegressionProblem& p,
                        std::span<const std::size_t> indices) {
  std::vector<double> losses;
  losses.reserve(indices.size());
  for (auto i : indices) {
    Eigen::VectorXd pred = net.forward(p.inputs[i]);
    if (p.offsets[i].size() != 0) pred += p.offsets[i];
    losses.push_back(p.loss.value(pred, p.targets[i]));
  }
  return pairwise_mean(losses);
}

inline void check_split(const SplitIndices& split, std::size_t n) {
  if (split.train.empty()) throw std::invalid_argument("training split is empty");
  for (const auto* set : {&split.train, &split.validation, &split.test}) {
    for (auto i : *set) {
      if (i >= n) throw std::out_of_range("split index " + std::to_string(i) + " out of range");
    }
  }
}

/// Training data in the broad sense: the fitted subset plus its validation hold-out.
inline std::vector<std::size_t> training_pool(const SplitIndices& split) {
  std::vector<std::size_t> pool = split.train;
  pool.insert(pool.end(), split.validation.begin(), split.validation.end());
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline PhaseConfig common_phase(const DemoDataset& ds) {
  if (ds.empty()) throw std::invalid_argument("dataset is empty");
  const PhaseConfig phase = ds.samples.front().trajectory.phase;
  const int n_joint = ds.samples.front().trajectory.joints();
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& t = ds.samples[i].trajectory;
    if (t.phase != phase || t.joints() != n_joint) {
      throw std::invalid_argument("inconsistent trajectory lengths: sample " + std::to_string(i) +
                                  " differs from sample 0");
    }
  }
  return phase;
}

}  // namespace detail

/// Minibatch Adam on `net`; keeps the parameters with the lowest validation loss
/// (training loss when the validation set is empty).
inline TrainReport fit_network(Mlp& net, const RegressionProblem& problem,
                               const SplitIndices& split, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_split(split, problem.inputs.size());
  TrainReport report;
  if (cfg.epochs == 0) {
    report.stop_reason = "zero epochs";
    return report;
  }

  Eigen::VectorXd params = net.flatten();
  Eigen::VectorXd best = params;
  double best_val = std::numeric_limits<double>::infinity();
  AdamState adam(params.size(), cfg.learning_rate);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order = split.train;
  const std::span<const std::size_t> monitor =
      split.validation.empty() ? std::span<const std::size_t>(split.train)
                               : std::span<const std::size_t>(split.validation);
  int since_best = 0;
  report.stop_reason = "epoch limit";

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        grad += mlp_backward(net, problem.inputs[i], problem.loss, problem.targets[i],
                             problem.offsets[i])
                    .gradient;
      }
      grad /= static_cast<double>(stop - start);
      adam_step(adam, params, grad);
      net.assign(params);
    }

    const double train_loss = detail::mean_loss(net, problem, split.train);
    const double val_loss = detail::mean_loss(net, problem, monitor);
    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);
    report.epochs_run = epoch + 1;
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      report.stop_reason = "non-finite loss";
      break;
    }
    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      report.stop_reason = "early stopping";
      break;
    }
  }
  net.assign(best);
  return report;
}

struct TrainResult {
  TrainedModel model;
  TrainReport report;
};

/// Ground-truth ProMP weights of every sample, flattened joint-major.
inline std::vector<Eigen::VectorXd> fit_all_weights(const DemoDataset& ds,
                                                    const WeightFitter& fitter) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples) out.push_back(fitter.fit(s.trajectory).flat());
  return out;
}

/// Mean training weights, globally and per group (RTP regions only).
inline void fit_mean_weights(TrainedModel& model, const DemoDataset& ds,
                             const std::vector<Eigen::VectorXd>& weights,
                             std::span<const std::size_t> train) {
  if (train.size() < 2) {
    throw std::invalid_argument("residual deep MP needs at least 2 training demonstrations");
  }
  std::vector<Eigen::VectorXd> all;
  std::map<std::string, std::vector<Eigen::VectorXd>> grouped;
  for (auto i : train) {
    all.push_back(weights[i]);
    if (ds.kind == DatasetKind::Rtp) grouped[group_key(ds.samples[i], ds.kind)].push_back(weights[i]);
  }
  model.global_mean = mean_weights(all);
  model.group_means.clear();
  for (const auto& [key, list] : grouped) model.group_means[key] = mean_weights(list);
}

namespace detail {

inline TrainedModel base_model(const DemoDataset& ds, const SplitIndices& split, Method method,
                               const PrompSetup& setup, const TrainConfig& cfg) {
  TrainedModel model;
  model.method = method;
  model.task = ds.kind;
  model.phase = common_phase(ds);
  model.n_joint = ds.samples.front().trajectory.joints();
  model.basis = BasisConfig::evenly_spaced(setup.n_basis, model.phase);
  model.lambda = setup.lambda;
  model.seed = cfg.seed;
  model.split = split;
  model.scaler = ContextScaler::fit(ds, split.train);
  return model;
}

inline std::vector<int> layer_sizes(int input, const NetConfig& net, int output) {
  std::vector<int> sizes{input};
  sizes.insert(sizes.end(), net.hidden.begin(), net.hidden.end());
  sizes.push_back(output);
  return sizes;
}

inline RegressionProblem scaled_inputs(const DemoDataset& ds, const ContextScaler& scaler,
                                       Loss loss) {
  RegressionProblem p{{}, {}, {}, std::move(loss)};
  p.inputs.reserve(ds.size());
  for (const auto& s : ds.samples) p.inputs.push_back(scaler.apply(s.context));
  p.offsets.assign(ds.size(), Eigen::VectorXd());
  return p;
}

inline TrainResult train_promp_network(const DemoDataset& ds, const SplitIndices& split,
                                       Method method, const PrompSetup& setup,
                                       const NetConfig& net_cfg, const TrainConfig& cfg) {
  cfg.validate();
  check_split(split, ds.size());
  TrainResult result{base_model(ds, split, method, setup, cfg), {}};
  TrainedModel& model = result.model;
  const Eigen::MatrixXd phi = build_phi(model.phase, model.basis);
  const WeightFitter fitter(phi, setup.lambda);
  const std::vector<Eigen::VectorXd> weights = fit_all_weights(ds, fitter);

  RegressionProblem problem = scaled_inputs(ds, model.scaler, Loss::trajectory(phi, model.n_joint));
  problem.targets = weights;
  if (method == Method::ResidualDeepMp) {
    fit_mean_weights(model, ds, weights, training_pool(split));
    for (std::size_t i = 0; i < ds.size(); ++i) {
      problem.offsets[i] = model.mean_for(group_key(ds.samples[i], ds.kind));
    }
  }

  const int out = setup.n_basis * model.n_joint;
  model.net = Mlp(layer_sizes(static_cast<int>(problem.inputs.front().size()), net_cfg, out),
                  cfg.seed);
  if (method == Method::ResidualDeepMp) {
    // Start from the mean: a zero output layer predicts zero residual.
    model.net.layers().back().weights.setZero();
  }
  result.report = fit_network(model.net, problem, split, cfg);
  return result;
}

}  // namespace detail

/// Network predicts full ProMP weights; trajectory-space loss summed over joints.
inline TrainResult train_deep_mp(const DemoDataset& ds, const SplitIndices& split,
                                 const PrompSetup& setup, const NetConfig& net,
                                 const TrainConfig& cfg) {
  return detail::train_promp_network(ds, split, Method::DeepMp, setup, net, cfg);
}

/// Network predicts residuals w.r.t. the training mean (per region when tagged).
inline TrainResult train_residual_deep_mp(const DemoDataset& ds, const SplitIndices& split,
                                          const PrompSetup& setup, const NetConfig& net,
                                          const TrainConfig& cfg) {
  return detail::train_promp_network(ds, split, Method::ResidualDeepMp, setup, net, cfg);
}

/// Fits a DMP per demonstration once, then regresses its parameters.
/// `eval_setup` fixes the ProMP basis used as evaluation ground truth.
inline TrainResult train_ddmp(const DemoDataset& ds, const SplitIndices& split,
                              const DmpSetup& dmp, const PrompSetup& eval_setup,
                              const NetConfig& net_cfg, const TrainConfig& cfg) {
  cfg.validate();
  detail::check_split(split, ds.size());
  TrainResult result{detail::base_model(ds, split, Method::Ddmp, eval_setup, cfg), {}};
  TrainedModel& model = result.model;
  model.dmp = dmp;

  const Loss loss = ds.kind == DatasetKind::Rtp ? Loss::ddmp_rtp(model.n_joint, dmp.n_basis, dmp.alpha)
                                                : Loss::ddmp_wpp(model.n_joint, dmp.n_basis);
  RegressionProblem problem = detail::scaled_inputs(ds, model.scaler, loss);
  problem.targets.reserve(ds.size());
  Eigen::VectorXd start_sum = Eigen::VectorXd::Zero(model.n_joint);
  for (const auto& s : ds.samples) {
    const DmpModel fitted = fit_dmp(s.trajectory, dmp.n_basis, dmp.tau);
    problem.targets.push_back(ddmp_parameters(fitted, ds.kind));
  }
  for (auto i : split.train) start_sum += ds.samples[i].trajectory.values.row(0).transpose();
  model.known_start = start_sum / static_cast<double>(split.train.size());

  const int out = ddmp_head_size(model.n_joint, dmp.n_basis, ds.kind);
  model.net = Mlp(detail::layer_sizes(static_cast<int>(problem.inputs.front().size()), net_cfg, out),
                  cfg.seed);
  result.report = fit_network(model.net, problem, split, cfg);
  return result;
}

/// Seeded 85/15 train/test split with 25% of training held out for validation.
inline SplitIndices default_split(std::size_t n, const TrainConfig& cfg) {
  SplitIndices split = random_split(n, cfg.train_fraction, cfg.seed);
  carve_validation(split, cfg.val_fraction_of_train, cfg.seed);
  return split;
}

// ---- evaluation -----------------------------------------------------------

using Predictor = std::function<Trajectory(const DemoSample&)>;

struct SamplePrediction {
  std::size_t index = 0;
  std::string group;
  Trajectory predicted;
  Trajectory ground_truth;
  double squared_error = 0.0;  // rad^2, summed over joints
  double distance_mm = 0.0;
};

struct Evaluation {
  std::vector<EvalRecord> groups;
  EvalRecord overall;
  std::vector<std::string> missing_groups;
  std::vector<SamplePrediction> samples;
};

inline std::vector<std::string> expected_groups(DatasetKind kind) {
  if (kind == DatasetKind::Rtp) return {"A", "B", "C", "D"};
  return {"I", "II", "III", "IV"};
}

/// AveMSE / AveED per group and overall. Ground truth is the ProMP reconstruction
/// of each demonstration with `gt_basis`, so for ProMP predictions the per-sample
/// error is exactly the sum of squared trajectory losses.
inline Evaluation evaluate(const DemoDataset& ds, std::span<const std::size_t> indices,
                           const Predictor& predict, const BasisConfig& gt_basis,
                           double lambda, const KinematicChain& chain) {
  if (indices.empty()) throw std::invalid_argument("evaluate: empty split");
  const PhaseConfig phase = detail::common_phase(ds);
  const Eigen::MatrixXd phi = build_phi(phase, gt_basis);
  const WeightFitter fitter(phi, lambda);

  Evaluation ev;
  std::map<std::string, std::vector<std::size_t>> by_group;
  for (auto i : indices) {
    const DemoSample& s = ds.samples.at(i);
    SamplePrediction p;
    p.index = i;
    p.group = group_key(s, ds.kind);
    p.ground_truth = reconstruct(fitter.fit(s.trajectory), phi, phase);
    p.predicted = predict(s);
    p.squared_error = squared_trajectory_error(p.predicted, p.ground_truth);
    p.distance_mm = final_distance_mm(p.predicted, p.ground_truth, chain);
    by_group[p.group].push_back(ev.samples.size());
    ev.samples.push_back(std::move(p));
  }

  auto summarize = [&](const std::string& key, std::span<const std::size_t> members) {
    std::vector<double> mse;
    std::vector<double> ed;
    for (auto m : members) {
      mse.push_back(ev.samples[m].squared_error);
      ed.push_back(ev.samples[m].distance_mm);
    }
    return EvalRecord{key, pairwise_mean(mse), pairwise_mean(ed), static_cast<int>(members.size())};
  };
  for (const auto& key : expected_groups(ds.kind)) {
    const auto it = by_group.find(key);
    if (it == by_group.end()) {
      ev.missing_groups.push_back(key);
      continue;
    }
    ev.groups.push_back(summarize(key, it->second));
  }
  std::vector<std::size_t> all(ev.samples.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  ev.overall = summarize("all", all);
  return ev;
}

inline Evaluation evaluate(const TrainedModel& model, const DemoDataset& ds,
                           std::span<const std::size_t> indices, const KinematicChain& chain) {
  return evaluate(
      ds, indices, [&](const DemoSample& s) { return model.predict(s); }, model.basis,
      model.lambda, chain);
}

/// Closed-form ridge regression from raw contexts to full ProMP weights.
struct RidgeBaseline {
  LinearMap map;
  PhaseConfig phase;
  BasisConfig basis;

  [[nodiscard]] Trajectory predict(const DemoSample& s) const {
    return reconstruct(PrompWeights::from_flat(map.predict(s.context), basis.n_basis()),
                       build_phi(phase, basis), phase);
  }
};

inline RidgeBaseline train_ridge_baseline(const DemoDataset& ds, std::span<const std::size_t> train,
                                          const PrompSetup& setup, double ridge_lambda) {
  RidgeBaseline base;
  base.phase = detail::common_phase(ds);
  base.basis = BasisConfig::evenly_spaced(setup.n_basis, base.phase);
  const WeightFitter fitter(build_phi(base.phase, base.basis), setup.lambda);
  std::vector<Eigen::VectorXd> contexts;
  std::vector<Eigen::VectorXd> targets;
  for (auto i : train) {
    contexts.push_back(ds.samples.at(i).context);
    targets.push_back(fitter.fit(ds.samples[i].trajectory).flat());
  }
  base.map = ridge_fit(contexts, targets, ridge_lambda);
  return base;
}

}  // namespace mprim
