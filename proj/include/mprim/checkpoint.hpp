#pragma once

// JSON checkpoints for trained models. Doubles are written in shortest
// round-trip form, so save -> load reproduces predictions bit for bit.

#include "mprim/dataset_io.hpp"
#include "mprim/training.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace mprim {

inline constexpr const char* kCheckpointFormat = "mprim.checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline Eigen::VectorXd to_eigen(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json report_to_json(const TrainReport& r) {
  return {{"train_loss", r.train_loss},
          {"val_loss", r.val_loss},
          {"epochs_run", r.epochs_run},
          {"best_epoch", r.best_epoch},
          {"stop_reason", r.stop_reason}};
}

inline TrainReport report_from_json(const nlohmann::json& j) {
  TrainReport r;
  r.train_loss = j.at("train_loss").get<std::vector<double>>();
  r.val_loss = j.at("val_loss").get<std::vector<double>>();
  r.epochs_run = j.at("epochs_run").get<int>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  return r;
}

inline nlohmann::json model_to_json(const TrainedModel& m) {
  using detail::to_vector;
  nlohmann::json j = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"method", to_string(m.method)},
      {"task", to_string(m.task)},
      {"n_joint", m.n_joint},
      {"phase",
       {{"sampling_frequency", m.phase.sampling_frequency},
        {"duration_samples", m.phase.duration_samples}}},
      {"basis", {{"centers", to_vector(m.basis.centers)}, {"width", m.basis.width}}},
      {"lambda", m.lambda},
      {"network",
       {{"layer_sizes", m.net.layer_sizes()}, {"parameters", to_vector(m.net.flatten())}}},
      {"scaler", {{"mean", to_vector(m.scaler.mean)}, {"scale", to_vector(m.scaler.scale)}}},
      {"seed", m.seed},
      {"split",
       {{"train", m.split.train}, {"validation", m.split.validation}, {"test", m.split.test}}},
  };
  if (m.method == Method::ResidualDeepMp) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [key, mean] : m.group_means) groups[key] = to_vector(mean);
    j["residual"] = {{"global_mean", to_vector(m.global_mean)}, {"group_means", groups}};
  }
  if (m.method == Method::Ddmp) {
    j["dmp"] = {{"n_basis", m.dmp.n_basis},
                {"tau", m.dmp.tau},
                {"alpha", m.dmp.alpha},
                {"known_start", to_vector(m.known_start)}};
  }
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  using detail::to_eigen;
  if (j.value("format", "") != kCheckpointFormat) {
    throw std::invalid_argument("not a checkpoint (missing format tag)");
  }
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::invalid_argument("unsupported checkpoint version " + j.at("version").dump());
  }
  TrainedModel m;
  m.method = method_from_string(j.at("method").get<std::string>());
  m.task = dataset_kind_from_string(j.at("task").get<std::string>());
  m.n_joint = j.at("n_joint").get<int>();
  m.phase = PhaseConfig{j.at("phase").at("sampling_frequency").get<double>(),
                        j.at("phase").at("duration_samples").get<int>()};
  m.phase.validate();
  m.basis = BasisConfig{to_eigen(j.at("basis").at("centers")), j.at("basis").at("width").get<double>()};
  m.basis.validate();
  m.lambda = j.at("lambda").get<double>();
  m.net = Mlp::zeros(j.at("network").at("layer_sizes").get<std::vector<int>>());
  m.net.assign(to_eigen(j.at("network").at("parameters")));
  m.scaler = ContextScaler{to_eigen(j.at("scaler").at("mean")), to_eigen(j.at("scaler").at("scale"))};
  if (m.scaler.mean.size() != m.net.input_size() || m.scaler.scale.size() != m.net.input_size()) {
    throw std::invalid_argument("checkpoint: normalization does not match network input size");
  }
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& split = j.at("split");
  m.split.train = split.at("train").get<std::vector<std::size_t>>();
  m.split.validation = split.at("validation").get<std::vector<std::size_t>>();
  m.split.test = split.at("test").get<std::vector<std::size_t>>();

  if (m.method == Method::ResidualDeepMp) {
    const auto& r = j.at("residual");
    m.global_mean = to_eigen(r.at("global_mean"));
    for (const auto& [key, value] : r.at("group_means").items()) m.group_means[key] = to_eigen(value);
  }
  if (m.method == Method::Ddmp) {
    const auto& d = j.at("dmp");
    m.dmp.n_basis = d.at("n_basis").get<int>();
    m.dmp.tau = d.at("tau").get<double>();
    m.dmp.alpha = d.at("alpha").get<double>();
    m.known_start = to_eigen(d.at("known_start"));
    if (m.net.output_size() != ddmp_head_size(m.n_joint, m.dmp.n_basis, m.task)) {
      throw std::invalid_argument("checkpoint: d-DMP head size does not match settings");
    }
  } else if (m.net.output_size() != m.basis.n_basis() * m.n_joint) {
    throw std::invalid_argument("checkpoint: network output does not match basis x joints");
  }
  return m;
}

inline void save_checkpoint(const TrainedModel& m, const std::string& path,
                            const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j = model_to_json(m);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for checkpoint " + path);
}

inline TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("checkpoint " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace mprim
