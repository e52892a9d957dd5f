#pragma once

// Fully connected network: tanh on hidden layers, identity on the output.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mprim {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
};

/// Activations of every layer for one input; activations[0] is the input.
struct ForwardCache {
  std::vector<Eigen::VectorXd> activations;

  [[nodiscard]] const Eigen::VectorXd& output() const { return activations.back(); }
};

class Mlp {
 public:
  Mlp() = default;

  /// Glorot-uniform weights drawn from the given seed, zero biases.
  Mlp(std::vector<int> layer_sizes, std::uint64_t seed) : Mlp(zeros(std::move(layer_sizes))) {
    std::mt19937_64 rng(seed);
    for (auto& layer : layers_) {
      const auto fan_out = static_cast<double>(layer.weights.rows());
      const auto fan_in = static_cast<double>(layer.weights.cols());
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
          layer.weights(r, c) = bound * dist(rng);
        }
      }
    }
  }

  static Mlp zeros(std::vector<int> layer_sizes) {
    if (layer_sizes.size() < 2) {
      throw std::invalid_argument("Mlp: need at least input and output sizes");
    }
    for (int s : layer_sizes) {
      if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
    }
    Mlp net;
    net.sizes_ = std::move(layer_sizes);
    for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
      net.layers_.push_back({Eigen::MatrixXd::Zero(net.sizes_[l + 1], net.sizes_[l]),
                             Eigen::VectorXd::Zero(net.sizes_[l + 1])});
    }
    return net;
  }

  [[nodiscard]] const std::vector<int>& layer_sizes() const { return sizes_; }
  [[nodiscard]] int input_size() const { return sizes_.front(); }
  [[nodiscard]] int output_size() const { return sizes_.back(); }
  [[nodiscard]] std::vector<DenseLayer>& layers() { return layers_; }
  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }

  [[nodiscard]] Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
    return n;
  }

  /// Per layer: weights (column-major), then bias.
  [[nodiscard]] Eigen::VectorXd flatten() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index at = 0;
    for (const auto& layer : layers_) {
      flat.segment(at, layer.weights.size()) =
          Eigen::Map<const Eigen::VectorXd>(layer.weights.data(), layer.weights.size());
      at += layer.weights.size();
      flat.segment(at, layer.bias.size()) = layer.bias;
      at += layer.bias.size();
    }
    return flat;
  }

  void assign(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count()) {
      throw std::invalid_argument("Mlp::assign: expected " + std::to_string(parameter_count()) +
                                  " parameters, got " + std::to_string(flat.size()));
    }
    Eigen::Index at = 0;
    for (auto& layer : layers_) {
      Eigen::Map<Eigen::VectorXd>(layer.weights.data(), layer.weights.size()) =
          flat.segment(at, layer.weights.size());
      at += layer.weights.size();
      layer.bias = flat.segment(at, layer.bias.size());
      at += layer.bias.size();
    }
  }

  [[nodiscard]] ForwardCache forward_cached(const Eigen::VectorXd& x) const {
    check_input(x);
    ForwardCache cache;
    cache.activations.reserve(layers_.size() + 1);
    cache.activations.push_back(x);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Eigen::VectorXd z = layers_[l].weights * cache.activations.back() + layers_[l].bias;
      if (l + 1 < layers_.size()) z = z.array().tanh().matrix();
      cache.activations.push_back(std::move(z));
    }
    return cache;
  }

  [[nodiscard]] Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    return forward_cached(x).output();
  }

  /// Gradient w.r.t. the flattened parameters given dLoss/dOutput.
  [[nodiscard]] Eigen::VectorXd backward(const ForwardCache& cache,
                                         const Eigen::VectorXd& d_output) const {
    if (d_output.size() != output_size()) {
      throw std::invalid_argument("Mlp::backward: output gradient has the wrong length");
    }
    Eigen::VectorXd grad(parameter_count());
    Eigen::VectorXd delta = d_output;
    Eigen::Index end = grad.size();
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const DenseLayer& layer = layers_[l];
      const Eigen::VectorXd& input = cache.activations[l];
      end -= layer.bias.size();
      grad.segment(end, layer.bias.size()) = delta;
      end -= layer.weights.size();
      Eigen::Map<Eigen::MatrixXd>(grad.data() + end, layer.weights.rows(), layer.weights.cols()) =
          delta * input.transpose();
      if (l > 0) {
        // input = tanh(z_{l-1}); d tanh = 1 - tanh^2
        delta = (layer.weights.transpose() * delta).cwiseProduct(
            (1.0 - input.array().square()).matrix());
      }
    }
    return grad;
  }

 private:
  void check_input(const Eigen::VectorXd& x) const {
    if (layers_.empty()) throw std::logic_error("Mlp: network has no layers");
    if (x.size() != input_size()) {
      throw std::invalid_argument("Mlp::forward: expected " + std::to_string(input_size()) +
                                  " inputs, got " + std::to_string(x.size()));
    }
  }

  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
};

}  // namespace mprim
